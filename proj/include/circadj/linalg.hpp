#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <utility>
#include <vector>

namespace circadj {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Fixed compressed-column sparsity pattern shared by every matrix of one
/// circuit (J_C, J_G, device stamps, step matrices). Matrices on a pattern
/// are plain value arrays, so linear combinations are vector operations and
/// "same matrix as last step" is an array comparison.
class SparsityPattern {
public:
    SparsityPattern() = default;
    SparsityPattern(int n, std::vector<std::pair<int, int>> entries);

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] int nnz() const { return static_cast<int>(rows_.size()); }
    /// Slot of entry (r, c), or -1 if it is not in the pattern.
    [[nodiscard]] int slot(int r, int c) const;
    [[nodiscard]] int row(int s) const { return rows_[static_cast<std::size_t>(s)]; }
    [[nodiscard]] int col(int s) const { return cols_[static_cast<std::size_t>(s)]; }
    [[nodiscard]] const std::vector<int>& col_ptr() const { return col_ptr_; }

private:
    int n_ = 0;
    std::vector<int> col_ptr_;
    std::vector<int> rows_;
    std::vector<int> cols_;
};

using Values = std::vector<double>;

/// y = A x
void multiply(const SparsityPattern& p, const Values& a, const Vector& x, Vector& y);
/// y = A^T x
void multiply_transpose(const SparsityPattern& p, const Values& a, const Vector& x, Vector& y);
void multiply_transpose(const SparsityPattern& p, const Values& a, const DenseMatrix& x, DenseMatrix& y);

[[nodiscard]] SparseMatrix to_sparse(const SparsityPattern& p, const Values& a);
[[nodiscard]] DenseMatrix to_dense(const SparsityPattern& p, const Values& a);

/// LU factorization of a square pattern matrix. Dense partial-pivot LU
/// below kDenseThreshold unknowns, sparse LU above (or when forced).
/// Throws SolverError if the matrix is singular.
class Factorization {
public:
    static constexpr int kDenseThreshold = 100;

    Factorization(const SparsityPattern& p, const Values& a, bool force_sparse = false);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;

    [[nodiscard]] bool is_dense() const { return dense_ != nullptr; }
    [[nodiscard]] Vector solve(const Vector& b) const;
    [[nodiscard]] Vector solve_transpose(const Vector& b) const;
    [[nodiscard]] DenseMatrix solve_transpose(const DenseMatrix& b) const;

private:
    struct Sparse;
    std::unique_ptr<Eigen::PartialPivLU<DenseMatrix>> dense_;
    std::unique_ptr<Sparse> sparse_;
};

/// Keeps the most recent factorization and reuses it while the matrix
/// values stay bit-identical (switch plateaus, linear circuits).
class FactorCache {
public:
    explicit FactorCache(bool force_sparse = false) : force_sparse_(force_sparse) {}

    const Factorization& factor(const SparsityPattern& p, const Values& a);
    [[nodiscard]] std::shared_ptr<const Factorization> shared_factor(const SparsityPattern& p, const Values& a);
    [[nodiscard]] long factorizations() const { return count_; }

private:
    bool force_sparse_;
    Values last_;
    std::shared_ptr<const Factorization> current_;
    long count_ = 0;
};

[[nodiscard]] inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace circadj
