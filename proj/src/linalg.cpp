#include "circadj/linalg.hpp"

#include "circadj/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace circadj {

SparsityPattern::SparsityPattern(int n, std::vector<std::pair<int, int>> entries) : n_(n) {
    // (col, row) ordering gives compressed-column layout directly
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    rows_.reserve(entries.size());
    cols_.reserve(entries.size());
    for (const auto& [r, c] : entries) {
        rows_.push_back(r);
        cols_.push_back(c);
        ++col_ptr_[static_cast<std::size_t>(c) + 1];
    }
    for (int c = 0; c < n; ++c) col_ptr_[static_cast<std::size_t>(c) + 1] += col_ptr_[static_cast<std::size_t>(c)];
}

int SparsityPattern::slot(int r, int c) const {
    if (c < 0 || c >= n_) return -1;
    auto begin = rows_.begin() + col_ptr_[static_cast<std::size_t>(c)];
    auto end = rows_.begin() + col_ptr_[static_cast<std::size_t>(c) + 1];
    auto it = std::lower_bound(begin, end, r);
    return (it != end && *it == r) ? static_cast<int>(it - rows_.begin()) : -1;
}

void multiply(const SparsityPattern& p, const Values& a, const Vector& x, Vector& y) {
    y.setZero(p.size());
    for (int s = 0; s < p.nnz(); ++s) y[p.row(s)] += a[static_cast<std::size_t>(s)] * x[p.col(s)];
}

void multiply_transpose(const SparsityPattern& p, const Values& a, const Vector& x, Vector& y) {
    y.setZero(p.size());
    for (int s = 0; s < p.nnz(); ++s) y[p.col(s)] += a[static_cast<std::size_t>(s)] * x[p.row(s)];
}

void multiply_transpose(const SparsityPattern& p, const Values& a, const DenseMatrix& x, DenseMatrix& y) {
    y.setZero(p.size(), x.cols());
    for (int s = 0; s < p.nnz(); ++s) y.row(p.col(s)) += a[static_cast<std::size_t>(s)] * x.row(p.row(s));
}

SparseMatrix to_sparse(const SparsityPattern& p, const Values& a) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(p.nnz()));
    for (int s = 0; s < p.nnz(); ++s) t.emplace_back(p.row(s), p.col(s), a[static_cast<std::size_t>(s)]);
    SparseMatrix m(p.size(), p.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

DenseMatrix to_dense(const SparsityPattern& p, const Values& a) {
    DenseMatrix m = DenseMatrix::Zero(p.size(), p.size());
    for (int s = 0; s < p.nnz(); ++s) m(p.row(s), p.col(s)) += a[static_cast<std::size_t>(s)];
    return m;
}

struct Factorization::Sparse {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

Factorization::Factorization(const SparsityPattern& p, const Values& a, bool force_sparse) {
    if (p.size() < kDenseThreshold && !force_sparse) {
        dense_ = std::make_unique<Eigen::PartialPivLU<DenseMatrix>>(to_dense(p, a));
        const auto diag = dense_->matrixLU().diagonal();
        bool singular = !diag.allFinite() || (diag.array() == 0.0).any();
        if (!singular && p.size() > 0 && dense_->rcond() < std::numeric_limits<double>::epsilon())
            singular = true;
        if (singular) throw SolverError("singular step matrix");
    } else {
        sparse_ = std::make_unique<Sparse>();
        SparseMatrix m = to_sparse(p, a);
        m.makeCompressed();
        sparse_->lu.analyzePattern(m);
        sparse_->lu.factorize(m);
        if (sparse_->lu.info() != Eigen::Success) throw SolverError("singular step matrix");
    }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Vector Factorization::solve(const Vector& b) const {
    Vector x = dense_ ? Vector(dense_->solve(b)) : Vector(sparse_->lu.solve(b));
    if (!x.allFinite()) throw SolverError("non-finite linear solve result");
    return x;
}

Vector Factorization::solve_transpose(const Vector& b) const {
    Vector x = dense_ ? Vector(dense_->transpose().solve(b)) : Vector(sparse_->lu.transpose().solve(b));
    if (!x.allFinite()) throw SolverError("non-finite linear solve result");
    return x;
}

DenseMatrix Factorization::solve_transpose(const DenseMatrix& b) const {
    DenseMatrix x = dense_ ? DenseMatrix(dense_->transpose().solve(b)) : DenseMatrix(sparse_->lu.transpose().solve(b));
    if (!x.allFinite()) throw SolverError("non-finite linear solve result");
    return x;
}

const Factorization& FactorCache::factor(const SparsityPattern& p, const Values& a) {
    if (!current_ || a != last_) {
        current_ = std::make_shared<const Factorization>(p, a, force_sparse_);
        last_ = a;
        ++count_;
    }
    return *current_;
}

std::shared_ptr<const Factorization> FactorCache::shared_factor(const SparsityPattern& p, const Values& a) {
    factor(p, a);
    return current_;
}

}  // namespace circadj
