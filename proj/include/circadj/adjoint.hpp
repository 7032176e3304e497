#pragma once

#include "circadj/linalg.hpp"
#include "circadj/mna.hpp"
#include "circadj/netlist.hpp"
#include "circadj/transient.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace circadj {

/// Linear quantity of interest U = weights . phi.
struct Qoi {
    Vector weights;
    std::string label;
};

/// "v(a)", "v(a,b)" (= v(a) - v(b)) or "i(L1)" / "i(V1)" for branch currents.
[[nodiscard]] Qoi make_qoi(const StampedSystem& sys, std::string_view expr);

/// Theta-step operators of the forward scheme linearized along a stored
/// trajectory, applied transposed and backward in time. A step from grid
/// index j down to i (H = (j - i) dt) solves
///   (J_C/H + theta A_j)^T z_i = (J_C/H - (1 - theta) A_j)^T z_j + b
/// with A_j = J_G(phi_j, t_j). With i = j - 1 this is exactly the transpose
/// of the forward step, which makes the adjoint consistent with the discrete
/// forward solution. Keeps a factorization cache: one instance per thread.
class AdjointStepper {
public:
    AdjointStepper(const StampedSystem& sys, const Trajectory& traj, bool force_sparse = false);

    /// y = (J_C/H - (1 - theta) A_j)^T z
    void explicit_part(long j, long i, const DenseMatrix& z, DenseMatrix& y);
    /// y <- (J_C/H + theta A_j)^{-T} y
    void implicit_solve(long j, long i, DenseMatrix& y);

    [[nodiscard]] long factorizations() const { return cache_.factorizations(); }

private:
    void prepare(long j, long i);

    const StampedSystem& sys_;
    const Trajectory& traj_;
    double theta_;
    FactorCache cache_;
    long key_j_ = -1;
    long key_len_ = -1;
    Values m_;
    Values n_;
};

/// lambda and mu = d lambda / d t_m at grid indices 0..index_m.
/// lambda(t_m) = 0; mu[index_m] repeats mu[index_m - 1], the terminal
/// value -lambda'(t_m^-) taken from the first backward step.
struct AdjointSolution {
    long index_m = 0;
    double t_m = 0.0;
    std::vector<Vector> lambda;
    std::vector<Vector> mu;
};

[[nodiscard]] AdjointSolution solve_adjoint(const StampedSystem& sys, const Trajectory& traj, long index_m,
                                            const Qoi& qoi, bool force_sparse = false);
/// Same, with t_m given as a time; throws InputError when t_m is off the grid.
[[nodiscard]] AdjointSolution solve_adjoint_at(const StampedSystem& sys, const Trajectory& traj, double t_m,
                                               const Qoi& qoi, bool force_sparse = false);

/// Terminal data of an adjoint solve: lambda[m-1] and mu[m-1] stacked as
/// the two columns of an n x 2 matrix.
[[nodiscard]] DenseMatrix adjoint_terminal(AdjointStepper& stepper, long index_m, const Qoi& qoi, double dt);

/// dU/dp_i(t_m) for every parameter of `sys`.
[[nodiscard]] Vector pointwise_sensitivity(const StampedSystem& sys, const Trajectory& traj,
                                           const AdjointSolution& adj);
/// Integral of dU/dp_i(t) over [t0, t_m]; equals dt times the sum of the
/// pointwise values at t_1..t_m.
[[nodiscard]] Vector interval_sensitivity(const StampedSystem& sys, const Trajectory& traj,
                                          const AdjointSolution& adj);

/// Reference route for mu: (lambda(.; t_m) - lambda(.; t_m - dt)) / dt,
/// two adjoint solves. Requires index_m >= 1. Same layout as
/// AdjointSolution::mu.
[[nodiscard]] std::vector<Vector> mu_by_time_difference(const StampedSystem& sys, const Trajectory& traj,
                                                        long index_m, const Qoi& qoi);

// --- series over many instants ----------------------------------------------

struct PararealConfig;

struct SeriesOptions {
    int workers = 1;
    bool force_sparse = false;
    /// When set, every instant is solved by its own parareal adjoint solve.
    const PararealConfig* parareal = nullptr;
};

struct SensitivitySeries {
    std::string qoi;
    std::vector<long> indices;
    std::vector<double> times;
    std::vector<Parameter> params;
    DenseMatrix values;  // instants x params
    long adjoint_solves = 0;
    std::vector<int> parareal_iterations;  // per instant, parareal runs only
};

/// Grid indices of all grid points in [t_start, t_end].
[[nodiscard]] std::vector<long> window_indices(const TimeGrid& grid, double t_start, double t_end);

/// One adjoint solve per instant. The sequential path sweeps backward once
/// and carries each instant as its own right-hand-side column, so the
/// solves share factorizations but stay independent of each other.
[[nodiscard]] SensitivitySeries sensitivity_series(const StampedSystem& sys, const Trajectory& traj, const Qoi& qoi,
                                                   const std::vector<long>& indices, const SeriesOptions& opt = {});

// --- finite-difference oracle -------------------------------------------------

struct FdSetup {
    Scheme scheme = Scheme::ImplicitEuler;
    double dt = 0.0;
    double t0 = 0.0;
};

/// (U(p(1+delta)) - U(p(1-delta))) / (2 p delta) from two full forward
/// solves (DC start) up to t_m.
[[nodiscard]] double finite_difference_oracle(const Netlist& netlist, std::string_view param, double delta,
                                              std::string_view qoi, double t_m, const FdSetup& setup);

/// Same central difference at many grid indices from one pair of solves.
[[nodiscard]] std::vector<double> finite_difference_series(const Netlist& netlist, std::string_view param,
                                                           double delta, std::string_view qoi,
                                                           const std::vector<double>& instants, const FdSetup& setup);

}  // namespace circadj
