#pragma once

#include "circadj/linalg.hpp"

#include <span>
#include <vector>

namespace circadj {

/// Contiguous range of fine-grid steps [begin, end] (grid indices, begin < end).
struct Subinterval {
    long begin = 0;
    long end = 0;
    [[nodiscard]] long steps() const { return end - begin; }
    bool operator==(const Subinterval&) const = default;
};

/// N contiguous subintervals over n_steps fine steps; the first
/// n_steps % N of them get one extra step. Throws InputError if N > n_steps
/// or N < 1.
[[nodiscard]] std::vector<Subinterval> partition(long n_steps, int n_subintervals);

/// States produced inside one subinterval, in propagation order, including
/// the start state.
struct PropagationPiece {
    std::vector<Vector> states;
};

/// Black-box time propagator. evolve() must be deterministic and depend
/// only on (initial, slot); it may be called concurrently for different
/// slots, so implementations must not share mutable state.
class Propagator {
public:
    virtual ~Propagator() = default;
    /// Propagates `initial` across `slot`. When `piece` is non-null the
    /// intermediate states are stored in it.
    [[nodiscard]] virtual Vector evolve(const Vector& initial, const Subinterval& slot, PropagationPiece* piece) const = 0;
};

struct PararealConfig {
    int n_subintervals = 1;
    double tol = 1e-8;     // relative inf-norm interface jump
    int max_iter = 0;      // 0 means n_subintervals
    int coarse_stride = 100;
    int workers = 1;       // threads running the fine stage
};

struct PararealReport {
    int n_subintervals = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> jump_history;              // one entry per iteration
    double coarse_time_s = 0.0;                    // all coarse propagations
    long coarse_calls = 0;
    std::vector<double> fine_times_s;              // per subinterval, summed over iterations
    std::vector<std::vector<double>> fine_times_per_iteration;
    std::vector<double> iteration_wall_s;          // fine stage + serial correction
    double total_wall_s = 0.0;

    /// Mean time of one fine subinterval propagation.
    [[nodiscard]] double mean_fine_time_s() const;
    /// Mean time of one coarse subinterval propagation.
    [[nodiscard]] double mean_coarse_time_s() const;
    /// Wall time if every fine task of an iteration ran on its own worker:
    /// total_wall_s with each fine stage replaced by its slowest task.
    [[nodiscard]] double projected_parallel_wall_s() const;
};

struct PararealResult {
    std::vector<Vector> interfaces;          // X_0..X_N after the last update
    std::vector<PropagationPiece> pieces;    // fine pieces of the last iteration, slot order
    PararealReport report;
};

/// Max over interfaces of ||new - old||_inf / (1 + ||new||_inf).
[[nodiscard]] double jump_norm(std::span<const Vector> previous, std::span<const Vector> updated);

/// Parareal over `slots` (in propagation order). Iteration 0 is a serial
/// coarse sweep; each later iteration runs all fine propagations from the
/// current interface states, then applies
///   X_n <- F(X_n-1 old) + G(X_n-1 new) - G(X_n-1 old)
/// left to right. Stops once the jump at the interior interfaces is <= tol,
/// or at iteration N, where the interfaces equal the serial fine solution.
[[nodiscard]] PararealResult parareal_solve(const Propagator& fine, const Propagator& coarse, const Vector& x0,
                                            const std::vector<Subinterval>& slots, const PararealConfig& cfg);

}  // namespace circadj
