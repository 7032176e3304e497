#pragma once

#include "circadj/linalg.hpp"
#include "circadj/mna.hpp"

#include <vector>

namespace circadj {

enum class Scheme { ImplicitEuler, Trapezoidal };

/// Implicit weight of the one-step theta scheme: 1 (implicit Euler), 1/2 (trapezoidal).
[[nodiscard]] constexpr double implicit_weight(Scheme s) { return s == Scheme::ImplicitEuler ? 1.0 : 0.5; }

[[nodiscard]] Scheme parse_scheme(std::string_view name);
[[nodiscard]] std::string_view to_string(Scheme s);

/// Uniform grid t_k = t0 + k*dt, k = 0..n_steps.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 0.0;
    double dt = 0.0;
    long n_steps = 0;

    /// Throws InputError unless t1 > t0, dt > 0 and (t1-t0)/dt is (close to) an integer.
    [[nodiscard]] static TimeGrid make(double t0, double t1, double dt);
    [[nodiscard]] double time(long k) const { return t0 + static_cast<double>(k) * dt; }
    /// Grid index of t; throws InputError if t is not a grid point.
    [[nodiscard]] long index_of(double t) const;
};

struct NewtonOptions {
    double tol = 1e-10;  // on ||dx||_inf / (1 + ||x||_inf)
    int max_iter = 50;
};

struct Trajectory {
    TimeGrid grid;
    Scheme scheme = Scheme::ImplicitEuler;
    /// The initial state is the DC operating point (and therefore depends on
    /// the circuit parameters); otherwise it was given and is parameter-free.
    bool dc_start = false;
    std::vector<Vector> states;  // phi(t_k), n_steps + 1 entries
    std::vector<Vector> derivs;  // phi'(t_k) from the scheme's difference formula
    long newton_iterations = 0;

    [[nodiscard]] std::size_t size() const { return states.size(); }
};

/// Solves J_G phi + i_nl(phi, t) = i_s(t) by Newton from phi = 0.
[[nodiscard]] Vector dc_operating_point(const StampedSystem& sys, double t, const NewtonOptions& opt = {});

/// One theta-method step  J_C (x - x_prev)/h + theta S(x, t) + (1 - theta) S(x_prev, t_prev) = 0
/// solved by Newton, S = static residual. Keeps a factorization cache, so one
/// instance must not be shared between threads.
class StepIntegrator {
public:
    StepIntegrator(const StampedSystem& sys, Scheme scheme, NewtonOptions opt = {}, bool force_sparse = false);

    /// `h` is the step length when given; grid callers pass a multiple of dt
    /// so the step matrix, and with it the cached factorization, stays
    /// bit-identical from step to step. Otherwise h = t_next - t_prev.
    [[nodiscard]] Vector step(const Vector& x_prev, double t_prev, double t_next, long step_index = -1,
                              double h = 0.0);
    [[nodiscard]] long newton_iterations() const { return newton_iterations_; }
    [[nodiscard]] long factorizations() const { return cache_.factorizations(); }

private:
    const StampedSystem& sys_;
    double theta_;
    NewtonOptions opt_;
    FactorCache cache_;
    Values matrix_;
    Vector current_;
    Values device_jac_;
    long newton_iterations_ = 0;
};

struct IntegrateOptions {
    NewtonOptions newton{};
    bool force_sparse = false;
    bool dc_start = false;
};

/// Integrates from x0 over the whole grid.
[[nodiscard]] Trajectory integrate(const StampedSystem& sys, const Vector& x0, const TimeGrid& grid, Scheme scheme,
                                   const IntegrateOptions& opt = {});

/// DC operating point at grid.t0 followed by integrate().
[[nodiscard]] Trajectory simulate(const StampedSystem& sys, const TimeGrid& grid, Scheme scheme,
                                  const IntegrateOptions& opt = {});

/// Rebuilds phi' from the states with the scheme's difference formula
/// (phi'_0 = 0). Used after stitching parallel pieces together.
void recompute_derivatives(Trajectory& traj);

}  // namespace circadj
