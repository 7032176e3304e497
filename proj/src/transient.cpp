#include "circadj/transient.hpp"

#include "circadj/errors.hpp"

#include <cmath>

namespace circadj {

Scheme parse_scheme(std::string_view name) {
    if (name == "implicit_euler" || name == "ie" || name == "be") return Scheme::ImplicitEuler;
    if (name == "trapezoidal" || name == "trap" || name == "tr") return Scheme::Trapezoidal;
    throw InputError("unknown integration scheme '" + std::string(name) + "'");
}

std::string_view to_string(Scheme s) { return s == Scheme::ImplicitEuler ? "implicit_euler" : "trapezoidal"; }

TimeGrid TimeGrid::make(double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw InputError("time step must be > 0");
    if (!(t1 > t0)) throw InputError("end time must exceed start time");
    const double steps = (t1 - t0) / dt;
    const long n = std::lround(steps);
    if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-6 * std::max(1.0, steps) + 1e-6)
        throw InputError("time span is not an integer multiple of dt");
    return {t0, t1, dt, n};
}

long TimeGrid::index_of(double t) const {
    const double x = (t - t0) / dt;
    const long k = std::lround(x);
    if (k < 0 || k > n_steps || std::abs(x - static_cast<double>(k)) > 1e-6)
        throw InputError("time " + std::to_string(t) + " is not on the simulation grid");
    return k;
}

Vector dc_operating_point(const StampedSystem& sys, double t, const NewtonOptions& opt) {
    const int n = sys.size();
    Vector x = Vector::Zero(n);
    const Vector is = sys.source(t);
    Vector current, g;
    Values jac;
    const int max_iter = sys.nonlinear_in_state() ? opt.max_iter : 1;
    for (int it = 0; it < max_iter; ++it) {
        sys.eval_nonlinear(x, t, current, jac);
        for (std::size_t s = 0; s < jac.size(); ++s) jac[s] += sys.jg_values()[s];
        multiply(sys.pattern(), sys.jg_values(), x, g);
        Vector r = g + current - is;
        Factorization lu = [&] {
            try {
                return Factorization(sys.pattern(), jac);
            } catch (const SolverError&) {
                throw SolverError("singular DC Jacobian (floating subcircuit?)");
            }
        }();
        Vector dx = lu.solve(-r);
        x += dx;
        if (!sys.nonlinear_in_state()) return x;
        if (inf_norm(dx) <= opt.tol * (1.0 + inf_norm(x))) return x;
    }
    throw SolverError("DC operating point: Newton did not converge in " + std::to_string(opt.max_iter) +
                      " iterations");
}

StepIntegrator::StepIntegrator(const StampedSystem& sys, Scheme scheme, NewtonOptions opt, bool force_sparse)
    : sys_(sys), theta_(implicit_weight(scheme)), opt_(opt), cache_(force_sparse) {}

Vector StepIntegrator::step(const Vector& x_prev, double t_prev, double t_next, long step_index, double h) {
    if (h <= 0.0) h = t_next - t_prev;
    const auto& jc = sys_.jc_values();
    const auto& jg = sys_.jg_values();
    const auto& pat = sys_.pattern();

    // constant part of the residual: -J_C x_prev / h + (1 - theta) S(x_prev, t_prev)
    Vector base;
    multiply(pat, jc, x_prev, base);
    base /= -h;
    if (theta_ < 1.0) base += (1.0 - theta_) * sys_.static_residual(x_prev, t_prev);
    const Vector is = sys_.source(t_next);

    Vector x = x_prev;
    Vector cx, gx;
    const int max_iter = sys_.nonlinear_in_state() ? opt_.max_iter : 1;
    matrix_.resize(jc.size());
    for (int it = 0; it < max_iter; ++it) {
        ++newton_iterations_;
        sys_.eval_nonlinear(x, t_next, current_, device_jac_);
        multiply(pat, jc, x, cx);
        multiply(pat, jg, x, gx);
        Vector r = cx / h + base + theta_ * (gx + current_ - is);
        for (std::size_t s = 0; s < matrix_.size(); ++s) matrix_[s] = jc[s] / h + theta_ * (jg[s] + device_jac_[s]);
        const Factorization* lu = nullptr;
        try {
            lu = &cache_.factor(pat, matrix_);
        } catch (const SolverError& e) {
            throw SolverError(e.what(), step_index);
        }
        Vector dx = lu->solve(-r);
        x += dx;
        if (!x.allFinite()) throw SolverError("Newton diverged", step_index);
        if (!sys_.nonlinear_in_state()) return x;
        if (inf_norm(dx) <= opt_.tol * (1.0 + inf_norm(x))) return x;
    }
    throw SolverError("Newton did not converge in " + std::to_string(opt_.max_iter) + " iterations", step_index);
}

void recompute_derivatives(Trajectory& traj) {
    const auto n = traj.states.size();
    traj.derivs.assign(n, Vector::Zero(n ? traj.states[0].size() : 0));
    const double h = traj.grid.dt;
    for (std::size_t k = 1; k < n; ++k) {
        const Vector diff = (traj.states[k] - traj.states[k - 1]) / h;
        traj.derivs[k] = traj.scheme == Scheme::ImplicitEuler ? diff : Vector(2.0 * diff - traj.derivs[k - 1]);
    }
}

Trajectory integrate(const StampedSystem& sys, const Vector& x0, const TimeGrid& grid, Scheme scheme,
                     const IntegrateOptions& opt) {
    if (x0.size() != sys.size()) throw InputError("initial state has wrong dimension");
    Trajectory traj;
    traj.grid = grid;
    traj.scheme = scheme;
    traj.dc_start = opt.dc_start;
    traj.states.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
    traj.states.push_back(x0);
    StepIntegrator stepper(sys, scheme, opt.newton, opt.force_sparse);
    for (long k = 0; k < grid.n_steps; ++k)
        traj.states.push_back(stepper.step(traj.states.back(), grid.time(k), grid.time(k + 1), k + 1, grid.dt));
    traj.newton_iterations = stepper.newton_iterations();
    recompute_derivatives(traj);
    return traj;
}

Trajectory simulate(const StampedSystem& sys, const TimeGrid& grid, Scheme scheme, const IntegrateOptions& opt) {
    IntegrateOptions o = opt;
    o.dc_start = true;
    return integrate(sys, dc_operating_point(sys, grid.t0, opt.newton), grid, scheme, o);
}

}  // namespace circadj
