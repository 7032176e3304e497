#include "circadj/propagators.hpp"

#include "circadj/errors.hpp"

#include <algorithm>
#include <chrono>

namespace circadj {

namespace {

class ForwardPropagator final : public Propagator {
public:
    ForwardPropagator(const StampedSystem& sys, const TimeGrid& grid, Scheme scheme, int stride, NewtonOptions newton,
                      bool force_sparse)
        : sys_(sys), grid_(grid), scheme_(scheme), stride_(stride), newton_(newton), force_sparse_(force_sparse) {}

    Vector evolve(const Vector& initial, const Subinterval& slot, PropagationPiece* piece) const override {
        StepIntegrator stepper(sys_, scheme_, newton_, force_sparse_);
        Vector x = initial;
        if (piece) {
            piece->states.clear();
            piece->states.reserve(static_cast<std::size_t>(slot.steps() / stride_) + 2);
            piece->states.push_back(x);
        }
        for (long k = slot.begin; k < slot.end;) {
            const long next = std::min(k + stride_, slot.end);
            x = stepper.step(x, grid_.time(k), grid_.time(next), next, static_cast<double>(next - k) * grid_.dt);
            if (piece) piece->states.push_back(x);
            k = next;
        }
        return x;
    }

private:
    const StampedSystem& sys_;
    TimeGrid grid_;
    Scheme scheme_;
    long stride_;
    NewtonOptions newton_;
    bool force_sparse_;
};

class AdjointPropagator final : public Propagator {
public:
    AdjointPropagator(const StampedSystem& sys, const Trajectory& traj, long index_m, const Qoi& qoi, int stride,
                      bool force_sparse)
        : sys_(sys), traj_(traj), top_(index_m - 1), qoi_(qoi), stride_(stride), force_sparse_(force_sparse) {}

    Vector evolve(const Vector& initial, const Subinterval& slot, PropagationPiece* piece) const override {
        const auto n = sys_.size();
        AdjointStepper stepper(sys_, traj_, force_sparse_);
        DenseMatrix z(n, 2), y;
        z.col(0) = initial.head(n);
        z.col(1) = initial.tail(n);
        if (piece) {
            piece->states.clear();
            piece->states.push_back(initial);
        }
        const long j_begin = top_ - slot.begin;
        const long i_end = top_ - slot.end;
        for (long j = j_begin; j > i_end;) {
            const long i = std::max(j - stride_, i_end);
            stepper.explicit_part(j, i, z, y);
            y.col(0) -= qoi_.weights;
            stepper.implicit_solve(j, i, y);
            z = std::move(y);
            if (piece) piece->states.push_back(stack(z));
            j = i;
        }
        return stack(z);
    }

    static Vector stack(const DenseMatrix& z) {
        Vector v(2 * z.rows());
        v << z.col(0), z.col(1);
        return v;
    }

private:
    const StampedSystem& sys_;
    const Trajectory& traj_;
    long top_;
    Qoi qoi_;
    long stride_;
    bool force_sparse_;
};

void check_stride(int stride) {
    if (stride < 1) throw InputError("coarse stride must be >= 1");
}

}  // namespace

CircuitPropagators make_forward_propagators(const StampedSystem& sys, const TimeGrid& grid, Scheme scheme, int stride,
                                            NewtonOptions newton, bool force_sparse) {
    check_stride(stride);
    return {std::make_unique<ForwardPropagator>(sys, grid, scheme, 1, newton, force_sparse),
            std::make_unique<ForwardPropagator>(sys, grid, scheme, stride, newton, force_sparse)};
}

CircuitPropagators make_adjoint_propagators(const StampedSystem& sys, const Trajectory& traj, long index_m,
                                            const Qoi& qoi, int stride, bool force_sparse) {
    check_stride(stride);
    if (index_m < 1 || index_m >= static_cast<long>(traj.states.size()))
        throw InputError("analyzed instant lies outside the simulated interval");
    return {std::make_unique<AdjointPropagator>(sys, traj, index_m, qoi, 1, force_sparse),
            std::make_unique<AdjointPropagator>(sys, traj, index_m, qoi, stride, force_sparse)};
}

ForwardPararealResult simulate_parareal(const StampedSystem& sys, const TimeGrid& grid, Scheme scheme,
                                        const PararealConfig& cfg, NewtonOptions newton) {
    const auto props = make_forward_propagators(sys, grid, scheme, cfg.coarse_stride, newton);
    const Vector x0 = dc_operating_point(sys, grid.t0, newton);
    auto solved = parareal_solve(*props.fine, *props.coarse, x0, partition(grid.n_steps, cfg.n_subintervals), cfg);

    ForwardPararealResult out;
    auto& traj = out.trajectory;
    traj.grid = grid;
    traj.scheme = scheme;
    traj.dc_start = true;
    traj.states.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
    traj.states.push_back(x0);
    for (const auto& piece : solved.pieces)
        traj.states.insert(traj.states.end(), piece.states.begin() + 1, piece.states.end());
    recompute_derivatives(traj);
    out.report = std::move(solved.report);
    return out;
}

AdjointPararealResult solve_adjoint_parareal(const StampedSystem& sys, const Trajectory& traj, long index_m,
                                             const Qoi& qoi, const PararealConfig& cfg, bool force_sparse) {
    if (index_m < 1 || index_m >= static_cast<long>(traj.states.size()))
        throw InputError("analyzed instant lies outside the simulated interval");
    const auto start = std::chrono::steady_clock::now();
    const auto n = sys.size();
    AdjointPararealResult out;
    auto& adj = out.adjoint;
    adj.index_m = index_m;
    adj.t_m = traj.grid.time(index_m);
    adj.lambda.assign(static_cast<std::size_t>(index_m) + 1, Vector::Zero(n));
    adj.mu.assign(static_cast<std::size_t>(index_m) + 1, Vector::Zero(n));

    AdjointStepper stepper(sys, traj, force_sparse);
    const DenseMatrix terminal = adjoint_terminal(stepper, index_m, qoi, traj.grid.dt);
    const auto m = static_cast<std::size_t>(index_m);
    adj.lambda[m - 1] = terminal.col(0);
    adj.mu[m - 1] = terminal.col(1);
    adj.mu[m] = terminal.col(1);
    const long steps = index_m - 1;
    if (steps == 0) {
        out.report.n_subintervals = 0;
        out.report.converged = true;
        return out;
    }

    PararealConfig c = cfg;
    c.n_subintervals = static_cast<int>(std::min<long>(cfg.n_subintervals, steps));
    if (c.max_iter > 0) c.max_iter = std::min(c.max_iter, c.n_subintervals);
    const auto props = make_adjoint_propagators(sys, traj, index_m, qoi, cfg.coarse_stride, force_sparse);
    auto solved = parareal_solve(*props.fine, *props.coarse, AdjointPropagator::stack(terminal),
                                 partition(steps, c.n_subintervals), c);

    long k = index_m - 1;
    for (const auto& piece : solved.pieces)
        for (std::size_t s = 1; s < piece.states.size(); ++s) {
            --k;
            adj.lambda[static_cast<std::size_t>(k)] = piece.states[s].head(n);
            adj.mu[static_cast<std::size_t>(k)] = piece.states[s].tail(n);
        }
    out.report = std::move(solved.report);
    out.report.total_wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace circadj
