#pragma once

#include "circadj/adjoint.hpp"
#include "circadj/parareal.hpp"
#include "circadj/transient.hpp"

#include <memory>

namespace circadj {

struct CircuitPropagators {
    std::unique_ptr<Propagator> fine;
    std::unique_ptr<Propagator> coarse;
};

/// Forward direction. Slots are grid-index ranges; the state is phi. The
/// coarse propagator takes steps of `stride` fine steps, the last one
/// shortened to end on the slot boundary.
[[nodiscard]] CircuitPropagators make_forward_propagators(const StampedSystem& sys, const TimeGrid& grid,
                                                          Scheme scheme, int stride, NewtonOptions newton = {},
                                                          bool force_sparse = false);

/// Adjoint direction for the instant index_m. Slot positions count
/// backward from index m-1 (position r is grid index m-1-r), so slots
/// run from their right edge to their left edge in time. The state is
/// [lambda; mu] stacked. The coarse step is linearized at its right end,
/// i.e. the forward trajectory sampled on the coarse grid.
[[nodiscard]] CircuitPropagators make_adjoint_propagators(const StampedSystem& sys, const Trajectory& traj,
                                                          long index_m, const Qoi& qoi, int stride,
                                                          bool force_sparse = false);

struct ForwardPararealResult {
    Trajectory trajectory;
    PararealReport report;
};

/// DC operating point, then parareal over the whole grid.
[[nodiscard]] ForwardPararealResult simulate_parareal(const StampedSystem& sys, const TimeGrid& grid, Scheme scheme,
                                                      const PararealConfig& cfg, NewtonOptions newton = {});

struct AdjointPararealResult {
    AdjointSolution adjoint;
    PararealReport report;
};

/// The first backward step (terminal data) is taken serially; parareal
/// covers the remaining index_m - 1 steps. N is reduced to that step count
/// when it is larger; the report holds the N actually used.
[[nodiscard]] AdjointPararealResult solve_adjoint_parareal(const StampedSystem& sys, const Trajectory& traj,
                                                           long index_m, const Qoi& qoi, const PararealConfig& cfg,
                                                           bool force_sparse = false);

}  // namespace circadj
