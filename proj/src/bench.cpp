#include "circadj/bench.hpp"

#include "circadj/errors.hpp"
#include "circadj/propagators.hpp"

#include <algorithm>
#include <chrono>

namespace circadj {

double speedup(double t_serial, double t_parallel) {
    if (!(t_parallel > 0.0)) throw InputError("parallel time must be > 0");
    return t_serial / t_parallel;
}

double efficiency(double speedup, int n_subintervals) {
    if (n_subintervals < 1) throw InputError("number of subintervals must be >= 1");
    return speedup / static_cast<double>(n_subintervals);
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchReport run_bench(const StampedSystem& sys, const Trajectory& traj, long index_m, const Qoi& qoi,
                      const BenchOptions& opt) {
    if (opt.repetitions < 1) throw InputError("repetitions must be >= 1");
    if (opt.n_list.empty()) throw InputError("empty list of subinterval counts");
    for (int n : opt.n_list)
        if (n < 1 || n > index_m - 1) throw InputError("N = " + std::to_string(n) + " does not fit the adjoint interval");

    BenchReport rep;
    rep.qoi = qoi.label;
    rep.index_m = index_m;
    rep.t_m = traj.grid.time(index_m);
    rep.workers = opt.workers;
    rep.repetitions = opt.repetitions;

    using Clock = std::chrono::steady_clock;
    std::vector<double> seq;
    for (int r = 0; r <= opt.repetitions; ++r) {
        const auto t = Clock::now();
        const auto adj = solve_adjoint(sys, traj, index_m, qoi);
        const double s = std::chrono::duration<double>(Clock::now() - t).count();
        if (r > 0) seq.push_back(s);  // r == 0 is the warm-up
    }
    rep.sequential_wall_s = *std::min_element(seq.begin(), seq.end());
    rep.sequential_median_wall_s = median(seq);

    for (int n : opt.n_list) {
        PararealConfig cfg;
        cfg.n_subintervals = n;
        cfg.tol = opt.tol;
        cfg.coarse_stride = opt.coarse_stride;
        cfg.workers = opt.workers;
        const bool projected = opt.workers < n;
        std::vector<double> walls;
        BenchRecord best;
        for (int r = 0; r <= opt.repetitions; ++r) {
            const auto solved = solve_adjoint_parareal(sys, traj, index_m, qoi, cfg);
            if (r == 0) continue;
            const auto& pr = solved.report;
            BenchRecord rec;
            rec.n_subintervals = n;
            rec.iterations = pr.iterations;
            rec.converged = pr.converged;
            rec.fine_time_s = pr.mean_fine_time_s();
            rec.coarse_time_s = pr.mean_coarse_time_s();
            rec.coarse_total_s = pr.coarse_time_s;
            rec.measured_wall_s = pr.total_wall_s;
            rec.projected_wall_s = pr.projected_parallel_wall_s();
            rec.projected = projected;
            rec.total_wall_s = projected ? rec.projected_wall_s : rec.measured_wall_s;
            rec.jump_history = pr.jump_history;
            walls.push_back(rec.total_wall_s);
            if (walls.size() == 1 || rec.total_wall_s < best.total_wall_s) best = rec;
        }
        best.median_total_wall_s = median(walls);
        best.sequential_wall_s = rep.sequential_wall_s;
        best.speedup = speedup(best.sequential_wall_s, best.total_wall_s);
        best.efficiency = efficiency(best.speedup, n);
        rep.rows.push_back(std::move(best));
    }
    return rep;
}

}  // namespace circadj
