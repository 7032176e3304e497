#include "circadj/parareal.hpp"

#include "circadj/errors.hpp"
#include "circadj/worker_pool.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace circadj {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

}  // namespace

std::vector<Subinterval> partition(long n_steps, int n_subintervals) {
    if (n_subintervals < 1) throw InputError("number of subintervals must be >= 1");
    if (n_subintervals > n_steps)
        throw InputError("cannot split " + std::to_string(n_steps) + " steps into " + std::to_string(n_subintervals) +
                         " subintervals");
    std::vector<Subinterval> out;
    const long base = n_steps / n_subintervals;
    const long extra = n_steps % n_subintervals;
    long begin = 0;
    for (long i = 0; i < n_subintervals; ++i) {
        const long len = base + (i < extra ? 1 : 0);
        out.push_back({begin, begin + len});
        begin += len;
    }
    return out;
}

double jump_norm(std::span<const Vector> previous, std::span<const Vector> updated) {
    if (previous.size() != updated.size()) throw InputError("jump_norm: interface count mismatch");
    double jump = 0.0;
    for (std::size_t i = 0; i < updated.size(); ++i)
        jump = std::max(jump, inf_norm(updated[i] - previous[i]) / (1.0 + inf_norm(updated[i])));
    return jump;
}

double PararealReport::mean_fine_time_s() const {
    std::size_t count = 0;
    double sum = 0.0;
    for (const auto& it : fine_times_per_iteration) {
        sum += std::accumulate(it.begin(), it.end(), 0.0);
        count += it.size();
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

double PararealReport::mean_coarse_time_s() const {
    return coarse_calls ? coarse_time_s / static_cast<double>(coarse_calls) : 0.0;
}

double PararealReport::projected_parallel_wall_s() const {
    // the serial part stays; each fine stage costs only its slowest task
    double wall = total_wall_s;
    for (const auto& it : fine_times_per_iteration)
        if (!it.empty()) wall += *std::max_element(it.begin(), it.end()) - std::accumulate(it.begin(), it.end(), 0.0);
    return wall;
}

PararealResult parareal_solve(const Propagator& fine, const Propagator& coarse, const Vector& x0,
                              const std::vector<Subinterval>& slots, const PararealConfig& cfg) {
    const auto start = Clock::now();
    const int n = static_cast<int>(slots.size());
    if (n < 1) throw InputError("parareal needs at least one subinterval");
    const int max_iter = cfg.max_iter > 0 ? cfg.max_iter : n;

    PararealResult result;
    auto& rep = result.report;
    rep.n_subintervals = n;
    rep.fine_times_s.assign(static_cast<std::size_t>(n), 0.0);

    auto timed_coarse = [&](const Vector& x, int slot) {
        const auto t = Clock::now();
        Vector out;
        try {
            out = coarse.evolve(x, slots[static_cast<std::size_t>(slot)], nullptr);
        } catch (const SolverError& e) {
            throw SolverError(std::string("coarse propagator failed in subinterval ") + std::to_string(slot) + ": " +
                              e.what());
        }
        rep.coarse_time_s += seconds_since(t);
        ++rep.coarse_calls;
        return out;
    };

    std::vector<Vector> x(static_cast<std::size_t>(n) + 1);
    std::vector<Vector> g_old(static_cast<std::size_t>(n));
    x[0] = x0;
    for (int s = 0; s < n; ++s) {
        g_old[static_cast<std::size_t>(s)] = timed_coarse(x[static_cast<std::size_t>(s)], s);
        x[static_cast<std::size_t>(s) + 1] = g_old[static_cast<std::size_t>(s)];
    }

    std::vector<Vector> f(static_cast<std::size_t>(n));
    result.pieces.assign(static_cast<std::size_t>(n), {});
    for (int k = 1; k <= max_iter; ++k) {
        const auto iter_start = Clock::now();
        std::vector<double> times(static_cast<std::size_t>(n), 0.0);
        std::vector<PropagationPiece> pieces(static_cast<std::size_t>(n));
        parallel_for(static_cast<std::size_t>(n), cfg.workers, [&](std::size_t s) {
            const auto t = Clock::now();
            try {
                f[s] = fine.evolve(x[s], slots[s], &pieces[s]);
            } catch (const SolverError& e) {
                throw SolverError(std::string("fine propagator failed in subinterval ") + std::to_string(s) + ": " +
                                  e.what());
            }
            times[s] = seconds_since(t);
        });

        std::vector<Vector> updated(static_cast<std::size_t>(n) + 1);
        updated[0] = x0;
        for (int s = 0; s < n; ++s) {
            const auto su = static_cast<std::size_t>(s);
            Vector g_new = timed_coarse(updated[su], s);
            updated[su + 1] = f[su] + g_new - g_old[su];
            g_old[su] = std::move(g_new);
        }

        // interior interfaces X_1..X_{N-1}; X_N only ends the last slot
        const double jump = jump_norm(std::span<const Vector>(x).subspan(1, static_cast<std::size_t>(n) - 1),
                                      std::span<const Vector>(updated).subspan(1, static_cast<std::size_t>(n) - 1));
        x = std::move(updated);
        result.pieces = std::move(pieces);
        for (int s = 0; s < n; ++s) rep.fine_times_s[static_cast<std::size_t>(s)] += times[static_cast<std::size_t>(s)];
        rep.fine_times_per_iteration.push_back(std::move(times));
        rep.iteration_wall_s.push_back(seconds_since(iter_start));
        rep.jump_history.push_back(jump);
        rep.iterations = k;
        if (jump <= cfg.tol || k >= n) {
            rep.converged = true;
            break;
        }
    }
    result.interfaces = std::move(x);
    rep.total_wall_s = seconds_since(start);
    return result;
}

}  // namespace circadj
