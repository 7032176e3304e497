// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "circadj/adjoint.hpp"
#include "circadj/bench.hpp"
#include "circadj/commands.hpp"
#include "circadj/errors.hpp"
#include "circadj/propagators.hpp"
#include "circadj/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace circadj;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Circuit {
    Netlist netlist;
    StampedSystem sys;
    Qoi qoi;
};

Circuit load(const Netlist& n, const std::string& qoi) {
    StampedSystem sys(n, assign_dofs(n));
    Qoi q = make_qoi(sys, qoi);
    return {n, std::move(sys), std::move(q)};
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// 1. Adjoint sensitivities against central finite differences on the rectifier.
Outcome adjoint_vs_fd() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto c = load(builtin_circuit("half_wave_rectifier"), "v(out)");
    const double dt = c.netlist.tran->dt;
    const auto traj = simulate(c.sys, TimeGrid::make(0.0, c.netlist.tran->t_end, dt), Scheme::ImplicitEuler);
    std::vector<double> instants;
    std::vector<long> indices;
    for (int i = 1; i <= 10; ++i) {
        instants.push_back(0.01 * i - 0.0013 * (i % 3));
        indices.push_back(traj.grid.index_of(instants.back()));
    }
    const auto series = sensitivity_series(c.sys, traj, c.qoi, indices);
    const FdSetup setup{Scheme::ImplicitEuler, dt, 0.0};
    double worst = 0.0;
    for (const auto& p : c.netlist.params) {
        const auto fd = finite_difference_series(c.netlist, p.name, 1e-5, "v(out)", instants, setup);
        for (std::size_t i = 0; i < instants.size(); ++i) {
            const double adj = series.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p.id));
            const double rel = std::abs(adj - fd[i]) / std::max(std::abs(fd[i]), 1e-12);
            worst = std::max(worst, rel);
        }
    }
    const double secs = seconds_since(start);
    o.require(worst <= 1e-2, "relative error " + fmt("%.3g", worst) + " > 1e-2");
    o.require(secs <= 60.0, "runtime " + fmt("%.1f", secs) + " s > 60 s");
    o.note(std::to_string(c.netlist.params.size()) + " params x 10 instants, worst rel. error " + fmt("%.2e", worst) +
           ", " + fmt("%.1f", secs) + " s");
    return o;
}

// 2. RC step response: dv/dR(1) = -t/(R^2 C) exp(-t/RC) = -exp(-1) and dv/dC = dv/dR at R = C = 1.
Outcome rc_closed_form() {
    Outcome o;
    const double dt = 1e-4;
    const auto c = load(parse_netlist("V1 in 0 PWM(0 1 100 0.5)\nR1 in out 1\nC1 out 0 1\n"), "v(out)");
    // the step arrives at t = 0; the grid starts one step earlier from the all-zero DC state
    const auto traj = simulate(c.sys, TimeGrid::make(-dt, 1.0, dt), Scheme::ImplicitEuler);
    const auto s = pointwise_sensitivity(c.sys, traj, solve_adjoint_at(c.sys, traj, 1.0, c.qoi));
    const double dr = s[static_cast<Eigen::Index>(c.netlist.param("R1").id)];
    const double dc = s[static_cast<Eigen::Index>(c.netlist.param("C1").id)];
    const double exact = -std::exp(-1.0);
    o.require(std::abs(dr - exact) <= 1e-3, "dv/dR(1) = " + fmt("%.6f", dr));
    const double sym = std::abs(dc - dr) / std::abs(dr);
    o.require(sym <= 1e-9, "dv/dC vs dv/dR relative gap " + fmt("%.2e", sym));
    o.note("dv/dR(1) = " + fmt("%.6f", dr) + " (closed form " + fmt("%.6f", exact) + "), |dv/dC - dv/dR|/|dv/dR| = " +
           fmt("%.1e", sym));
    return o;
}

// Scalar decay x' = -x on [0, 1], N = 2: exact fine flow, one implicit Euler coarse step per slot.
class Decay final : public Propagator {
public:
    Decay(double dt, bool exact) : dt_(dt), exact_(exact) {}
    Vector evolve(const Vector& x, const Subinterval& slot, PropagationPiece* piece) const override {
        const double h = dt_ * static_cast<double>(slot.steps());
        Vector out = exact_ ? Vector(x * std::exp(-h)) : Vector(x / (1.0 + h));
        if (piece) piece->states = {x, out};
        return out;
    }

private:
    double dt_;
    bool exact_;
};

void parareal_fixture(Outcome& o, const std::string& name, const Circuit& c, double t_end, double t_m) {
    const double dt = c.netlist.tran->dt;
    const auto grid = TimeGrid::make(0.0, t_end, dt);
    const auto seq = simulate(c.sys, grid, Scheme::ImplicitEuler);
    const long m = grid.index_of(t_m);
    const auto adj = solve_adjoint(c.sys, seq, m, c.qoi);
    std::string iters = name + " iterations fwd/adj:";
    for (int n : {2, 4, 8}) {
        PararealConfig cfg;
        cfg.n_subintervals = n;
        cfg.coarse_stride = 100;
        const double tol = cfg.tol;
        const auto fwd = simulate_parareal(c.sys, grid, Scheme::ImplicitEuler, cfg);
        double fwd_err = 0.0;
        for (std::size_t k = 0; k < seq.states.size(); ++k)
            fwd_err = std::max(fwd_err, inf_norm(fwd.trajectory.states[k] - seq.states[k]) / (1.0 + inf_norm(seq.states[k])));
        const auto par = solve_adjoint_parareal(c.sys, seq, m, c.qoi, cfg);
        double adj_err = 0.0;
        for (std::size_t k = 0; k < adj.lambda.size(); ++k) {
            adj_err = std::max(adj_err, inf_norm(par.adjoint.lambda[k] - adj.lambda[k]) / (1.0 + inf_norm(adj.lambda[k])));
            adj_err = std::max(adj_err, inf_norm(par.adjoint.mu[k] - adj.mu[k]) / (1.0 + inf_norm(adj.mu[k])));
        }
        const std::string tag = name + " N=" + std::to_string(n);
        o.require(fwd_err <= 10 * tol, tag + " forward error " + fmt("%.2e", fwd_err));
        o.require(adj_err <= 10 * tol, tag + " adjoint error " + fmt("%.2e", adj_err));
        o.require(fwd.report.converged && fwd.report.iterations <= n, tag + " forward needs > N iterations");
        o.require(par.report.converged && par.report.iterations <= n, tag + " adjoint needs > N iterations");
        o.require(fwd.report.iterations <= 3, tag + " forward took " + std::to_string(fwd.report.iterations) +
                                                  " iterations (> 3)");
        o.require(par.report.iterations <= 3, tag + " adjoint took " + std::to_string(par.report.iterations) +
                                                  " iterations (> 3)");
        iters += " " + std::to_string(n) + ":" + std::to_string(fwd.report.iterations) + "/" +
                 std::to_string(par.report.iterations);
    }
    o.note(iters);
}

// 3. Parareal exactness and convergence.
Outcome parareal_convergence() {
    Outcome o;
    const Decay fine(0.5, true), coarse(0.5, false);
    PararealConfig cfg;
    cfg.tol = 0.0;
    cfg.max_iter = 1;
    const auto one = parareal_solve(fine, coarse, Vector::Ones(1), partition(2, 2), cfg);
    cfg.max_iter = 2;
    const auto two = parareal_solve(fine, coarse, Vector::Ones(1), partition(2, 2), cfg);
    const double x1 = one.interfaces[1][0], x2 = one.interfaces[2][0], x2b = two.interfaces[2][0];
    o.require(std::abs(x1 - 0.60653) <= 1e-5 && std::abs(x2 - 0.36427) <= 1e-5 && std::abs(x2b - 0.36788) <= 1e-5,
              "scalar example gave " + fmt("%.5f", x1) + ", " + fmt("%.5f", x2) + ", " + fmt("%.5f", x2b));
    o.note("scalar example X1=" + fmt("%.5f", x1) + " X2=" + fmt("%.5f", x2) + " then " + fmt("%.5f", x2b));

    const auto rect = load(builtin_circuit("half_wave_rectifier"), "v(out)");
    parareal_fixture(o, "rectifier", rect, 0.1, 0.1);
    const auto b6 = load(builtin_circuit("b6_bridge_reduced"), "v(uh_d,u)");
    parareal_fixture(o, "b6", b6, b6.netlist.tran->t_end, 19.1e-6);
    return o;
}

// 4. Table 1 arithmetic.
Outcome table_arithmetic() {
    Outcome o;
    const double s48 = speedup(51.08, 2.16);
    const double e48 = efficiency(s48, 48);
    o.require(std::abs(s48 - 23.648) <= 5e-4, "S(48) = " + fmt("%.4f", s48));
    o.require(std::abs(e48 - 0.4927) <= 5e-5, "E(48) = " + fmt("%.4f", e48));
    const std::pair<int, double> rows[] = {{2, 50.62}, {4, 25.34}, {8, 12.62}, {12, 8.40}, {24, 4.18}, {48, 2.16}};
    std::string column;
    for (const auto& [n, wall] : rows) {
        const double e = efficiency(speedup(51.08, wall), n);
        o.require(std::abs(e - 0.5) <= 0.02, "E(" + std::to_string(n) + ") = " + fmt("%.4f", e));
        column += " " + fmt("%.4f", e);
    }
    o.note("S(48)=" + fmt("%.3f", s48) + " E(48)=" + fmt("%.4f", e48) + ", efficiency column" + column);
    return o;
}

// 5. Per-subinterval fine time halves per doubling of N; coarse cost is small.
Outcome scaling() {
    Outcome o;
    const auto c = load(builtin_circuit("half_wave_rectifier"), "v(out)");
    const auto grid = TimeGrid::make(0.0, 0.1, 1e-6);
    const auto traj = simulate(c.sys, grid, Scheme::ImplicitEuler);
    BenchOptions opt;
    opt.n_list = {2, 4, 8};
    opt.repetitions = 3;
    const auto rep = run_bench(c.sys, traj, grid.n_steps, c.qoi, opt);
    std::string info;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        const double share = r.coarse_time_s / r.fine_time_s;
        o.require(share <= 0.05, "N=" + std::to_string(r.n_subintervals) + " coarse/fine " + fmt("%.3f", share));
        info += " N=" + std::to_string(r.n_subintervals) + ": fine " + fmt("%.4f", r.fine_time_s) + " s, coarse " +
                fmt("%.2f%%", 100 * share) + ";";
        if (i > 0) {
            const double ratio = rep.rows[i - 1].fine_time_s / r.fine_time_s;
            o.require(std::abs(ratio - 2.0) <= 0.6, "fine time ratio " + fmt("%.2f", ratio));
            info += " halving ratio " + fmt("%.2f", ratio) + ";";
        }
    }
    o.note("per subinterval," + info);
    return o;
}

// 6. B6: the C_DS_uh sensitivity row against the QoI, and the stack property.
Outcome b6_reproduction() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto c = load(builtin_circuit("b6_bridge_reduced"), "v(uh_d,u)");
    const auto grid = TimeGrid::make(0.0, c.netlist.sens->t_end, c.netlist.tran->dt);
    const auto traj = simulate(c.sys, grid, Scheme::ImplicitEuler);
    const auto indices = window_indices(grid, c.netlist.sens->t_start, c.netlist.sens->t_end);
    const auto series = sensitivity_series(c.sys, traj, c.qoi, indices);

    const auto col = static_cast<Eigen::Index>(c.netlist.param("C_DS_uh").id);
    std::vector<double> s, q, dq;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        s.push_back(series.values(static_cast<Eigen::Index>(i), col));
        q.push_back(c.qoi.weights.dot(traj.states[static_cast<std::size_t>(indices[i])]));
        dq.push_back(c.qoi.weights.dot(traj.derivs[static_cast<std::size_t>(indices[i])]));
    }
    const double rho = pearson(s, q);
    o.require(std::abs(rho) >= 0.5, "|rho(dU/dC_DS_uh, U)| = " + fmt("%.3f", std::abs(rho)) + " < 0.5");

    const auto ranking = rank_parameters(series, 10);
    std::vector<std::size_t> top;
    for (const auto& r : ranking) top.push_back(r.param);
    const auto shares = normalize_relative(series, top);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < shares.fractions.rows(); ++r)
        worst = std::max(worst, std::abs(shares.fractions.row(r).sum() - 1.0));
    o.require(worst <= 1e-12, "stack column sum off by " + fmt("%.2e", worst));
    o.note(std::to_string(indices.size()) + " instants, rho = " + fmt("%.3f", rho) +
           " (vs dU/dt: " + fmt("%.3f", pearson(s, dq)) + "), top-3 " + ranking[0].name + ", " + ranking[1].name +
           ", " + ranking[2].name + ", max |sum - 1| = " + fmt("%.1e", worst) + ", " +
           fmt("%.1f", seconds_since(start)) + " s");
    return o;
}

// 7. Welch estimator properties.
Outcome welch_properties() {
    Outcome o;
    const double dt = 1e-3;
    const double f0 = 40.0 / (256 * dt);
    std::vector<double> x(8192);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = 1.5 * std::sin(2.0 * std::numbers::pi * f0 * static_cast<double>(i) * dt + 0.2);
    const auto s = welch_psd(x, dt);
    const auto peak = static_cast<std::size_t>(std::max_element(s.psd.begin(), s.psd.end()) - s.psd.begin());
    o.require(std::abs(s.freqs[peak] - f0) < 1e-9, "peak at " + fmt("%.3f", s.freqs[peak]) + " Hz");
    double power = 0.0, mean = 0.0, var = 0.0;
    for (double p : s.psd) power += p;
    power *= s.freqs[1] - s.freqs[0];
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    o.require(std::abs(power / var - 1.0) <= 0.05, "Parseval ratio " + fmt("%.4f", power / var));
    const double lowest = *std::min_element(s.psd.begin(), s.psd.end());
    o.require(lowest >= 0.0, "negative density " + fmt("%.3g", lowest));
    o.note("peak " + fmt("%.3f", s.freqs[peak]) + " Hz (expected " + fmt("%.3f", f0) + "), Parseval ratio " +
           fmt("%.4f", power / var) + ", min psd " + fmt("%.2e", lowest));
    return o;
}

// 8. One adjoint solve per analyzed instant, as logged by the sens command.
Outcome solve_count() {
    Outcome o;
    CommandOptions opt;
    opt.netlist = "builtin:half_wave_rectifier";
    opt.dt = 1e-5;
    opt.window = std::pair{0.09, 0.1};
    opt.out_dir = (std::filesystem::temp_directory_path() / "circadj_acceptance").string();
    std::ostringstream log, err;
    const int code = run_sensitivity(opt, log, err);
    o.require(code == 0, "sens exited with " + std::to_string(code) + ": " + err.str());
    const long expected = 1001;
    const std::string key = "adjoint solves: ";
    const auto at = log.str().find(key);
    const long logged = at == std::string::npos ? -1 : std::stol(log.str().substr(at + key.size()));
    o.require(logged == expected, "logged " + std::to_string(logged) + " solves for " + std::to_string(expected) +
                                      " instants");
    o.note(std::to_string(expected) + " instants, logged " + std::to_string(logged) + " adjoint solves");
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"1 adjoint vs finite differences (rectifier)", adjoint_vs_fd},
        {"2 RC closed form", rc_closed_form},
        {"3 parareal exactness and convergence", parareal_convergence},
        {"4 Table 1 arithmetic", table_arithmetic},
        {"5 fine-time scaling and coarse share", scaling},
        {"6 B6 sensitivity shape and stack", b6_reproduction},
        {"7 Welch spectral properties", welch_properties},
        {"8 one adjoint solve per instant", solve_count},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (8 - failed) << "/8 criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
