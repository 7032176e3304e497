#include "circadj/commands.hpp"

#include "circadj/adjoint.hpp"
#include "circadj/bench.hpp"
#include "circadj/errors.hpp"
#include "circadj/io.hpp"
#include "circadj/propagators.hpp"
#include "circadj/spectral.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>

namespace circadj {

namespace fs = std::filesystem;

namespace {

struct Loaded {
    Netlist netlist;
    StampedSystem sys;
    Scheme scheme;
    double dt;
};

Loaded load(const CommandOptions& opt) {
    Netlist n = load_netlist(opt.netlist);
    StampedSystem sys(n, assign_dofs(n));
    double dt = 0.0;
    if (opt.dt)
        dt = *opt.dt;
    else if (n.tran)
        dt = n.tran->dt;
    else
        throw InputError("no time step: pass --dt or add a .tran directive");
    return {std::move(n), std::move(sys), parse_scheme(opt.scheme), dt};
}

double end_time(const CommandOptions& opt, const Netlist& n) {
    if (opt.t_end) return *opt.t_end;
    if (n.tran) return n.tran->t_end;
    throw InputError("no end time: pass --tend or add a .tran directive");
}

std::pair<double, double> window_of(const CommandOptions& opt, const Netlist& n) {
    if (opt.window) return *opt.window;
    if (n.sens) return {n.sens->t_start, n.sens->t_end};
    throw InputError("no analysis window: pass --window or add a .sens directive");
}

std::string qoi_of(const CommandOptions& opt, const Netlist& n) {
    if (opt.qoi) return *opt.qoi;
    if (n.sens) return n.sens->qoi;
    throw InputError("no quantity of interest: pass --qoi or add a .sens directive");
}

PararealConfig parareal_config(const CommandOptions& opt, int n) {
    PararealConfig cfg;
    cfg.n_subintervals = n;
    cfg.tol = opt.tol;
    cfg.coarse_stride = opt.stride;
    cfg.workers = opt.workers;
    return cfg;
}

fs::path output_path(const CommandOptions& opt, const std::string& file) {
    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir / file;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

void write_json(const fs::path& path, const Json& j) { open_output(path) << j.dump(2) << '\n'; }

Json manifest(const std::string& command, const CommandOptions& opt, const Loaded& l) {
    Json j;
    j["command"] = command;
    j["netlist"] = opt.netlist;
    j["scheme"] = std::string(to_string(l.scheme));
    j["dt"] = l.dt;
    j["workers"] = opt.workers;
    j["seed"] = opt.seed ? Json(*opt.seed) : Json(nullptr);
    if (!opt.n_list.empty()) {
        j["n_subintervals"] = opt.n_list;
        j["coarse_stride"] = opt.stride;
        j["tol"] = opt.tol;
    }
    return j;
}

Trajectory forward(const Loaded& l, const CommandOptions& opt, double t_end, std::ostream& log) {
    const auto grid = TimeGrid::make(0.0, t_end, l.dt);
    if (opt.n_list.empty()) return simulate(l.sys, grid, l.scheme);
    auto solved = simulate_parareal(l.sys, grid, l.scheme, parareal_config(opt, opt.n_list.front()));
    log << "forward parareal: N = " << solved.report.n_subintervals << ", " << solved.report.iterations
        << " iterations, last jump " << format_double(solved.report.jump_history.back()) << '\n';
    write_json(output_path(opt, "forward_parareal.json"), to_json(solved.report));
    return std::move(solved.trajectory);
}

struct SeriesRun {
    Loaded loaded;
    Trajectory traj;
    SensitivitySeries series;
};

SeriesRun series_run(const CommandOptions& opt, const std::string& command, std::ostream& log) {
    Loaded l = load(opt);
    const auto [t_start, t_stop] = window_of(opt, l.netlist);
    const Qoi qoi = make_qoi(l.sys, qoi_of(opt, l.netlist));
    // the sequential forward solve is the reference for every adjoint
    CommandOptions fwd = opt;
    fwd.n_list.clear();
    Trajectory traj = forward(l, fwd, t_stop, log);
    const auto indices = window_indices(traj.grid, t_start, t_stop);
    SeriesOptions so;
    so.workers = opt.workers;
    PararealConfig cfg;
    if (!opt.n_list.empty()) {
        cfg = parareal_config(opt, opt.n_list.front());
        so.parareal = &cfg;
    }
    auto series = sensitivity_series(l.sys, traj, qoi, indices, so);
    log << "QoI " << qoi.label << ": " << series.params.size() << " parameters, " << indices.size()
        << " instants, adjoint solves: " << series.adjoint_solves << '\n';
    write_json(output_path(opt, "run.json"), manifest(command, opt, l));
    return {std::move(l), std::move(traj), std::move(series)};
}

int guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return kExitOk;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace

std::pair<double, double> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InputError("window must look like <start>:<end>, got '" + text + "'");
    const auto a = parse_si_number(text.substr(0, colon));
    const auto b = parse_si_number(text.substr(colon + 1));
    if (!a || !b) throw InputError("window bounds must be numbers, got '" + text + "'");
    if (*b < *a) throw InputError("window end precedes its start");
    return {*a, *b};
}

int run_simulate(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded(
        [&] {
            const Loaded l = load(opt);
            const auto traj = forward(l, opt, end_time(opt, l.netlist), log);
            const auto path = output_path(opt, "trajectory.csv");
            auto out = open_output(path);
            write_trajectory_csv(out, traj, l.sys.dofs());
            write_json(output_path(opt, "run.json"), manifest("simulate", opt, l));
            log << "wrote " << path.string() << " (" << traj.states.size() << " time points)\n";
        },
        err);
}

int run_sensitivity(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded(
        [&] {
            const auto run = series_run(opt, "sens", log);
            const auto path = output_path(opt, "sensitivities.csv");
            auto out = open_output(path);
            write_series_csv(out, run.series);
            if (!run.series.parareal_iterations.empty()) {
                Json j;
                j["n_subintervals"] = opt.n_list.front();
                j["iterations"] = run.series.parareal_iterations;
                write_json(output_path(opt, "adjoint_parareal.json"), j);
            }
            log << "wrote " << path.string() << '\n';
        },
        err);
}

int run_spectrum(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded(
        [&] {
            if (opt.top < 1) throw InputError("--top must be >= 1");
            const auto run = series_run(opt, "spectrum", log);
            const auto ranking = rank_parameters(run.series, static_cast<std::size_t>(opt.top));
            std::vector<std::size_t> top;
            for (const auto& r : ranking) top.push_back(r.param);

            auto series_out = open_output(output_path(opt, "sensitivities.csv"));
            write_series_csv(series_out, run.series);
            write_json(output_path(opt, "ranking.json"), to_json(ranking));

            const auto shares = normalize_relative(run.series, top);
            auto shares_out = open_output(output_path(opt, "shares.csv"));
            shares_out << "t_m";
            for (auto p : top) shares_out << ',' << run.series.params[p].name;
            shares_out << '\n';
            for (Eigen::Index r = 0; r < shares.fractions.rows(); ++r) {
                shares_out << format_double(run.series.times[static_cast<std::size_t>(r)]);
                for (Eigen::Index c = 0; c < shares.fractions.cols(); ++c)
                    shares_out << ',' << format_double(shares.fractions(r, c));
                shares_out << '\n';
            }

            const auto spectrum = series_spectrum(run.series, top);
            auto psd_out = open_output(output_path(opt, "spectrum.csv"));
            write_spectrum_csv(psd_out, spectrum);
            auto norm_out = open_output(output_path(opt, "spectrum_normalized.csv"));
            write_spectrum_csv(norm_out, normalize_per_bin(spectrum));
            log << "top parameter: " << ranking.front().name << "; wrote spectrum of " << top.size()
                << " parameters to " << opt.out_dir << '\n';
        },
        err);
}

int run_bench(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded(
        [&] {
            const Loaded l = load(opt);
            double t_m = 0.0;
            if (opt.t_m)
                t_m = *opt.t_m;
            else if (l.netlist.sens)
                t_m = l.netlist.sens->t_end;
            else
                throw InputError("no benchmark instant: pass --tm or add a .sens directive");
            const Qoi qoi = make_qoi(l.sys, qoi_of(opt, l.netlist));
            const auto grid = TimeGrid::make(0.0, t_m, l.dt);
            const auto traj = simulate(l.sys, grid, l.scheme);
            BenchOptions bo;
            if (!opt.n_list.empty()) bo.n_list = opt.n_list;
            bo.workers = opt.workers;
            bo.repetitions = opt.repetitions;
            bo.coarse_stride = opt.stride;
            bo.tol = opt.tol;
            for (int n : bo.n_list)
                if (opt.stride > (grid.n_steps - 1) / std::max(n, 1))
                    log << "warning: stride " << opt.stride << " exceeds the subinterval length at N = " << n
                        << "; the coarse solver takes one step per subinterval\n";
            const auto report = run_bench(l.sys, traj, grid.n_steps, qoi, bo);
            Json j = to_json(report);
            j["seed"] = opt.seed ? Json(*opt.seed) : Json(nullptr);
            write_json(output_path(opt, "bench.json"), j);
            log << bench_table(report);
        },
        err);
}

int run_export(const CommandOptions& opt, bool to_file, std::ostream& log, std::ostream& err) {
    return guarded(
        [&] {
            const Netlist n = load_netlist(opt.netlist);
            const std::string text = serialize(n);
            if (!to_file) {
                log << text;
                return;
            }
            std::string stem = n.title.empty() ? "circuit" : n.title;
            for (char& c : stem)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
            const auto path = output_path(opt, stem + ".cir");
            open_output(path) << text;
            log << "wrote " << path.string() << '\n';
        },
        err);
}

}  // namespace circadj
