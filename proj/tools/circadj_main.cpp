// circadj: transient simulation, adjoint sensitivities and parareal benchmarks
// for netlist circuits.

#include "circadj/commands.hpp"
#include "circadj/errors.hpp"
#include "circadj/netlist.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// Numbers accept SI suffixes ("10n", "19.1u") like the netlist itself.
double si_value(const std::string& flag, const std::string& text) {
    if (const auto v = circadj::parse_si_number(text)) return *v;
    throw CLI::ValidationError(flag, "not a number: " + text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adjoint sensitivity analysis of circuits with parareal acceleration"};
    app.require_subcommand(1);

    circadj::CommandOptions opt;
    std::string dt, tend, tm, window;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("netlist", opt.netlist, "netlist file or builtin:<name>[:<ladder stages>]")->required();
        cmd->add_option("--dt", dt, "time step in s (default: .tran)");
        cmd->add_option("--tend", tend, "end time in s (default: .tran)");
        cmd->add_option("--scheme", opt.scheme, "implicit_euler or trapezoidal")->capture_default_str();
        cmd->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        cmd->add_option("--workers", opt.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "recorded in the run manifest; every computation is deterministic");
        cmd->add_option("--N", opt.n_list, "parareal subinterval count(s), comma separated")->delimiter(',');
        cmd->add_option("--tol", opt.tol, "parareal interface jump tolerance")->capture_default_str();
        cmd->add_option("--stride", opt.stride, "fine steps per coarse step")->capture_default_str()->check(
            CLI::PositiveNumber);
    };
    auto add_sens = [&](CLI::App* cmd) {
        cmd->add_option("--qoi", opt.qoi, "quantity of interest, e.g. v(out), v(a,b), i(L1) (default: .sens)");
        cmd->add_option("--window", window, "analyzed instants a:b in s (default: .sens)");
    };

    auto* simulate = app.add_subcommand("simulate", "transient simulation to trajectory.csv");
    add_common(simulate);
    auto* sens = app.add_subcommand("sens", "pointwise adjoint sensitivities to sensitivities.csv");
    add_common(sens);
    add_sens(sens);
    auto* spectrum = app.add_subcommand("spectrum", "ranking, relative shares and Welch spectra of the sensitivities");
    add_common(spectrum);
    add_sens(spectrum);
    spectrum->add_option("--top", opt.top, "number of ranked parameters")->capture_default_str();
    auto* bench = app.add_subcommand("bench", "sequential vs parareal adjoint solve timings to bench.json");
    add_common(bench);
    bench->add_option("--qoi", opt.qoi, "quantity of interest (default: .sens)");
    bench->add_option("--tm", tm, "analyzed instant in s (default: end of .sens window)");
    bench->add_option("--reps", opt.repetitions, "timed repetitions after one warm-up")->capture_default_str();
    auto* exporter = app.add_subcommand("export", "print or write the canonical netlist text");
    exporter->add_option("netlist", opt.netlist, "netlist file or builtin:<name>[:<ladder stages>]")->required();
    auto* export_out = exporter->add_option("--out", opt.out_dir, "write <title>.cir into this directory");

    try {
        app.parse(argc, argv);
        if (!dt.empty()) opt.dt = si_value("--dt", dt);
        if (!tend.empty()) opt.t_end = si_value("--tend", tend);
        if (!tm.empty()) opt.t_m = si_value("--tm", tm);
        if (!window.empty()) opt.window = circadj::parse_window(window);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : circadj::kExitInput;
    } catch (const circadj::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return circadj::kExitInput;
    }
    for (auto* cmd : app.get_subcommands())
        if (cmd->get_option_no_throw("--seed") && cmd->get_option("--seed")->count() > 0) opt.seed = seed;

    if (simulate->parsed()) return circadj::run_simulate(opt, std::cout, std::cerr);
    if (sens->parsed()) return circadj::run_sensitivity(opt, std::cout, std::cerr);
    if (spectrum->parsed()) return circadj::run_spectrum(opt, std::cout, std::cerr);
    if (bench->parsed()) return circadj::run_bench(opt, std::cout, std::cerr);
    return circadj::run_export(opt, export_out->count() > 0, std::cout, std::cerr);
}
