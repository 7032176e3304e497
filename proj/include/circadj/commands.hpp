#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace circadj {

/// Settings shared by the CLI subcommands. Unset optionals fall back to the
/// netlist's .tran / .sens directives.
struct CommandOptions {
    std::string netlist;  // file path or builtin:<name>[:<stages>]
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<std::string> qoi;
    std::optional<std::pair<double, double>> window;
    std::optional<double> t_m;
    std::vector<int> n_list;  // parareal subinterval counts; empty = sequential
    int workers = 1;
    double tol = 1e-8;
    int stride = 100;
    std::string scheme = "implicit_euler";
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int repetitions = 3;
    int top = 10;
};

/// Exit codes of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolver = 2;

/// Each command writes its artifacts into out_dir, progress to `log` and
/// errors to `err`, and returns one of the exit codes above.
int run_simulate(const CommandOptions& opt, std::ostream& log, std::ostream& err);
int run_sensitivity(const CommandOptions& opt, std::ostream& log, std::ostream& err);
int run_spectrum(const CommandOptions& opt, std::ostream& log, std::ostream& err);
int run_bench(const CommandOptions& opt, std::ostream& log, std::ostream& err);
/// Canonical netlist text: to out_dir/<title>.cir when an output directory
/// was given explicitly, else to `log`.
int run_export(const CommandOptions& opt, bool to_file, std::ostream& log, std::ostream& err);

/// "0.08:0.1" -> {0.08, 0.1}; accepts SI suffixes.
[[nodiscard]] std::pair<double, double> parse_window(const std::string& text);

}  // namespace circadj
