#include "circadj/io.hpp"

#include <cstdio>
#include <sstream>

namespace circadj {

namespace {

std::string unit_of(ElementKind kind) {
    switch (kind) {
        case ElementKind::Resistor: return "Ohm";
        case ElementKind::Inductor: return "H";
        case ElementKind::Capacitor: return "F";
        default: return "1";
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const DofMap& dofs) {
    out << 't';
    for (const auto& label : dofs.labels) out << ',' << label;
    out << '\n';
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        out << format_double(traj.grid.time(static_cast<long>(k)));
        for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) out << ',' << format_double(traj.states[k][i]);
        out << '\n';
    }
}

void write_series_csv(std::ostream& out, const SensitivitySeries& series) {
    out << "# pointwise sensitivity dU/dp of U = " << series.qoi << " (V or A) at each instant t_m (s)\n";
    out << "# units:";
    for (const auto& p : series.params) out << ' ' << p.name << "=U/" << unit_of(p.kind);
    out << '\n';
    out << "t_m";
    for (const auto& p : series.params) out << ',' << p.name;
    out << '\n';
    for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
        out << format_double(series.times[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < series.values.cols(); ++c) out << ',' << format_double(series.values(r, c));
        out << '\n';
    }
}

void write_spectrum_csv(std::ostream& out, const PowerSpectrum& spectrum) {
    out << "f_hz";
    for (const auto& n : spectrum.names) out << ',' << n;
    out << '\n';
    for (std::size_t k = 0; k < spectrum.freqs.size(); ++k) {
        out << format_double(spectrum.freqs[k]);
        for (Eigen::Index c = 0; c < spectrum.psd.cols(); ++c)
            out << ',' << format_double(spectrum.psd(static_cast<Eigen::Index>(k), c));
        out << '\n';
    }
}

Json to_json(const PararealReport& report) {
    Json j;
    j["n_subintervals"] = report.n_subintervals;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["jump_history"] = report.jump_history;
    j["coarse_time_s"] = report.coarse_time_s;
    j["coarse_calls"] = report.coarse_calls;
    j["fine_times_s"] = report.fine_times_s;
    j["total_wall_s"] = report.total_wall_s;
    j["projected_parallel_wall_s"] = report.projected_parallel_wall_s();
    return j;
}

Json to_json(const std::vector<RankedParameter>& ranking) {
    Json j = Json::array();
    for (const auto& r : ranking) j.push_back({{"param", r.name}, {"score", r.score}});
    return j;
}

Json to_json(const BenchReport& report) {
    Json j;
    j["qoi"] = report.qoi;
    j["t_m"] = report.t_m;
    j["workers"] = report.workers;
    j["repetitions"] = report.repetitions;
    j["sequential_wall_s"] = report.sequential_wall_s;
    j["sequential_median_wall_s"] = report.sequential_median_wall_s;
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["n_subintervals"] = r.n_subintervals;
        row["iterations"] = r.iterations;
        row["converged"] = r.converged;
        row["fine_time_s"] = r.fine_time_s;
        row["coarse_time_s"] = r.coarse_time_s;
        row["coarse_total_s"] = r.coarse_total_s;
        row["total_wall_s"] = r.total_wall_s;
        row["wall_basis"] = r.projected ? "projected" : "measured";
        row["measured_wall_s"] = r.measured_wall_s;
        row["projected_wall_s"] = r.projected_wall_s;
        row["median_total_wall_s"] = r.median_total_wall_s;
        row["sequential_wall_s"] = r.sequential_wall_s;
        row["speedup"] = r.speedup;
        row["efficiency"] = r.efficiency;
        row["jump_history"] = r.jump_history;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

std::string bench_table(const BenchReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "sequential adjoint solve at t_m = %.6g s: %.4g s\n", report.t_m,
                  report.sequential_wall_s);
    out << line;
    std::snprintf(line, sizeof line, "%4s %5s %14s %14s %14s %9s %9s %10s\n", "N", "iter", "fine (s)", "coarse (s)",
                  "total (s)", "speedup", "effic.", "basis");
    out << line;
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof line, "%4d %5d %14.6g %14.6g %14.6g %9.4f %9.4f %10s\n", r.n_subintervals,
                      r.iterations, r.fine_time_s, r.coarse_time_s, r.total_wall_s, r.speedup, r.efficiency,
                      r.projected ? "projected" : "measured");
        out << line;
    }
    return out.str();
}

}  // namespace circadj
