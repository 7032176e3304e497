#pragma once

#include "circadj/adjoint.hpp"
#include "circadj/bench.hpp"
#include "circadj/parareal.hpp"
#include "circadj/spectral.hpp"
#include "circadj/transient.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace circadj {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip any double.
[[nodiscard]] std::string format_double(double v);

/// `t,<dof label>...`, one row per grid point.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const DofMap& dofs);
/// `t_m,<param>...`, one row per instant, preceded by `#` unit lines.
void write_series_csv(std::ostream& out, const SensitivitySeries& series);
/// `f_hz,<channel>...`
void write_spectrum_csv(std::ostream& out, const PowerSpectrum& spectrum);

[[nodiscard]] Json to_json(const PararealReport& report);
[[nodiscard]] Json to_json(const std::vector<RankedParameter>& ranking);
[[nodiscard]] Json to_json(const BenchReport& report);

/// Fixed-width table with the columns of the timing table plus speedup
/// and efficiency.
[[nodiscard]] std::string bench_table(const BenchReport& report);

}  // namespace circadj
