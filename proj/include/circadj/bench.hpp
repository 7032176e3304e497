#pragma once

#include "circadj/adjoint.hpp"
#include "circadj/parareal.hpp"

#include <string>
#include <vector>

namespace circadj {

/// S_p = T_s / T_p. Throws InputError unless T_p > 0.
[[nodiscard]] double speedup(double t_serial, double t_parallel);
/// E_p = S_p / N. Throws InputError unless N >= 1.
[[nodiscard]] double efficiency(double speedup, int n_subintervals);

struct BenchRecord {
    int n_subintervals = 0;
    int iterations = 0;
    bool converged = false;
    double fine_time_s = 0.0;        // mean of one fine subinterval propagation
    double coarse_time_s = 0.0;      // mean of one coarse subinterval propagation
    double coarse_total_s = 0.0;     // all coarse propagations of the run
    double measured_wall_s = 0.0;    // wall clock on this machine
    double projected_wall_s = 0.0;   // with one worker per fine task
    /// Parallel time used for the speedup: measured when there is one
    /// worker per subinterval, projected otherwise.
    double total_wall_s = 0.0;
    bool projected = false;
    double sequential_wall_s = 0.0;
    double speedup = 0.0;
    double efficiency = 0.0;
    double median_total_wall_s = 0.0;
    std::vector<double> jump_history;
};

struct BenchOptions {
    std::vector<int> n_list{2, 4, 8};
    int workers = 1;
    int repetitions = 3;
    int coarse_stride = 100;
    double tol = 1e-8;
};

struct BenchReport {
    std::string qoi;
    double t_m = 0.0;
    long index_m = 0;
    int workers = 1;
    int repetitions = 0;
    double sequential_wall_s = 0.0;        // min over repetitions
    double sequential_median_wall_s = 0.0;
    std::vector<BenchRecord> rows;
};

/// Times the sequential adjoint solve at index_m, then a parareal adjoint
/// solve per N. One warm-up run of each configuration is discarded; the
/// headline numbers are the minimum over the repetitions.
[[nodiscard]] BenchReport run_bench(const StampedSystem& sys, const Trajectory& traj, long index_m, const Qoi& qoi,
                                    const BenchOptions& opt);

}  // namespace circadj
