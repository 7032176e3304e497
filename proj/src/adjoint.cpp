#include "circadj/adjoint.hpp"

#include "circadj/errors.hpp"
#include "circadj/parareal.hpp"
#include "circadj/propagators.hpp"
#include "circadj/worker_pool.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace circadj {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

// Adds scale * w_c^T (dJc d + dJg q) to out(row_of[c], p) for every column c.
void accumulate(const StampedSystem& sys, const DenseMatrix& w, const Vector& d, const Vector& q, double scale,
                const std::vector<long>& row_of, DenseMatrix& out) {
    const auto cols = w.cols();
    Vector contrib(cols);
    for (std::size_t p = 0; p < sys.params().size(); ++p) {
        const auto& st = sys.compact_stamp(p);
        contrib.setZero();
        for (const auto& e : st.dJc) contrib += (e.value * d[e.col]) * w.row(e.row).transpose();
        for (const auto& e : st.dJg) contrib += (e.value * q[e.col]) * w.row(e.row).transpose();
        for (Eigen::Index c = 0; c < cols; ++c)
            out(row_of[static_cast<std::size_t>(c)], static_cast<Eigen::Index>(p)) += scale * contrib[c];
    }
}

// Step k couples phi_k and phi_{k-1}: returns (phi_k - phi_{k-1}) / h and the
// theta-weighted state at which the static part is evaluated.
void step_vectors(const Trajectory& traj, long k, double theta, Vector& d, Vector& q) {
    const auto& a = traj.states[static_cast<std::size_t>(k)];
    const auto& b = traj.states[static_cast<std::size_t>(k - 1)];
    d = (a - b) / traj.grid.dt;
    q = theta * a + (1.0 - theta) * b;
}

// Sensitivity of the DC start phi_0 to p, pushed through the first step:
// h eta^T dJg phi_0 with A_0^T eta = N_0^T w.
void add_initial_term(const StampedSystem& sys, const Trajectory& traj, const DenseMatrix& w0,
                      const std::vector<long>& row_of, DenseMatrix& out) {
    const double h = traj.grid.dt;
    const double theta = implicit_weight(traj.scheme);
    const Vector& phi0 = traj.states.front();
    const Values a0 = sys.jacobian_g(phi0, traj.grid.t0);
    Values n0(a0.size());
    for (std::size_t s = 0; s < a0.size(); ++s) n0[s] = sys.jc_values()[s] / h - (1.0 - theta) * a0[s];
    DenseMatrix y;
    multiply_transpose(sys.pattern(), n0, w0, y);
    Factorization lu = [&] {
        try {
            return Factorization(sys.pattern(), a0);
        } catch (const SolverError& e) {
            throw SolverError(std::string("DC Jacobian at t0: ") + e.what(), 0);
        }
    }();
    const DenseMatrix eta = lu.solve_transpose(y);
    const Vector zero = Vector::Zero(sys.size());
    accumulate(sys, eta, zero, phi0, h, row_of, out);
}

Vector sensitivity_from_weights(const StampedSystem& sys, const Trajectory& traj, const std::vector<Vector>& w,
                                long index_m) {
    DenseMatrix out = DenseMatrix::Zero(1, static_cast<Eigen::Index>(sys.params().size()));
    if (index_m == 0) return out.row(0).transpose();
    const std::vector<long> row_of{0};
    const double theta = implicit_weight(traj.scheme);
    const double h = traj.grid.dt;
    Vector d, q;
    for (long k = 1; k <= index_m; ++k) {
        step_vectors(traj, k, theta, d, q);
        accumulate(sys, DenseMatrix(w[static_cast<std::size_t>(k - 1)]), d, q, h, row_of, out);
    }
    if (traj.dc_start) add_initial_term(sys, traj, DenseMatrix(w.front()), row_of, out);
    return out.row(0).transpose();
}

void check_index(const Trajectory& traj, long index_m) {
    if (index_m < 0 || index_m >= static_cast<long>(traj.states.size()))
        throw InputError("analyzed instant lies outside the simulated interval");
}

}  // namespace

Qoi make_qoi(const StampedSystem& sys, std::string_view expr) {
    const std::string text = trim(expr);
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')' || open == 0)
        throw InputError("QoI must look like v(node), v(a,b) or i(element): '" + text + "'");
    const char kind = static_cast<char>(std::tolower(static_cast<unsigned char>(text[0])));
    const std::string inner = text.substr(open + 1, text.size() - open - 2);
    Qoi q;
    q.weights = Vector::Zero(sys.size());
    q.label = text;
    const auto& dofs = sys.dofs();
    if (kind == 'v' && open == 1) {
        const auto comma = inner.find(',');
        const std::string a = trim(inner.substr(0, comma));
        if (const int r = dofs.node(a); r >= 0) q.weights[r] += 1.0;
        if (comma != std::string::npos) {
            const std::string b = trim(inner.substr(comma + 1));
            if (const int r = dofs.node(b); r >= 0) q.weights[r] -= 1.0;
        }
    } else if (kind == 'i' && open == 1) {
        q.weights[dofs.branch(trim(inner))] = 1.0;
    } else {
        throw InputError("QoI must look like v(node), v(a,b) or i(element): '" + text + "'");
    }
    return q;
}

AdjointStepper::AdjointStepper(const StampedSystem& sys, const Trajectory& traj, bool force_sparse)
    : sys_(sys), traj_(traj), theta_(implicit_weight(traj.scheme)), cache_(force_sparse) {}

void AdjointStepper::prepare(long j, long i) {
    const long len = j - i;
    if (len < 1 || i < 0 || j >= static_cast<long>(traj_.states.size()))
        throw InputError("adjoint step outside the trajectory");
    if (j == key_j_ && len == key_len_) return;
    const double h = static_cast<double>(len) * traj_.grid.dt;
    const Values a = sys_.jacobian_g(traj_.states[static_cast<std::size_t>(j)], traj_.grid.time(j));
    const auto& jc = sys_.jc_values();
    m_.resize(a.size());
    n_.resize(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        m_[s] = jc[s] / h + theta_ * a[s];
        n_[s] = jc[s] / h - (1.0 - theta_) * a[s];
    }
    key_j_ = j;
    key_len_ = len;
}

void AdjointStepper::explicit_part(long j, long i, const DenseMatrix& z, DenseMatrix& y) {
    prepare(j, i);
    multiply_transpose(sys_.pattern(), n_, z, y);
}

void AdjointStepper::implicit_solve(long j, long i, DenseMatrix& y) {
    prepare(j, i);
    try {
        y = cache_.factor(sys_.pattern(), m_).solve_transpose(y);
    } catch (const SolverError& e) {
        throw SolverError(std::string("adjoint: ") + e.what(), j);
    }
}

DenseMatrix adjoint_terminal(AdjointStepper& stepper, long index_m, const Qoi& qoi, double dt) {
    DenseMatrix z(qoi.weights.size(), 2);
    z.col(0) = -qoi.weights;
    z.col(1).setZero();
    stepper.implicit_solve(index_m, index_m - 1, z);
    z.col(1) = z.col(0) / dt;
    return z;
}

AdjointSolution solve_adjoint(const StampedSystem& sys, const Trajectory& traj, long index_m, const Qoi& qoi,
                              bool force_sparse) {
    check_index(traj, index_m);
    if (qoi.weights.size() != sys.size()) throw InputError("QoI dimension does not match the system");
    const auto n = sys.size();
    AdjointSolution adj;
    adj.index_m = index_m;
    adj.t_m = traj.grid.time(index_m);
    adj.lambda.assign(static_cast<std::size_t>(index_m) + 1, Vector::Zero(n));
    adj.mu.assign(static_cast<std::size_t>(index_m) + 1, Vector::Zero(n));
    if (index_m == 0) return adj;

    AdjointStepper stepper(sys, traj, force_sparse);
    DenseMatrix z = adjoint_terminal(stepper, index_m, qoi, traj.grid.dt);
    const auto m = static_cast<std::size_t>(index_m);
    adj.lambda[m - 1] = z.col(0);
    adj.mu[m - 1] = z.col(1);
    adj.mu[m] = z.col(1);
    DenseMatrix y;
    for (long k = index_m - 1; k >= 1; --k) {
        stepper.explicit_part(k, k - 1, z, y);
        y.col(0) -= qoi.weights;
        stepper.implicit_solve(k, k - 1, y);
        z = std::move(y);
        adj.lambda[static_cast<std::size_t>(k - 1)] = z.col(0);
        adj.mu[static_cast<std::size_t>(k - 1)] = z.col(1);
    }
    return adj;
}

AdjointSolution solve_adjoint_at(const StampedSystem& sys, const Trajectory& traj, double t_m, const Qoi& qoi,
                                 bool force_sparse) {
    return solve_adjoint(sys, traj, traj.grid.index_of(t_m), qoi, force_sparse);
}

Vector pointwise_sensitivity(const StampedSystem& sys, const Trajectory& traj, const AdjointSolution& adj) {
    return sensitivity_from_weights(sys, traj, adj.mu, adj.index_m);
}

Vector interval_sensitivity(const StampedSystem& sys, const Trajectory& traj, const AdjointSolution& adj) {
    return sensitivity_from_weights(sys, traj, adj.lambda, adj.index_m);
}

std::vector<Vector> mu_by_time_difference(const StampedSystem& sys, const Trajectory& traj, long index_m,
                                          const Qoi& qoi) {
    if (index_m < 1) throw InputError("the time-difference route needs t_m > t0");
    const auto late = solve_adjoint(sys, traj, index_m, qoi);
    const auto early = solve_adjoint(sys, traj, index_m - 1, qoi);
    std::vector<Vector> mu(late.lambda.size());
    for (std::size_t k = 0; k < early.lambda.size(); ++k) mu[k] = (late.lambda[k] - early.lambda[k]) / traj.grid.dt;
    mu.back() = mu[mu.size() - 2];
    return mu;
}

std::vector<long> window_indices(const TimeGrid& grid, double t_start, double t_end) {
    if (t_end < t_start) throw InputError("window end precedes its start");
    const long first = std::max(0L, static_cast<long>(std::ceil((t_start - grid.t0) / grid.dt - 1e-6)));
    const long last = std::min(grid.n_steps, static_cast<long>(std::floor((t_end - grid.t0) / grid.dt + 1e-6)));
    if (last < first) throw InputError("window contains no grid point of the simulation");
    std::vector<long> out(static_cast<std::size_t>(last - first + 1));
    std::iota(out.begin(), out.end(), first);
    return out;
}

namespace {

// One backward sweep carrying mu for every instant in `cols` (sorted by
// descending index) as separate columns. Writes rows of `out`.
void batched_sweep(const StampedSystem& sys, const Trajectory& traj, const Qoi& qoi, std::vector<long> rows,
                   const std::vector<long>& indices, bool force_sparse, DenseMatrix& out) {
    std::sort(rows.begin(), rows.end(), [&](long a, long b) {
        return indices[static_cast<std::size_t>(a)] > indices[static_cast<std::size_t>(b)];
    });
    while (!rows.empty() && indices[static_cast<std::size_t>(rows.back())] == 0) rows.pop_back();
    if (rows.empty()) return;

    const double h = traj.grid.dt;
    const double theta = implicit_weight(traj.scheme);
    const auto n = sys.size();
    AdjointStepper stepper(sys, traj, force_sparse);
    DenseMatrix w(n, 0), y;
    std::vector<long> active_rows;
    std::size_t next = 0;
    Vector d, q;
    for (long k = indices[static_cast<std::size_t>(rows.front())]; k >= 1; --k) {
        const auto active = w.cols();
        if (active > 0)
            stepper.explicit_part(k, k - 1, w, y);
        else
            y.resize(n, 0);
        while (next < rows.size() && indices[static_cast<std::size_t>(rows[next])] == k) {
            y.conservativeResize(n, y.cols() + 1);
            y.col(y.cols() - 1) = -qoi.weights / h;
            active_rows.push_back(rows[next++]);
        }
        if (y.cols() == 0) continue;
        stepper.implicit_solve(k, k - 1, y);
        w = std::move(y);
        step_vectors(traj, k, theta, d, q);
        accumulate(sys, w, d, q, h, active_rows, out);
    }
    if (traj.dc_start) add_initial_term(sys, traj, w, active_rows, out);
}

}  // namespace

SensitivitySeries sensitivity_series(const StampedSystem& sys, const Trajectory& traj, const Qoi& qoi,
                                     const std::vector<long>& indices, const SeriesOptions& opt) {
    if (indices.empty()) throw InputError("no analyzed instants");
    for (long k : indices) check_index(traj, k);
    SensitivitySeries s;
    s.qoi = qoi.label;
    s.indices = indices;
    for (long k : indices) s.times.push_back(traj.grid.time(k));
    s.params = sys.params();
    const auto m = static_cast<Eigen::Index>(indices.size());
    s.values = DenseMatrix::Zero(m, static_cast<Eigen::Index>(s.params.size()));

    if (opt.parareal) {
        for (std::size_t r = 0; r < indices.size(); ++r) {
            auto solved = solve_adjoint_parareal(sys, traj, indices[r], qoi, *opt.parareal);
            s.values.row(static_cast<Eigen::Index>(r)) = pointwise_sensitivity(sys, traj, solved.adjoint).transpose();
            s.parareal_iterations.push_back(solved.report.iterations);
            ++s.adjoint_solves;
        }
        return s;
    }

    // contiguous blocks of instants per worker; each block is its own sweep
    const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(indices.size())));
    std::vector<std::vector<long>> blocks(static_cast<std::size_t>(workers));
    for (std::size_t r = 0; r < indices.size(); ++r)
        blocks[r * static_cast<std::size_t>(workers) / indices.size()].push_back(static_cast<long>(r));
    std::vector<DenseMatrix> partial(blocks.size(), s.values);
    parallel_for(blocks.size(), workers, [&](std::size_t b) {
        batched_sweep(sys, traj, qoi, blocks[b], indices, opt.force_sparse, partial[b]);
    });
    for (const auto& p : partial) s.values += p;
    s.adjoint_solves = static_cast<long>(indices.size());
    return s;
}

namespace {

std::vector<double> qoi_trace(const Netlist& netlist, std::string_view qoi, const std::vector<double>& instants,
                              const FdSetup& setup) {
    const double t_last = *std::max_element(instants.begin(), instants.end());
    const StampedSystem sys(netlist, assign_dofs(netlist));
    const Qoi q = make_qoi(sys, qoi);
    std::vector<double> out;
    if (t_last <= setup.t0) {
        const Vector x0 = dc_operating_point(sys, setup.t0);
        for (std::size_t i = 0; i < instants.size(); ++i) out.push_back(q.weights.dot(x0));
        return out;
    }
    const auto grid = TimeGrid::make(setup.t0, t_last, setup.dt);
    const auto traj = simulate(sys, grid, setup.scheme);
    for (double t : instants) out.push_back(q.weights.dot(traj.states[static_cast<std::size_t>(grid.index_of(t))]));
    return out;
}

}  // namespace

std::vector<double> finite_difference_series(const Netlist& netlist, std::string_view param, double delta,
                                             std::string_view qoi, const std::vector<double>& instants,
                                             const FdSetup& setup) {
    if (!(delta > 0.0)) throw InputError("finite-difference step must be > 0");
    if (instants.empty()) throw InputError("no analyzed instants");
    const Parameter& p = netlist.param(param);
    const auto up = qoi_trace(with_element_value(netlist, p.element, p.nominal * (1.0 + delta)), qoi, instants, setup);
    const auto down =
        qoi_trace(with_element_value(netlist, p.element, p.nominal * (1.0 - delta)), qoi, instants, setup);
    std::vector<double> out(instants.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (up[i] - down[i]) / (2.0 * p.nominal * delta);
    return out;
}

double finite_difference_oracle(const Netlist& netlist, std::string_view param, double delta, std::string_view qoi,
                                double t_m, const FdSetup& setup) {
    return finite_difference_series(netlist, param, delta, qoi, {t_m}, setup).front();
}

}  // namespace circadj
