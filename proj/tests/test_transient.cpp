#include "circadj/errors.hpp"
#include "circadj/transient.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace circadj;
using Catch::Approx;

namespace {

const char* kRc = "V1 in 0 DC 1\nR1 in out 1\nC1 out 0 1\n";

// consistent start with the capacitor discharged: v(in) = 1, v(out) = 0, i(V1) = -1
Vector rc_start() {
    Vector x(3);
    x << 1.0, 0.0, -1.0;
    return x;
}

double rc_max_error(double dt, Scheme scheme) {
    const auto n = parse_netlist(kRc);
    const StampedSystem sys(n, assign_dofs(n));
    const auto traj = integrate(sys, rc_start(), TimeGrid::make(0.0, 1.0, dt), scheme);
    double err = 0.0;
    for (long k = 0; k <= traj.grid.n_steps; ++k)
        err = std::max(err, std::abs(traj.states[static_cast<std::size_t>(k)][1] - (1.0 - std::exp(-traj.grid.time(k)))));
    return err;
}

}  // namespace

TEST_CASE("time grid", "[transient]") {
    const auto g = TimeGrid::make(0.0, 0.1, 1e-6);
    CHECK(g.n_steps == 100000);
    CHECK(g.time(100000) == Approx(0.1));
    CHECK(g.index_of(0.08) == 80000);
    CHECK_THROWS_AS(g.index_of(0.0800005), InputError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 1.0, 0.1), InputError);
    CHECK_THROWS_AS(TimeGrid::make(0.0, 1.0, -0.1), InputError);
    CHECK_THROWS_AS(TimeGrid::make(0.0, 1.0, 0.3), InputError);
}

TEST_CASE("scheme names", "[transient]") {
    CHECK(parse_scheme("implicit_euler") == Scheme::ImplicitEuler);
    CHECK(parse_scheme("trapezoidal") == Scheme::Trapezoidal);
    CHECK(to_string(Scheme::Trapezoidal) == "trapezoidal");
    CHECK_THROWS_AS(parse_scheme("rk4"), InputError);
}

TEST_CASE("DC operating points", "[transient]") {
    SECTION("divider") {
        const auto n = parse_netlist("V1 a 0 DC 5\nR1 a b 1k\nR2 b 0 1k\n");
        const StampedSystem sys(n, assign_dofs(n));
        const auto x = dc_operating_point(sys, 0.0);
        CHECK(x[sys.dofs().node("b")] == Approx(2.5));
        // the branch current enters the source at its positive node
        CHECK(x[sys.dofs().branch("V1")] == Approx(-2.5e-3));
    }
    SECTION("source and resistor") {
        const auto n = parse_netlist("V1 a 0 DC 5\nR1 a 0 10\n");
        const StampedSystem sys(n, assign_dofs(n));
        CHECK(dc_operating_point(sys, 0.0)[sys.dofs().branch("V1")] == Approx(-0.5));
    }
    SECTION("rectifier at zero drive") {
        const auto n = builtin_circuit("half_wave_rectifier");
        const StampedSystem sys(n, assign_dofs(n));
        CHECK(dc_operating_point(sys, 0.0).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("floating node is singular") {
        const auto n = parse_netlist("V1 a 0 DC 1\nC1 a b 1\nC2 b 0 1\n");
        const StampedSystem sys(n, assign_dofs(n));
        CHECK_THROWS_AS(dc_operating_point(sys, 0.0), SolverError);
    }
}

TEST_CASE("RC charging against the closed form", "[transient]") {
    const auto n = parse_netlist(kRc);
    const StampedSystem sys(n, assign_dofs(n));
    const auto traj = integrate(sys, rc_start(), TimeGrid::make(0.0, 1.0, 1e-4), Scheme::ImplicitEuler);
    CHECK(traj.states.back()[1] == Approx(1.0 - std::exp(-1.0)).margin(1e-3));
    CHECK(traj.states.size() == 10001);
    CHECK(traj.derivs.size() == 10001);
    CHECK_FALSE(traj.dc_start);
}

TEST_CASE("order of accuracy on RC", "[transient]") {
    for (double dt : {1e-2, 5e-3, 2e-3}) {
        const double ie = rc_max_error(dt, Scheme::ImplicitEuler) / rc_max_error(dt / 2, Scheme::ImplicitEuler);
        const double tr = rc_max_error(dt, Scheme::Trapezoidal) / rc_max_error(dt / 2, Scheme::Trapezoidal);
        CHECK(ie == Approx(2.0).margin(0.2));
        CHECK(tr == Approx(4.0).margin(0.4));
    }
    // one decade of dt
    CHECK(rc_max_error(1e-2, Scheme::ImplicitEuler) / rc_max_error(1e-3, Scheme::ImplicitEuler) ==
          Approx(10.0).margin(1.0));
}

TEST_CASE("zero source stays at zero", "[transient]") {
    const auto n = parse_netlist("V1 a 0 DC 0\nR1 a b 1\nC1 b 0 1u\nL1 b 0 1m\n");
    const StampedSystem sys(n, assign_dofs(n));
    const auto traj = simulate(sys, TimeGrid::make(0.0, 1e-3, 1e-6), Scheme::Trapezoidal);
    for (const auto& x : traj.states) CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stored steps satisfy the DAE residual", "[transient]") {
    for (const Scheme scheme : {Scheme::ImplicitEuler, Scheme::Trapezoidal}) {
        const auto n = builtin_circuit("half_wave_rectifier");
        const StampedSystem sys(n, assign_dofs(n));
        const auto traj = simulate(sys, TimeGrid::make(0.0, 0.03, 1e-5), scheme);
        CHECK(traj.dc_start);
        for (std::size_t k = 1; k < traj.states.size(); ++k) {
            const double t = traj.grid.time(static_cast<long>(k));
            const double scale = 1.0 + inf_norm(sys.source(t));
            // Newton stops on the update size, so the residual is bounded by
            // the step matrix times the last update
            CHECK(inf_norm(sys.residual(traj.states[k], traj.derivs[k], t)) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("rectifier charge and discharge over five periods", "[transient]") {
    const auto n = builtin_circuit("half_wave_rectifier");
    const StampedSystem sys(n, assign_dofs(n));
    const auto traj = simulate(sys, TimeGrid::make(0.0, 0.1, 1e-5), Scheme::ImplicitEuler);
    const int out = sys.dofs().node("out");
    std::vector<double> v;
    for (const auto& x : traj.states) v.push_back(x[out]);
    int peaks = 0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k)
        if (v[k] > v[k - 1] && v[k] >= v[k + 1]) ++peaks;
    CHECK(peaks == 5);
    // each peak sits one diode drop below the 10 V amplitude and the
    // capacitor only partly discharges in between
    const double vmax = *std::max_element(v.begin(), v.end());
    CHECK(vmax > 9.0);
    CHECK(vmax < 9.7);
    CHECK(v.back() > 0.5 * vmax);
    CHECK(*std::min_element(v.begin() + static_cast<long>(v.size() / 4), v.end()) > 0.0);
}

TEST_CASE("integration is deterministic", "[transient]") {
    const auto n = builtin_circuit("half_wave_rectifier");
    const StampedSystem sys(n, assign_dofs(n));
    const auto grid = TimeGrid::make(0.0, 0.02, 1e-5);
    const auto a = simulate(sys, grid, Scheme::Trapezoidal);
    const auto b = simulate(sys, grid, Scheme::Trapezoidal);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == b.states[k]);
}

TEST_CASE("sparse and dense solves agree", "[transient]") {
    const auto n = builtin_circuit("half_wave_rectifier");
    const StampedSystem sys(n, assign_dofs(n));
    const auto grid = TimeGrid::make(0.0, 0.01, 1e-5);
    IntegrateOptions sparse;
    sparse.force_sparse = true;
    const auto a = simulate(sys, grid, Scheme::ImplicitEuler);
    const auto b = simulate(sys, grid, Scheme::ImplicitEuler, sparse);
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK((a.states[k] - b.states[k]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("step integrator reuses factorizations on linear circuits", "[transient]") {
    const auto n = parse_netlist(kRc);
    const StampedSystem sys(n, assign_dofs(n));
    StepIntegrator stepper(sys, Scheme::ImplicitEuler);
    Vector x = rc_start();
    for (int k = 0; k < 50; ++k) x = stepper.step(x, k * 1e-3, (k + 1) * 1e-3, k + 1, 1e-3);
    CHECK(stepper.factorizations() == 1);
    CHECK(x[1] == Approx(1.0 - std::pow(1.0 / 1.001, 50)).epsilon(1e-10));
}
