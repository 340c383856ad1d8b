#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "conslab/flow2d.hpp"
#include "conslab/grid.hpp"
#include "conslab/spectral.hpp"

using namespace conslab;

namespace {

PeriodicGrid grid2d(int n) {
    PeriodicGrid g;
    g.dim = 2;
    g.n = {n, n, 1};
    g.validate();
    return g;
}

ScalarField sample2d(const PeriodicGrid& g, const std::function<double(double, double)>& f) {
    ScalarField out(g);
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j, ++idx) out.v[idx] = f(g.coord(0, i), g.coord(1, j));
    return out;
}

// Taylor-Green vorticity for u = (sin(cx) cos(cy), -cos(cx) sin(cy)).
ScalarField taylor_green_omega(const PeriodicGrid& g) {
    const double c = 2.0 * M_PI;
    return sample2d(g, [c](double x, double y) { return 2.0 * c * std::sin(c * x) * std::sin(c * y); });
}

}  // namespace

TEST_CASE("transport preserves constants and total mass") {
    PeriodicGrid g = grid2d(64);
    VectorField u(g);
    const double c = 2.0 * M_PI;
    u[0] = sample2d(g, [c](double x, double y) { return std::sin(c * x) * std::cos(c * y); });
    u[1] = sample2d(g, [c](double x, double y) { return -std::cos(c * x) * std::sin(c * y); });

    ScalarField constant(g, 0.7);
    ScalarField next = transport_step(constant, u, 0.01);
    for (double v : next.v) CHECK(std::abs(v - 0.7) < 1e-13);

    ScalarField rho = sample2d(g, [c](double x, double y) {
        return 1.0 + 0.5 * std::cos(c * x) * std::cos(c * y);
    });
    const double mass0 = integrate(rho);
    for (int k = 0; k < 20; ++k) rho = transport_step(rho, u, 0.01);
    CHECK(std::abs(integrate(rho) - mass0) < 1e-12);
}

TEST_CASE("transport by a uniform velocity is a translation") {
    PeriodicGrid g = grid2d(128);
    VectorField u(g);
    for (auto& v : u[0].v) v = 1.0;
    for (auto& v : u[1].v) v = 0.5;
    const double c = 2.0 * M_PI;
    ScalarField rho0 = sample2d(g, [c](double x, double y) {
        return std::sin(c * x) + 0.4 * std::cos(c * y);
    });
    ScalarField rho = rho0;
    const double dt = 0.005, t_end = 0.25;
    const int steps = static_cast<int>(std::round(t_end / dt));
    for (int k = 0; k < steps; ++k) rho = transport_step(rho, u, dt);
    double err = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j, ++idx) {
            const double x = g.coord(0, i) - 1.0 * t_end;
            const double y = g.coord(1, j) - 0.5 * t_end;
            err = std::max(err, std::abs(rho.v[idx] - (std::sin(c * x) + 0.4 * std::cos(c * y))));
        }
    CHECK(err < 1e-6);
}

TEST_CASE("transport rejects compressible velocities") {
    PeriodicGrid g = grid2d(32);
    VectorField u(g);
    u[0] = sample2d(g, [](double x, double) { return std::sin(2.0 * M_PI * x); });
    ScalarField rho(g, 1.0);
    CHECK_THROWS(transport_step(rho, u, 0.01));
}

TEST_CASE("velocity recovery inverts the Taylor-Green vorticity") {
    PeriodicGrid g = grid2d(64);
    VectorField u = velocity_from_vorticity(taylor_green_omega(g));
    const double c = 2.0 * M_PI;
    double err = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j, ++idx) {
            const double x = g.coord(0, i), y = g.coord(1, j);
            err = std::max(err, std::abs(u[0].v[idx] - std::sin(c * x) * std::cos(c * y)));
            err = std::max(err, std::abs(u[1].v[idx] + std::cos(c * x) * std::sin(c * y)));
        }
    CHECK(err < 1e-11);
}

TEST_CASE("taylor-green is a steady state of the inviscid equations") {
    PeriodicGrid g = grid2d(64);
    FlowState2D s = make_flow_state(taylor_green_omega(g), 0.0);
    ScalarField omega0 = s.omega;
    euler2d_run(s, 0.1, 1e-3);
    double err = 0.0;
    for (std::size_t i = 0; i < omega0.size(); ++i)
        err = std::max(err, std::abs(s.omega.v[i] - omega0.v[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("viscous taylor-green decays at the exact rate") {
    PeriodicGrid g = grid2d(64);
    const double nu = 0.05, t_end = 0.5, dt = 1e-3;
    FlowState2D s = make_flow_state(taylor_green_omega(g), nu);
    ScalarField omega0 = s.omega;
    euler2d_run(s, t_end, dt);
    const double decay = std::exp(-8.0 * M_PI * M_PI * nu * t_end);
    double err = 0.0;
    for (std::size_t i = 0; i < omega0.size(); ++i)
        err = std::max(err, std::abs(s.omega.v[i] - decay * omega0.v[i]));
    CHECK(err < 1e-10);
}

TEST_CASE("inviscid energy drifts below 1e-9 per unit time") {
    PeriodicGrid g = grid2d(64);
    const double c = 2.0 * M_PI;
    // Two incommensurate modes make the flow genuinely unsteady.
    ScalarField omega = sample2d(g, [c](double x, double y) {
        return 2.0 * c * std::sin(c * x) * std::sin(c * y) + c * std::cos(2.0 * c * y) +
               0.5 * c * std::cos(c * x);
    });
    FlowState2D s = make_flow_state(omega, 0.0);
    FlowDiagnostics d = euler2d_run(s, 1.0, 1e-3, 10);
    const double e0 = d.energy.front();
    double drift = 0.0;
    for (double e : d.energy) drift = std::max(drift, std::abs(e - e0));
    CHECK(drift / e0 < 1e-9);
}

TEST_CASE("viscous runs close the energy balance") {
    PeriodicGrid g = grid2d(64);
    const double c = 2.0 * M_PI;
    ScalarField omega = sample2d(g, [c](double x, double y) {
        return 2.0 * c * std::sin(c * x) * std::sin(c * y) + c * std::cos(2.0 * c * y);
    });
    const double nu = 0.01;
    FlowState2D s = make_flow_state(omega, nu);
    FlowDiagnostics d = euler2d_run(s, 1.0, 1e-3, 1);
    CHECK(nse_energy_balance(d, nu) < 1e-6);
}

TEST_CASE("energy and enstrophy agree with closed forms on taylor-green") {
    PeriodicGrid g = grid2d(64);
    ScalarField omega = taylor_green_omega(g);
    // E = (1/2) int (sin^2 cos^2 + cos^2 sin^2) = 1/4, Z = int 4 c^2 sin^2 sin^2 = c^2.
    const double c = 2.0 * M_PI;
    CHECK(kinetic_energy(omega) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(enstrophy(omega) == doctest::Approx(c * c).epsilon(1e-12));
}
