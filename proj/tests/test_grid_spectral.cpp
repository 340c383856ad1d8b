#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "conslab/grid.hpp"
#include "conslab/spectral.hpp"

using namespace conslab;

namespace {

PeriodicGrid grid1d(int n, double L = 1.0) {
    PeriodicGrid g;
    g.dim = 1;
    g.n = {n, 1, 1};
    g.len = {L, 1.0, 1.0};
    g.validate();
    return g;
}

PeriodicGrid grid2d(int n, double L = 1.0) {
    PeriodicGrid g;
    g.dim = 2;
    g.n = {n, n, 1};
    g.len = {L, L, 1.0};
    g.validate();
    return g;
}

PeriodicGrid grid3d(int n, double L = 1.0) {
    PeriodicGrid g;
    g.dim = 3;
    g.n = {n, n, n};
    g.len = {L, L, L};
    g.validate();
    return g;
}

}  // namespace

TEST_CASE("grid validation rejects bad shapes") {
    PeriodicGrid g;
    g.dim = 1;
    g.n = {12, 1, 1};  // not a power of two
    CHECK_THROWS(g.validate());
    g.n = {4, 1, 1};  // too small
    CHECK_THROWS(g.validate());
    g.dim = 4;
    CHECK_THROWS(g.validate());
    g.dim = 2;
    g.n = {16, 16, 16};  // unused axis must stay 1
    CHECK_THROWS(g.validate());
    g.n = {16, 16, 1};
    g.len = {1.0, -1.0, 1.0};
    CHECK_THROWS(g.validate());
    g.len = {1.0, 2.0, 1.0};
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("index and wrap agree with row-major layout") {
    PeriodicGrid g = grid3d(8);
    CHECK(g.index(0, 0, 0) == 0);
    CHECK(g.index(0, 0, 7) == 7);
    CHECK(g.index(0, 1, 0) == 8);
    CHECK(g.index(1, 0, 0) == 64);
    CHECK(g.wrap(0, -1) == 7);
    CHECK(g.wrap(0, 8) == 0);
    CHECK(g.wrap(0, -9) == 7);
    CHECK(g.total() == 512);
    CHECK(g.spacing(0) == doctest::Approx(1.0 / 8));
    CHECK(g.cell_volume() == doctest::Approx(1.0 / 512));
}

TEST_CASE("fft round trip is the identity") {
    PeriodicGrid g = grid2d(32);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField f(g);
    for (auto& x : f.v) x = dist(rng);
    auto spec = fft_forward(g, f.v);
    auto back = fft_inverse_real(g, spec);
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) err = std::max(err, std::abs(back[i] - f.v[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("spectral derivative of a sine is exact") {
    PeriodicGrid g = grid1d(64);
    ScalarField f(g);
    for (int i = 0; i < 64; ++i) f.v[i] = std::sin(2.0 * M_PI * g.coord(0, i));
    ScalarField df = spectral_derivative(f, 0);
    double err = 0.0;
    for (int i = 0; i < 64; ++i)
        err = std::max(err, std::abs(df.v[i] - 2.0 * M_PI * std::cos(2.0 * M_PI * g.coord(0, i))));
    CHECK(err < 1e-10);
}

TEST_CASE("discrete integration by parts holds to machine precision") {
    PeriodicGrid g = grid1d(128);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField f(g), h(g);
    for (auto& x : f.v) x = dist(rng);
    for (auto& x : h.v) x = dist(rng);
    ScalarField df = spectral_derivative(f, 0);
    ScalarField dh = spectral_derivative(h, 0);
    double s = 0.0;
    for (int i = 0; i < 128; ++i) s += df.v[i] * h.v[i] + f.v[i] * dh.v[i];
    s *= g.cell_volume();
    CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("curl of a gradient vanishes") {
    PeriodicGrid g = grid3d(16);
    ScalarField f(g);
    std::size_t idx = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int k = 0; k < 16; ++k, ++idx)
                f.v[idx] = std::sin(2.0 * M_PI * g.coord(0, i)) * std::cos(2.0 * M_PI * g.coord(1, j)) +
                           std::cos(2.0 * M_PI * g.coord(2, k));
    VectorField grad = gradient(f);
    VectorField c = curl(grad);
    for (int a = 0; a < 3; ++a) CHECK(l2_norm(c[a]) < 1e-11);
}

TEST_CASE("vector potential reconstructs a solenoidal field") {
    PeriodicGrid g = grid3d(16);
    VectorField u(g);
    std::size_t idx = 0;
    const double c = 2.0 * M_PI;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int k = 0; k < 16; ++k, ++idx) {
                const double x = g.coord(0, i), y = g.coord(1, j);
                u[0].v[idx] = std::sin(c * x) * std::cos(c * y);
                u[1].v[idx] = -std::cos(c * x) * std::sin(c * y);
                u[2].v[idx] = 0.0;
            }
    CHECK(l2_norm(divergence(u)) < 1e-10);
    std::array<double, 3> mean{};
    VectorField psi = vector_potential(u, &mean);
    VectorField back = curl(psi);
    for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(mean[a]) < 1e-12);
        double err = 0.0;
        for (std::size_t i = 0; i < back[a].size(); ++i)
            err = std::max(err, std::abs(back[a].v[i] - u[a].v[i]));
        CHECK(err < 1e-10);
    }
}

TEST_CASE("vector potential rejects non-solenoidal input") {
    PeriodicGrid g = grid3d(16);
    VectorField u(g);
    std::size_t idx = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int k = 0; k < 16; ++k, ++idx)
                u[0].v[idx] = std::sin(2.0 * M_PI * g.coord(0, i));  // div = 2pi cos != 0
    CHECK_THROWS(vector_potential(u));
}

TEST_CASE("leray projection kills gradients and fixes solenoidal fields") {
    PeriodicGrid g = grid3d(16);
    ScalarField f(g);
    std::size_t idx = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int k = 0; k < 16; ++k, ++idx)
                f.v[idx] = std::sin(2.0 * M_PI * g.coord(0, i)) * std::sin(2.0 * M_PI * g.coord(1, j));
    VectorField grad = gradient(f);
    VectorField pg = leray_project(grad);
    CHECK(lp_norm(pg, 2.0) < 1e-11);  // pure gradient, zero mean -> projected away

    VectorField u(g);
    idx = 0;
    const double c = 2.0 * M_PI;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int k = 0; k < 16; ++k, ++idx) {
                u[0].v[idx] = std::sin(c * g.coord(0, i)) * std::cos(c * g.coord(1, j)) + 0.7;
                u[1].v[idx] = -std::cos(c * g.coord(0, i)) * std::sin(c * g.coord(1, j));
                u[2].v[idx] = 0.25;  // constant component, mean must be preserved
            }
    VectorField pu = leray_project(u);
    CHECK(l2_norm(divergence(pu)) < 1e-10);
    double err = 0.0;
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < pu[a].size(); ++i)
            err = std::max(err, std::abs(pu[a].v[i] - u[a].v[i]));
    CHECK(err < 1e-10);  // already solenoidal (mean included): fixed point
}

TEST_CASE("norms and quadrature on simple fields") {
    PeriodicGrid g = grid1d(32, 2.0);
    ScalarField f(g, -3.0);
    CHECK(lp_norm(f, 1.0) == doctest::Approx(6.0));           // |f| * length
    CHECK(lp_norm(f, 2.0) == doctest::Approx(3.0 * std::sqrt(2.0)));
    CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) == doctest::Approx(3.0));
    CHECK(integrate(f) == doctest::Approx(-6.0));
    CHECK_THROWS(lp_norm(f, 0.5));
}

TEST_CASE("dealiasing removes exactly the high modes") {
    PeriodicGrid g = grid1d(32);
    ScalarField f(g);
    for (int i = 0; i < 32; ++i)
        f.v[i] = std::cos(2.0 * M_PI * 4 * g.coord(0, i)) +
                 std::cos(2.0 * M_PI * 14 * g.coord(0, i));
    auto spec = fft_forward(g, f.v);
    dealias_twothirds(g, spec);
    auto back = fft_inverse_real(g, spec);
    double err = 0.0;
    for (int i = 0; i < 32; ++i)
        err = std::max(err, std::abs(back[i] - std::cos(2.0 * M_PI * 4 * g.coord(0, i))));
    CHECK(err < 1e-12);  // mode 14 > 32/3 dropped, mode 4 kept
}
