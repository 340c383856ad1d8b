// Acceptance checks for the conservation laboratory: eleven standalone
// criteria, each printing one PASS/FAIL line. Run a single criterion with
// --criterion N (as the ctest entries do) or all of them with no arguments.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "conslab/balance.hpp"
#include "conslab/battery.hpp"
#include "conslab/burgers.hpp"
#include "conslab/commutators.hpp"
#include "conslab/convexint.hpp"
#include "conslab/flow2d.hpp"
#include "conslab/generators.hpp"
#include "conslab/grid.hpp"
#include "conslab/mollify.hpp"
#include "conslab/regularity.hpp"
#include "conslab/scaling.hpp"
#include "conslab/spectral.hpp"

using namespace conslab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return std::string(buf);
}

PeriodicGrid make_grid(int dim, int n) {
    PeriodicGrid g;
    g.dim = dim;
    g.n = {n, dim > 1 ? n : 1, dim > 2 ? n : 1};
    g.validate();
    return g;
}

double ramp_datum(double x) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return 1.0 - x;
}

BurgersState acceptance_burgers_state(int cells) {
    return make_burgers_state(-0.05, 1.65, cells, ramp_datum, BurgersBoundary::FarField, 0.9);
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion1() {
    BurgersState s = acceptance_burgers_state(4096);
    BurgersTrajectory traj = burgers_run(s, 2.0);

    EntropyBalance post = burgers_entropy_balance(traj, 1.2, 2.0);
    EntropyBalance pre = burgers_entropy_balance(traj, 0.0, 0.8);

    const double exact = 1.0 / 12.0;
    const bool post_ok = std::abs(post.dissipation - exact) <= 0.02 * exact;
    const bool pre_ok = std::abs(pre.dissipation) < 1e-4;
    return {post_ok && pre_ok,
            fmt("dissipation over [1.2,2] = %.6f (exact 1/12 = %.6f, rel err %.3e); "
                "pre-shock rate %.3e",
                post.dissipation, exact, std::abs(post.dissipation - exact) / exact,
                pre.dissipation)};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion2() {
    BurgersState s = acceptance_burgers_state(4096);
    BurgersTrajectory traj = burgers_run(s, 0.5);
    const BurgersState& f = traj.final_state;
    double err = 0.0;
    for (int i = 0; i < f.cells; ++i)
        err += std::abs(f.u[i] - burgers_exact_ramp(f.cell_center(i), f.time)) * f.dx;
    return {err < 2e-3, fmt("L1 distance to the closed-form ramp at t=0.5: %.3e (< 2e-3)", err)};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion3() {
    // Compressible direction: R_eps -> rho div u.
    PeriodicGrid g1 = make_grid(1, 2048);
    ScalarField rho(g1);
    VectorField u(g1);
    ScalarField target(g1);
    for (int i = 0; i < g1.n[0]; ++i) {
        const double x = g1.coord(0, i);
        rho.v[i] = 1.0 + 0.5 * std::sin(2.0 * M_PI * x + 0.7);
        u[0].v[i] = std::sin(2.0 * M_PI * x);
        target.v[i] = rho.v[i] * 2.0 * M_PI * std::cos(2.0 * M_PI * x);
    }
    CommutatorResult r = dl_commutator(rho, u, build_kernel(g1, 1.0 / 256));
    ScalarField diff(g1);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.v[i] = r.field.v[i] - target.v[i];
    const double err = lp_norm(diff, 1.0);
    const bool limit_ok = err < 1e-2;

    // Solenoidal direction: the L1 ladder decreases strictly.
    PeriodicGrid g2 = make_grid(2, 256);
    ScalarField rho2(g2);
    VectorField u2(g2);
    std::size_t idx = 0;
    for (int i = 0; i < g2.n[0]; ++i)
        for (int j = 0; j < g2.n[1]; ++j, ++idx) {
            const double x = g2.coord(0, i), y = g2.coord(1, j);
            rho2.v[idx] = std::cos(2.0 * M_PI * x) + 0.4 * std::sin(4.0 * M_PI * y);
            u2[0].v[idx] = std::sin(2.0 * M_PI * y);
        }
    bool decreasing = true;
    double prev = 1e300;
    std::string ladder;
    for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        CommutatorResult cr = dl_commutator(rho2, u2, build_kernel(g2, eps));
        decreasing = decreasing && cr.l1 < prev;
        prev = cr.l1;
        ladder += fmt(" %.2e", cr.l1);
    }
    return {limit_ok && decreasing,
            fmt("||R_eps - rho div u||_1 = %.3e at eps=1/256 (< 1e-2); solenoidal ladder%s %s",
                err, ladder.c_str(), decreasing ? "strictly decreasing" : "NOT decreasing")};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
    PeriodicGrid g = make_grid(1, 4096);
    FieldSpec rspec;
    rspec.kind = FieldKind::Weierstrass;
    rspec.alpha = 0.45;
    rspec.octaves = 10;
    rspec.phase_mode = PhaseMode::Locked;
    ScalarField rho = sample_scalar(rspec, g);
    FieldSpec uspec = rspec;
    uspec.phase_offset = M_PI / 2.0;
    VectorField u(g);
    u[0] = sample_scalar(uspec, g);

    EntropyFunction eta{[](double s) { return 0.5 * s * s; }, [](double s) { return s; },
                        "s^2/2"};
    ScalarField phi(g, 1.0);

    std::vector<double> eps, vals;
    for (int k = 4; k <= 9; ++k) {
        const double e = std::pow(2.0, -k);
        eps.push_back(e);
        vals.push_back(std::abs(renormalisation_defect(rho, u, eta, build_kernel(g, e), phi)));
    }
    ScalingReport rep = fit_scaling(eps, vals, 0.35);
    const bool ok = std::abs(rep.fitted_exponent - 0.35) <= 0.2 && rep.fit_quality >= 0.9;
    return {ok, fmt("defect exponent %.4f (prediction 2a+b-1 = 0.35, tolerance 0.2), "
                    "fit quality %.4f (>= 0.9)",
                    rep.fitted_exponent, rep.fit_quality)};
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion5() {
    PeriodicGrid g = make_grid(2, 1024);
    const double alpha = 0.4;
    const int dirs[3][2] = {{1, 0}, {0, 2}, {1, 2}};
    ScalarField psi(g);
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j, ++idx) {
            const double x = g.coord(0, i), y = g.coord(1, j);
            double acc = 0.0;
            for (int k = 1; k <= 7; ++k) {
                const double lam = std::pow(2.0, k);
                const double amp = std::pow(lam, -(1.0 + alpha));
                for (const auto& d : dirs) {
                    const double dn = std::sqrt(double(d[0] * d[0] + d[1] * d[1]));
                    acc += amp * std::cos(2.0 * M_PI * lam * (d[0] * x + d[1] * y)) /
                           std::pow(dn, 1.0 + alpha);
                }
            }
            psi.v[idx] = acc;
        }
    VectorField grad_psi = gradient(psi);
    VectorField u(g);
    u[0] = grad_psi[1];
    for (std::size_t q = 0; q < g.total(); ++q) u[1].v[q] = -grad_psi[0].v[q];

    ScalarField phi = radial_bump(g, {0.5, 0.5, 0.0}, 0.45);
    ScalarField p(g);

    std::vector<double> eps, vals;
    bool decreasing = true;
    double prev = 1e300;
    for (int k = 3; k <= 8; ++k) {
        const double e = std::pow(2.0, -k);
        const double v = std::abs(euler_defect(u, p, build_kernel(g, e), phi));
        eps.push_back(e);
        vals.push_back(v);
        decreasing = decreasing && v < prev;
        prev = v;
    }
    ScalingReport rep = fit_scaling(eps, vals, 3.0 * alpha - 1.0);
    const bool ok = decreasing && std::abs(rep.fitted_exponent - 0.2) <= 0.2;
    return {ok, fmt("defect ladder %s, exponent %.4f (prediction 3a-1 = 0.2, tolerance 0.2, "
                    "fit quality %.4f)",
                    decreasing ? "decreasing" : "NOT decreasing", rep.fitted_exponent,
                    rep.fit_quality)};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion6() {
    PeriodicGrid g = make_grid(2, 64);
    MollifierKernel kernel = build_kernel(g, 1.0 / 8);
    auto p = [](double r) { return std::pow(r, 5.0 / 3.0); };

    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_gap = -1e300, worst_margin = 1e300;
    for (int field = 0; field < 200; ++field) {
        ScalarField rho(g);
        // Four random low modes with total amplitude <= 0.8 on a base of 1.15:
        // the field stays inside [0.35, 1.95], safely vacuum-free.
        double amps[4], phase[4];
        int kx[4], ky[4];
        double total = 0.0;
        for (int m = 0; m < 4; ++m) {
            amps[m] = 0.1 + unif(rng);
            total += amps[m];
            phase[m] = 2.0 * M_PI * unif(rng);
            kx[m] = 1 + int(unif(rng) * 6.0);
            ky[m] = int(unif(rng) * 6.0);
        }
        const double budget = 0.8 * (0.5 + 0.5 * unif(rng));
        for (int m = 0; m < 4; ++m) amps[m] *= budget / total;
        std::size_t idx = 0;
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j, ++idx) {
                const double x = g.coord(0, i), y = g.coord(1, j);
                double v = 1.15;
                for (int m = 0; m < 4; ++m)
                    v += amps[m] * std::cos(2.0 * M_PI * (kx[m] * x + ky[m] * y) + phase[m]);
                rho.v[idx] = v;
            }

        ScalarField gap = taylor_gap(p, rho, kernel);
        ScalarField rho_eps = mollify(rho, kernel);
        ScalarField rho_sq(g);
        for (std::size_t q = 0; q < g.total(); ++q) rho_sq.v[q] = rho.v[q] * rho.v[q];
        ScalarField rho_sq_eps = mollify(rho_sq, kernel);

        double rmin = 1e300;
        for (double v : rho.v) rmin = std::min(rmin, v);
        for (double v : rho_eps.v) rmin = std::min(rmin, v);
        const double pdd = (5.0 / 3.0) * (2.0 / 3.0) * std::pow(rmin, -1.0 / 3.0);

        for (std::size_t q = 0; q < g.total(); ++q) {
            worst_gap = std::max(worst_gap, gap.v[q]);
            const double inc = rho_eps.v[q] - rho.v[q];
            const double avg_sq =
                rho_sq_eps.v[q] - 2.0 * rho.v[q] * rho_eps.v[q] + rho.v[q] * rho.v[q];
            const double bound = pdd * (inc * inc + avg_sq) + 1e-8;
            worst_margin = std::min(worst_margin, bound - std::abs(gap.v[q]));
        }
    }
    const bool ok = worst_gap <= 1e-12 && worst_margin >= 0.0;
    return {ok, fmt("200 fields: max gap %.3e (<= 0, tolerance 1e-12); quadratic-bound margin "
                    "min %.3e (>= 0)",
                    worst_gap, worst_margin)};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
    PeriodicGrid g = make_grid(2, 256);
    const double c = 2.0 * M_PI;
    ScalarField omega0(g);
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j, ++idx)
            omega0.v[idx] = 2.0 * c * std::sin(c * g.coord(0, i)) * std::sin(c * g.coord(1, j));

    FlowState2D inviscid = make_flow_state(omega0, 0.0);
    FlowDiagnostics di = euler2d_run(inviscid, 1.0, 1e-3, 10);
    const double e0 = di.energy.front();
    double drift = 0.0;
    for (double e : di.energy) drift = std::max(drift, std::abs(e - e0));
    const double rel_drift = drift / e0;

    const double nu = 0.01;
    FlowState2D viscous = make_flow_state(omega0, nu);
    FlowDiagnostics dv = euler2d_run(viscous, 1.0, 1e-3, 1);
    const double residual = nse_energy_balance(dv, nu);

    const double decay = std::exp(-8.0 * M_PI * M_PI * nu * 1.0);
    double sup_err = 0.0, sup_ref = 0.0;
    for (std::size_t q = 0; q < g.total(); ++q) {
        sup_err = std::max(sup_err, std::abs(viscous.omega.v[q] - decay * omega0.v[q]));
        sup_ref = std::max(sup_ref, std::abs(omega0.v[q]));
    }
    const double exact_rel = sup_err / sup_ref;

    const bool ok = rel_drift < 1e-8 && residual < 1e-6 && exact_rel < 1e-6;
    return {ok, fmt("inviscid drift %.3e (< 1e-8); viscous balance residual %.3e (< 1e-6); "
                    "error vs exact decay %.3e (< 1e-6)",
                    rel_drift, residual, exact_rel)};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion8() {
    // Shear flow: exact zero for every delta.
    ChannelDomain dom;
    dom.n1 = 32;
    dom.n2 = 2048;
    dom.len1 = 1.0;
    dom.validate();
    ChannelField shear = make_channel_field(
        dom, [](double, double y) { return std::sin(M_PI * y); },
        [](double, double) { return 0.0; },
        [](double x, double) { return 0.2 * std::cos(2.0 * M_PI * x); });
    std::vector<double> deltas{0.32, 0.16, 0.08, 0.04};
    bool shear_zero = true;
    for (double d : deltas) shear_zero = shear_zero && boundary_flux_integral(shear, d).integral == 0.0;

    // Leak flow: compare the extrapolated limit against a 1D quadrature
    // oracle built from the same integrand.
    ChannelField leak = make_channel_field(
        dom, [](double, double) { return 0.0; }, [](double, double) { return 1.0; },
        [](double, double y) { return y - 0.5; });
    GlobalVerdict v = global_from_local(leak, deltas);

    // The flux only depends on y, so a fine trapezoid rule in y is an exact
    // stand-in for the 2D quadrature (up to ~1e-10, far below the 5% bar).
    auto oracle_1d = [&](double delta) {
        const int n = 200001;
        const double h = 1.0 / (n - 1);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = i * h;
            const double dist = y < 0.5 ? y : 1.0 - y;
            double dphi = 0.0;
            if (dist < delta) {
                const double sgn = y < 0.5 ? 1.0 : -1.0;
                dphi = sgn * cutoff_xi_prime(dist / delta) / delta;
            }
            const double integrand = dphi * 1.0 * (0.5 + (y - 0.5));
            acc += (i == 0 || i == n - 1) ? 0.5 * integrand : integrand;
        }
        return acc * h;
    };
    const double i1 = oracle_1d(deltas[3]);
    const double i2 = oracle_1d(deltas[2]);
    const double oracle_limit = i1 - deltas[3] * (i2 - i1) / (deltas[2] - deltas[3]);
    const bool leak_ok = !v.conserved &&
                         std::abs(v.limit_estimate - oracle_limit) <= 0.05 * std::abs(oracle_limit);

    // Tangential layers: zero independent of the layer width.
    bool layer_zero = true;
    for (double width : {0.02, 0.05, 0.1, 0.2}) {
        ChannelField layer = make_channel_field(
            dom,
            [width](double x, double y) {
                return (1.0 - std::exp(-y * (1.0 - y) / (width * width))) *
                       std::sin(2.0 * M_PI * x);
            },
            [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
        for (double d : deltas)
            layer_zero = layer_zero && boundary_flux_integral(layer, d).integral == 0.0;
    }

    const bool ok = shear_zero && leak_ok && layer_zero;
    return {ok, fmt("shear flux %s; leak limit %.6f vs oracle %.6f (|diff| %.2f%% of oracle); "
                    "layer family %s",
                    shear_zero ? "exactly 0 for all delta" : "NONZERO", v.limit_estimate,
                    oracle_limit,
                    100.0 * std::abs(v.limit_estimate - oracle_limit) / std::abs(oracle_limit),
                    layer_zero ? "exactly 0 for all widths" : "NONZERO")};
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion9() {
    // Explicit decomposition identities.
    const double rho1 = kGeom1Rho1, rho2 = kGeom1Rho2;
    const double sys1 = std::abs(-rho1 + 3.0 * rho2 - 2.0);
    const double sys2 = std::abs(-rho1 * rho1 + 3.0 * rho2 * rho2 + 2.0);

    double bary_err = 0.0;
    bool splits_ok = true;
    for (const std::array<double, 3>& w :
         {std::array<double, 3>{0, 0, 2}, {0, 0, 1}, {0.6, 0, 1.2}}) {
        Laminate lam = geom1_decompose(w);
        StateTriple target = StateTriple::from_rows({0, 0, 0}, {0, 0, 0}, w);
        bary_err = std::max(bary_err, distance(lam.barycenter(), target));
        try {
            lam.validate(1e-9);
        } catch (...) {
            splits_ok = false;
        }
        for (std::size_t i = 0; i < lam.nodes.size(); ++i) {
            const LaminateNode& n = lam.nodes[i];
            if (n.left < 0) continue;
            StateTriple diff = lam.nodes[n.right].value - lam.nodes[n.left].value;
            splits_ok = splits_ok && in_wave_cone(diff);
        }
    }

    // Projection vs brute force.
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> entry(-1.5, 1.5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double C = 3.0;
    double worst_slack = -1e300;
    for (int trial = 0; trial < 100; ++trial) {
        StateTriple U;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) U.r[r][c] = entry(rng);
        KcProjection kc = kc_project(U, C);
        double best = 1e300;
        for (int s = 0; s < 1000000; ++s) {
            const double rho = std::exp((2.0 * unif(rng) - 1.0) * std::log(C));
            std::array<double, 3> u{gauss(rng), gauss(rng), gauss(rng)};
            const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
            const double target = std::exp((2.0 * unif(rng) - 1.0) * std::log(C));
            for (auto& x : u) x *= target / norm;
            best = std::min(best, distance(U, StateTriple::kpoint(rho, u)));
        }
        worst_slack = std::max(worst_slack, kc.dist - best);
    }
    const bool proj_ok = worst_slack <= 1e-3;
    const bool ok = sys1 <= 1e-12 && sys2 <= 1e-12 && bary_err <= 1e-12 && splits_ok && proj_ok;
    return {ok, fmt("rho-system residuals %.1e/%.1e (<= 1e-12); barycenter error %.1e "
                    "(<= 1e-12); splits %s; projection slack vs 1e6-sample search %.3e "
                    "(<= 1e-3)",
                    sys1, sys2, bary_err, splits_ok ? "all in wave cone" : "OUTSIDE wave cone",
                    worst_slack)};
}

// --------------------------------------------------------------- criterion 10

Outcome criterion10() {
    PeriodicGrid g = make_grid(3, 32);
    VectorField w0(g);
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx)
                w0[2].v[idx] = 2.0 + std::sin(2.0 * M_PI * g.coord(2, k));

    CiSchedule sched = default_ci_schedule(3);
    CiResult res = ci_iterate(w0, sched);
    if (!res.completed)
        return {false, "iteration halted: " + res.message};
    if (res.reports.size() != 3) return {false, "expected three stage reports"};

    // The source really is 2 pi cos(2 pi x3).
    double f_err = 0.0;
    idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx)
                f_err = std::max(f_err, std::abs(res.f.v[idx] -
                                                 2.0 * M_PI * std::cos(2.0 * M_PI * g.coord(2, k))));

    bool weak_ok = true, gap_ok = true, accepted = true;
    double worst_weak = 0.0;
    for (const CiStageReport& rep : res.reports) {
        accepted = accepted && rep.accepted;
        worst_weak = std::max({worst_weak, rep.weak_div_u, rep.weak_div_m});
        weak_ok = weak_ok && rep.weak_div_u <= 1e-6 && rep.weak_div_m <= 1e-6;
        gap_ok = gap_ok && rep.renorm_gap <= rep.renorm_gap_bound + 1e-12;
    }
    const double mean1 = res.reports.front().mean_dist;
    const double mean3 = res.reports.back().mean_dist;
    const bool halved = mean3 <= 0.5 * mean1;

    const bool ok = f_err < 1e-9 && accepted && weak_ok && gap_ok && halved;
    return {ok, fmt("three stages %s; weak residuals max %.2e (<= 1e-6); defect gap %s its "
                    "recorded bound; mean distance %.4f -> %.4f (ratio %.3f <= 0.5)",
                    accepted ? "accepted" : "NOT all accepted", worst_weak,
                    gap_ok ? "within" : "EXCEEDS", mean1, mean3,
                    mean1 > 0.0 ? mean3 / mean1 : 0.0)};
}

// --------------------------------------------------------------- criterion 11

Outcome criterion11() {
    PeriodicGrid g = make_grid(1, 512);
    FieldSpec spec;
    spec.kind = FieldKind::Weierstrass;
    spec.alpha = 0.5;
    spec.octaves = 7;
    spec.seed = 21;
    VectorField a(g), b(g);
    a[0] = sample_scalar(spec, g);
    spec.seed = 22;
    spec.alpha = 0.65;
    b[0] = sample_scalar(spec, g);

    const double p = 2.0, alpha = 0.4, eps = 1.0 / 16;
    EnsembleSet single;
    single.members = {a};
    single.weights = {1.0};
    const double ens1 = ensemble_besov(single, p, alpha, eps);
    const double direct = besov_functional(a, p, alpha, eps);
    const double err1 = std::abs(ens1 - direct) / std::max(1.0, std::abs(direct));

    EnsembleSet pair;
    pair.members = {a, b};
    pair.weights = {0.3, 0.7};
    const double ens2 = ensemble_besov(pair, p, alpha, eps);
    const double mean = 0.3 * direct + 0.7 * besov_functional(b, p, alpha, eps);
    const double err2 = std::abs(ens2 - mean) / std::max(1.0, std::abs(mean));

    const bool ok = err1 <= 1e-12 && err2 <= 1e-12;
    return {ok, fmt("singleton deviation %.2e, weighted-pair deviation %.2e (both <= 1e-12)",
                    err1, err2)};
}

using CriterionFn = Outcome (*)();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conservation laboratory acceptance checks"};
    int which = 0;
    app.add_option("--criterion", which, "criterion to run (1-11); 0 runs all")
        ->check(CLI::Range(0, 11));
    CLI11_PARSE(app, argc, argv);

    const CriterionFn fns[11] = {criterion1, criterion2, criterion3, criterion4,
                                 criterion5, criterion6, criterion7, criterion8,
                                 criterion9, criterion10, criterion11};

    bool all_pass = true;
    for (int n = 1; n <= 11; ++n) {
        if (which != 0 && which != n) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = fns[n - 1]();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %d %s: %s [%.1fs]\n", n, out.pass ? "PASS" : "FAIL",
                    out.detail.c_str(), secs);
        all_pass = all_pass && out.pass;
    }
    return all_pass ? 0 : 1;
}
