#include "conslab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "conslab/balance.hpp"
#include "conslab/battery.hpp"
#include "conslab/burgers.hpp"
#include "conslab/commutators.hpp"
#include "conslab/convexint.hpp"
#include "conslab/flow2d.hpp"
#include "conslab/mollify.hpp"
#include "conslab/regularity.hpp"
#include "conslab/scaling.hpp"
#include "conslab/snapshot.hpp"
#include "conslab/spectral.hpp"

namespace conslab {

const char* kModuleVersion = "1.0.0";

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("CONSERVE_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Runs fn(i) for i in [0, n) on up to `threads` workers; results must be
// written into index-addressed slots so collection stays ordered.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Emitter {
    const ExperimentConfig& cfg;
    const RunOptions& opt;
    RunResult result;
    int violations = 0;
    json report;

    Emitter(const std::string& op, const ExperimentConfig& c, const RunOptions& o)
        : cfg(c), opt(o) {
        fs::create_directories(o.out_dir);
        report["op"] = op;
        report["config_hash"] = hash_hex(c.hash);
        report["module_version"] = kModuleVersion;
        report["threads"] = o.threads;
    }

    std::string path(const std::string& name) const {
        return (fs::path(opt.out_dir) / name).string();
    }

    void text(const std::string& name, const std::string& content) {
        write_text_file(path(name), content);
        result.outputs.push_back(path(name));
    }

    void snapshot(const std::string& name, const Snapshot& s) {
        write_snapshot(path(name), s);
        result.outputs.push_back(path(name));
    }

    void check(bool ok, const std::string& what) {
        if (!ok) {
            ++violations;
            report["violations"].push_back(what);
        }
    }

    RunResult finish(const std::string& report_name, const std::string& summary) {
        report["outputs"] = result.outputs;
        text(report_name, report.dump(2) + "\n");
        result.summary = summary;
        if (violations > 0 && opt.strict) result.exit_code = 1;
        return result;
    }
};

std::array<int, 3> int3_from(const ConfigTable& t, const std::string& sec, const std::string& key,
                             std::array<int, 3> dflt) {
    if (!t.has(sec, key)) return dflt;
    const auto arr = t.get_float_array(sec, key);
    std::array<int, 3> out = dflt;
    for (std::size_t a = 0; a < arr.size() && a < 3; ++a) out[a] = int(std::llround(arr[a]));
    return out;
}

}  // namespace

PeriodicGrid grid_from_config(const ConfigTable& table, const std::string& section) {
    PeriodicGrid g;
    g.dim = int(table.get_int_or(section, "dim", 1));
    if (table.has(section, "points")) {
        const auto& cv = table.at(section, "points");
        if (std::holds_alternative<long long>(cv.v)) {
            const int n = int(table.get_int(section, "points"));
            for (int a = 0; a < g.dim; ++a) g.n[a] = n;
        } else {
            const auto arr = table.get_float_array(section, "points");
            if (int(arr.size()) != g.dim)
                throw std::runtime_error("config: [" + section + "].points length != dim");
            for (int a = 0; a < g.dim; ++a) g.n[a] = int(std::llround(arr[a]));
        }
    }
    if (table.has(section, "length")) {
        const auto& cv = table.at(section, "length");
        if (std::holds_alternative<std::vector<double>>(cv.v)) {
            const auto arr = table.get_float_array(section, "length");
            if (int(arr.size()) != g.dim)
                throw std::runtime_error("config: [" + section + "].length length != dim");
            for (int a = 0; a < g.dim; ++a) g.len[a] = arr[a];
        } else {
            const double L = table.get_float(section, "length");
            for (int a = 0; a < g.dim; ++a) g.len[a] = L;
        }
    }
    g.validate();
    return g;
}

FieldSpec field_spec_from_config(const ConfigTable& table, const std::string& section) {
    FieldSpec spec;
    spec.kind = parse_field_kind(table.get_string(section, "kind"));
    spec.amplitude = table.get_float_or(section, "amplitude", 1.0);
    spec.value = table.get_float_or(section, "value", 0.0);
    spec.wavevector = int3_from(table, section, "wavevector", {1, 0, 0});
    spec.phase = table.get_float_or(section, "phase", 0.0);
    spec.use_cos = table.get_bool_or(section, "use_cos", false);
    spec.component = int(table.get_int_or(section, "component", 0));
    spec.shear_mode = int(table.get_int_or(section, "shear_mode", 1));
    spec.alpha = table.get_float_or(section, "alpha", 0.5);
    spec.octaves = int(table.get_int_or(section, "octaves", 8));
    spec.seed = std::uint64_t(table.get_int_or(section, "seed", 0));
    spec.direction = int3_from(table, section, "direction", {1, 0, 0});
    spec.phase_offset = table.get_float_or(section, "phase_offset", 0.0);
    const std::string pm = table.get_string_or(section, "phase_mode", "seeded");
    if (pm == "seeded")
        spec.phase_mode = PhaseMode::Seeded;
    else if (pm == "locked")
        spec.phase_mode = PhaseMode::Locked;
    else
        throw std::runtime_error("config: [" + section + "].phase_mode must be seeded or locked");
    spec.layer_width = table.get_float_or(section, "layer_width", 0.1);
    if (table.has(section, "table")) spec.table = table.get_float_array(section, "table");
    return spec;
}

namespace {

std::vector<double> ladder_from_config(const ConfigTable& t, const PeriodicGrid& g) {
    if (t.has("ladder", "eps")) return t.get_float_array("ladder", "eps");
    const double eps0 = t.get_float_or("ladder", "eps0", 0.25 * g.len[0]);
    const int rungs = int(t.get_int_or("ladder", "rungs", 5));
    EpsilonLadder lad = make_ladder(g, eps0, rungs);
    return lad.eps;
}

// ------------------------------------------------------------------- gen

RunResult run_gen(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("gen", cfg, opt);
    const PeriodicGrid grid = grid_from_config(cfg.table, "grid");
    const FieldSpec spec = field_spec_from_config(cfg.table, "field");
    const std::string rank = cfg.table.get_string_or("field", "rank", "scalar");
    const std::string name = cfg.table.get_string_or("output", "name", "field");

    if (rank == "scalar") {
        ScalarField f = sample_scalar(spec, grid);
        em.snapshot(name + ".clf", snapshot_of(f, name));
        em.report["l1"] = lp_norm(f, 1.0);
        em.report["l2"] = lp_norm(f, 2.0);
        em.report["linf"] = lp_norm(f, std::numeric_limits<double>::infinity());
        em.report["mean"] = integrate(f) / (grid.len[0] * (grid.dim > 1 ? grid.len[1] : 1.0) *
                                            (grid.dim > 2 ? grid.len[2] : 1.0));
    } else if (rank == "vector") {
        VectorField u = sample_vector(spec, grid);
        em.snapshot(name + ".clf", snapshot_of(u, name));
        em.report["l2"] = lp_norm(u, 2.0);
        em.report["divergence_l2"] = l2_norm(divergence(u));
    } else {
        throw std::runtime_error("config: [field].rank must be scalar or vector");
    }
    em.report["kind"] = field_kind_name(spec.kind);
    return em.finish("gen_report.json", "wrote " + name + ".clf");
}

// --------------------------------------------------------------- mollify

RunResult run_mollify(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("mollify", cfg, opt);
    const PeriodicGrid grid = grid_from_config(cfg.table, "grid");
    const FieldSpec spec = field_spec_from_config(cfg.table, "field");
    const double eps = cfg.table.get_float("kernel", "eps");
    const std::string name = cfg.table.get_string_or("output", "name", "mollified");

    ScalarField f = sample_scalar(spec, grid);
    MollifierKernel kernel = build_kernel(grid, eps);
    ScalarField g = mollify(f, kernel);

    const double inf = std::numeric_limits<double>::infinity();
    em.report["eps"] = eps;
    em.report["kernel_mass"] = kernel.mass();
    em.report["linf_before"] = lp_norm(f, inf);
    em.report["linf_after"] = lp_norm(g, inf);
    em.report["l1_before"] = lp_norm(f, 1.0);
    em.report["l1_after"] = lp_norm(g, 1.0);
    // Mollification with a unit-mass nonnegative kernel contracts sup norms.
    em.check(lp_norm(g, inf) <= lp_norm(f, inf) * (1.0 + 1e-12) + 1e-300,
             "sup-norm contraction violated");
    em.snapshot(name + ".clf", snapshot_of(g, name));
    return em.finish("mollify_report.json", "mollified at eps=" + std::to_string(eps));
}

// ------------------------------------------------------------ commutator

RunResult run_commutator(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("commutator", cfg, opt);
    const PeriodicGrid grid = grid_from_config(cfg.table, "grid");
    const std::string kind = cfg.table.get_string("commutator", "kind");
    const std::vector<double> eps = ladder_from_config(cfg.table, grid);
    const int n = int(eps.size());

    ScalarField rho = sample_scalar(field_spec_from_config(cfg.table, "field.rho"), grid);
    VectorField u = sample_vector(field_spec_from_config(cfg.table, "field.u"), grid);

    std::optional<double> predicted;
    if (cfg.table.has("ladder", "predicted_exponent"))
        predicted = cfg.table.get_float("ladder", "predicted_exponent");

    auto emit_ladder = [&](const std::string& csv_name, const std::vector<double>& values) {
        ScalingReport rep = fit_scaling(eps, values, predicted);
        em.text(csv_name, scaling_report_csv(rep));
        em.report["fitted_exponent"] = rep.fitted_exponent;
        em.report["fit_quality"] = rep.fit_quality;
    };

    if (kind == "dl" || kind == "cet") {
        std::vector<double> values(n);
        parallel_for(n, opt.threads, [&](int i) {
            MollifierKernel k = build_kernel(grid, eps[i]);
            CommutatorResult r = (kind == "dl") ? dl_commutator(rho, u, k)
                                                : cet_commutator(rho, u, k);
            values[i] = r.l1;
        });
        emit_ladder(kind + "_ladder.csv", values);
    } else if (kind == "euler") {
        ScalarField phi = radial_bump(
            grid, {0.5 * grid.len[0], 0.5 * (grid.dim > 1 ? grid.len[1] : 0.0),
                   0.5 * (grid.dim > 2 ? grid.len[2] : 0.0)},
            cfg.table.get_float_or("commutator", "phi_scale", 0.45) * grid.len[0]);
        std::vector<double> values(n);
        parallel_for(n, opt.threads, [&](int i) {
            MollifierKernel k = build_kernel(grid, eps[i]);
            values[i] = std::abs(euler_defect(u, ScalarField(grid), k, phi));
        });
        emit_ladder("euler_defect_ladder.csv", values);
    } else if (kind == "taylor_gap") {
        const double gamma = cfg.table.get_float_or("commutator", "gamma", 5.0 / 3.0);
        auto p_fn = [gamma](double r) { return std::pow(r, gamma); };
        std::vector<double> values(n);
        parallel_for(n, opt.threads, [&](int i) {
            MollifierKernel k = build_kernel(grid, eps[i]);
            values[i] = lp_norm(taylor_gap(p_fn, rho, k), 1.0);
        });
        emit_ladder("taylor_gap_ladder.csv", values);
    } else if (kind == "pressure") {
        const double gamma = cfg.table.get_float_or("commutator", "gamma", 1.4);
        const double alpha_cut = cfg.table.get_float_or("commutator", "alpha_cut", 0.5);
        std::vector<double> r1(n), r2(n), vac(n);
        parallel_for(n, opt.threads, [&](int i) {
            MollifierKernel k = build_kernel(grid, eps[i]);
            PressureCommutators pc = pressure_commutators(rho, u, gamma, k, alpha_cut);
            r1[i] = std::abs(pc.r1);
            r2[i] = std::abs(pc.r2);
            vac[i] = pc.vacuum_fraction;
        });
        ScalingReport rep1 = fit_scaling(eps, r1, predicted);
        ScalingReport rep2 = fit_scaling(eps, r2, predicted);
        em.text("pressure_r1_ladder.csv", scaling_report_csv(rep1));
        em.text("pressure_r2_ladder.csv", scaling_report_csv(rep2));
        em.report["r1_exponent"] = rep1.fitted_exponent;
        em.report["r2_exponent"] = rep2.fitted_exponent;
        em.report["vacuum_fraction"] = vac;
    } else {
        throw std::runtime_error("config: [commutator].kind must be dl, cet, euler, taylor_gap "
                                 "or pressure (got '" + kind + "')");
    }
    em.report["kind"] = kind;
    return em.finish("commutator_report.json", "commutator kind=" + kind);
}

// ------------------------------------------------------------------ besov

RunResult run_besov(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("besov", cfg, opt);
    const PeriodicGrid grid = grid_from_config(cfg.table, "grid");
    const std::string mode = cfg.table.get_string_or("besov", "mode", "functional");
    const double p = cfg.table.get_float_or("besov", "p", 2.0);
    const double alpha = cfg.table.get_float_or("besov", "alpha", 0.5);
    em.report["mode"] = mode;
    em.report["p"] = p;
    em.report["alpha"] = alpha;

    std::optional<double> predicted;
    if (cfg.table.has("ladder", "predicted_exponent"))
        predicted = cfg.table.get_float("ladder", "predicted_exponent");

    if (mode == "ensemble") {
        EnsembleSet ens;
        const auto files = cfg.table.get_string_array("ensemble", "files");
        ens.weights = cfg.table.get_float_array("ensemble", "weights");
        for (const auto& f : files) ens.members.push_back(vector_from_snapshot(read_snapshot(f)));
        const double eps = cfg.table.get_float("besov", "eps");
        em.report["value"] = ensemble_besov(ens, p, alpha, eps);
        em.report["members"] = int(files.size());
        return em.finish("besov_report.json", "ensemble besov");
    }

    const FieldSpec spec = field_spec_from_config(cfg.table, "field");
    const std::string rank = cfg.table.get_string_or("field", "rank", "scalar");
    const std::vector<double> eps = ladder_from_config(cfg.table, grid);
    const int n = int(eps.size());

    if (mode == "holder") {
        ScalarField f = sample_scalar(spec, grid);
        EpsilonLadder lad;
        lad.eps = eps;
        HolderEstimate est = holder_exponent_estimate(f, lad);
        em.report["alpha_hat"] = est.alpha_hat;
        em.report["fit_quality"] = est.fit_quality;
        em.report["flag"] = est.flag;
        return em.finish("besov_report.json", "holder estimate");
    }

    std::vector<double> values(n);
    if (mode == "functional") {
        if (rank == "vector") {
            VectorField u = sample_vector(spec, grid);
            parallel_for(n, opt.threads,
                         [&](int i) { values[i] = besov_functional(u, p, alpha, eps[i]); });
        } else {
            ScalarField f = sample_scalar(spec, grid);
            parallel_for(n, opt.threads,
                         [&](int i) { values[i] = besov_functional(f, p, alpha, eps[i]); });
        }
    } else if (mode == "increment" || mode == "gradient") {
        ScalarField f = sample_scalar(spec, grid);
        parallel_for(n, opt.threads, [&](int i) {
            MollifierKernel k = build_kernel(grid, eps[i]);
            values[i] = (mode == "increment") ? mollified_increment_norm(f, p, alpha, k)
                                              : gradient_bound(f, p, alpha, k);
        });
    } else {
        throw std::runtime_error("config: [besov].mode must be functional, increment, gradient, "
                                 "holder or ensemble (got '" + mode + "')");
    }
    ScalingReport rep = fit_scaling(eps, values, predicted);
    em.text("besov_ladder.csv", scaling_report_csv(rep));
    em.report["fitted_exponent"] = rep.fitted_exponent;
    em.report["fit_quality"] = rep.fit_quality;
    return em.finish("besov_report.json", "besov mode=" + mode);
}

// ---------------------------------------------------------------- burgers

RunResult run_burgers(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("burgers", cfg, opt);
    const double xa = cfg.table.get_float_or("burgers", "xa", -0.05);
    const double xb = cfg.table.get_float_or("burgers", "xb", 1.65);
    const int cells = int(cfg.table.get_int_or("burgers", "cells", 4096));
    const double cfl = cfg.table.get_float_or("burgers", "cfl", 0.9);
    const double t_end = cfg.table.get_float_or("burgers", "t_end", 2.0);
    const std::string datum = cfg.table.get_string_or("burgers", "datum", "ramp");
    const std::string bnd = cfg.table.get_string_or("burgers", "boundary", "farfield");

    std::function<double(double)> initial;
    if (datum == "ramp") {
        initial = [](double x) { return burgers_exact_ramp(x, 0.0); };
    } else if (datum == "sine") {
        initial = [](double x) { return std::sin(2.0 * M_PI * x); };
    } else {
        throw std::runtime_error("config: [burgers].datum must be ramp or sine");
    }
    const BurgersBoundary boundary =
        (bnd == "periodic") ? BurgersBoundary::Periodic : BurgersBoundary::FarField;

    BurgersState s = make_burgers_state(xa, xb, cells, initial, boundary, cfl);
    BurgersTrajectory traj = burgers_run(s, t_end);

    // Entropy series; every recorded substep, one row.
    std::string series = "time,entropy\n";
    {
        char buf[80];
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", traj.times[i], traj.energy[i]);
            series += buf;
        }
    }
    em.text("burgers_series.csv", series);

    // Window balances: the configured window plus an optional pre-shock one.
    std::string balance = "t_start,t_end,window_rate,boundary_inflow,dissipation\n";
    auto add_window = [&](double t1, double t2) {
        EntropyBalance eb = burgers_entropy_balance(traj, t1, t2);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", t1, t2, eb.window_rate,
                      eb.boundary_inflow, eb.dissipation);
        balance += buf;
        em.check(eb.dissipation >= -1e-10, "negative entropy dissipation in window");
        return eb;
    };
    const double w1 = cfg.table.get_float_or("window", "t1", 1.2);
    const double w2 = cfg.table.get_float_or("window", "t2", std::min(2.0, t_end));
    EntropyBalance main = add_window(w1, w2);
    if (cfg.table.has("window", "pre_t1") || cfg.table.has("window", "pre_t2"))
        add_window(cfg.table.get_float_or("window", "pre_t1", 0.0),
                   cfg.table.get_float_or("window", "pre_t2", 0.8));
    em.text("burgers_balance.csv", balance);

    em.report["final_time"] = traj.final_state.time;
    em.report["final_mass"] = mass_integral(traj.final_state);
    em.report["final_entropy"] = entropy_integral(traj.final_state);
    em.report["window_rate"] = main.window_rate;
    em.report["dissipation"] = main.dissipation;
    if (datum == "ramp") {
        double err = 0.0;
        for (int i = 0; i < traj.final_state.cells; ++i)
            err += std::abs(traj.final_state.u[i] -
                            burgers_exact_ramp(traj.final_state.cell_center(i),
                                               traj.final_state.time)) *
                   traj.final_state.dx;
        em.report["exact_l1_error"] = err;
    }
    return em.finish("burgers_report.json",
                     "dissipation=" + std::to_string(main.dissipation) + " on [" +
                         std::to_string(w1) + "," + std::to_string(w2) + "]");
}

// -------------------------------------------------------------- transport

RunResult run_transport(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("transport", cfg, opt);
    const PeriodicGrid grid = grid_from_config(cfg.table, "grid");
    ScalarField rho = sample_scalar(field_spec_from_config(cfg.table, "field.rho"), grid);
    VectorField u = sample_vector(field_spec_from_config(cfg.table, "field.u"), grid);
    const double dt = cfg.table.get_float("transport", "dt");
    const int steps = int(cfg.table.get_int("transport", "steps"));
    const int record_every = int(cfg.table.get_int_or("transport", "record_every", 1));

    const double mass0 = integrate(rho);
    std::string series = "time,mass,l2\n";
    char buf[120];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", 0.0, mass0, l2_norm(rho));
    series += buf;
    for (int s = 1; s <= steps; ++s) {
        rho = transport_step(rho, u, dt);
        if (s % record_every == 0 || s == steps) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s * dt, integrate(rho),
                          l2_norm(rho));
            series += buf;
        }
    }
    em.text("transport_series.csv", series);
    const double drift = std::abs(integrate(rho) - mass0) / (1.0 + std::abs(mass0));
    em.report["mass_drift"] = drift;
    em.report["time_embedding"] = "periodic";
    em.check(drift < 1e-10, "transport mass drift exceeds 1e-10");
    em.snapshot("rho_final.clf", snapshot_of(rho, "rho_final"));
    return em.finish("transport_report.json", "mass drift " + std::to_string(drift));
}

// ---------------------------------------------------------------- euler2d

RunResult run_euler2d(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("euler2d", cfg, opt);
    const PeriodicGrid grid = grid_from_config(cfg.table, "grid");
    if (grid.dim != 2) throw std::runtime_error("config: euler2d requires [grid].dim = 2");
    ScalarField omega0 = sample_scalar(field_spec_from_config(cfg.table, "field.omega"), grid);
    const double nu = cfg.table.get_float_or("euler2d", "nu", 0.0);
    const double dt = cfg.table.get_float("euler2d", "dt");
    const double t_end = cfg.table.get_float("euler2d", "t_end");
    const int record_every = int(cfg.table.get_int_or("euler2d", "record_every", 1));

    em.snapshot("omega_initial.clf", snapshot_of(omega0, "omega_initial"));
    FlowState2D state = make_flow_state(omega0, nu);
    FlowDiagnostics diag = euler2d_run(state, t_end, dt, record_every);
    em.snapshot("omega_final.clf", snapshot_of(state.omega, "omega_final"));

    std::string series = "t,E,dissipation\n";
    char buf[120];
    for (std::size_t i = 0; i < diag.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", diag.times[i], diag.energy[i],
                      nu * diag.enstrophy[i]);
        series += buf;
    }
    em.text("energy_series.csv", series);

    json manifest;
    manifest["config_hash"] = hash_hex(cfg.hash);
    manifest["times"] = diag.times;
    manifest["nu"] = nu;
    manifest["scheme"] = "vorticity-streamfunction RK4, 2/3 dealiased, integrating factor";
    manifest["grid"] = {{"dim", grid.dim},
                        {"points", {grid.n[0], grid.n[1]}},
                        {"length", {grid.len[0], grid.len[1]}}};
    manifest["time_embedding"] = "periodic";
    manifest["snapshots"] = {"omega_initial.clf", "omega_final.clf"};
    em.text("trajectory_manifest.json", manifest.dump(2) + "\n");

    const double drift =
        std::abs(diag.energy.back() - diag.energy.front()) / (1.0 + diag.energy.front());
    em.report["energy_initial"] = diag.energy.front();
    em.report["energy_final"] = diag.energy.back();
    em.report["energy_drift"] = drift;
    em.report["time_embedding"] = "periodic";
    if (nu > 0.0) {
        const double residual = nse_energy_balance(diag, nu);
        em.report["balance_residual"] = residual;
        em.check(residual < 1e-5, "viscous energy balance residual exceeds 1e-5");
    } else {
        em.check(drift / std::max(t_end, 1e-300) < 1e-7,
                 "inviscid energy drift rate exceeds 1e-7");
    }
    return em.finish("euler2d_report.json", "euler2d to t=" + std::to_string(t_end));
}

// --------------------------------------------------------------- boundary

RunResult run_boundary(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("boundary", cfg, opt);
    ChannelDomain dom;
    dom.n1 = int(cfg.table.get_int_or("channel", "n1", 64));
    dom.n2 = int(cfg.table.get_int_or("channel", "n2", 256));
    dom.len1 = cfg.table.get_float_or("channel", "len1", 1.0);
    dom.validate();

    const std::string profile = cfg.table.get_string("profile", "kind");
    const double amp = cfg.table.get_float_or("profile", "amplitude", 1.0);
    ChannelField field;
    if (profile == "shear") {
        field = make_channel_field(
            dom, [amp](double, double y) { return amp * std::sin(2.0 * M_PI * y); },
            [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    } else if (profile == "leak") {
        field = make_channel_field(
            dom, [](double, double) { return 0.0; }, [amp](double, double) { return amp; },
            [](double, double y) { return y; });
    } else if (profile == "layer") {
        const double width = cfg.table.get_float_or("profile", "width", 0.05);
        field = make_channel_field(
            dom,
            [amp, width](double, double y) {
                return amp * std::tanh(y / width) * std::tanh((1.0 - y) / width);
            },
            [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    } else {
        throw std::runtime_error("config: [profile].kind must be shear, leak or layer");
    }

    std::vector<double> deltas;
    if (cfg.table.has("ladder", "deltas")) {
        deltas = cfg.table.get_float_array("ladder", "deltas");
    } else {
        const double d0 = cfg.table.get_float_or("ladder", "delta0", 0.25);
        const int rungs = int(cfg.table.get_int_or("ladder", "rungs", 5));
        for (int i = 0; i < rungs; ++i) {
            const double d = d0 * std::pow(0.5, i);
            if (d >= 4.0 * dom.h2()) deltas.push_back(d);
        }
    }
    if (deltas.size() < 3)
        throw std::runtime_error("config: boundary ladder needs at least 3 usable rungs");

    em.text("flux_ladder.csv", flux_ladder_csv(field, deltas));
    GlobalVerdict verdict = global_from_local(field, deltas);
    em.text("verdict.json", global_verdict_json(verdict) + "\n");
    em.report["profile"] = profile;
    em.report["conserved"] = verdict.conserved;
    em.report["rate"] = verdict.rate;
    em.report["limit_estimate"] = verdict.limit_estimate;
    return em.finish("boundary_report.json",
                     std::string("profile=") + profile +
                         (verdict.conserved ? " conserved" : " leaks energy"));
}

// -------------------------------------------------------------- convexint

RunResult run_convexint(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("convexint", cfg, opt);
    const int points = int(cfg.table.get_int_or("convexint", "points", 32));
    const int n_stages = int(cfg.table.get_int_or("convexint", "stages", 3));
    const double w_base = cfg.table.get_float_or("convexint", "w_base", 2.0);
    const double w_amp = cfg.table.get_float_or("convexint", "w_amp", 1.0);

    PeriodicGrid grid;
    grid.dim = 3;
    grid.n = {points, points, points};
    grid.validate();

    VectorField w0(grid);
    std::size_t idx = 0;
    for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j)
            for (int k = 0; k < points; ++k, ++idx)
                w0[2].v[idx] = w_base + w_amp * std::sin(2.0 * M_PI * grid.coord(2, k));

    CiSchedule sched = default_ci_schedule(n_stages);
    if (cfg.table.has("convexint", "deltas")) {
        const auto ds = cfg.table.get_float_array("convexint", "deltas");
        for (std::size_t i = 0; i < ds.size() && i < sched.stages.size(); ++i)
            sched.stages[i].delta = ds[i];
    }

    CiResult res = ci_iterate(w0, sched);
    em.text("ci_stages.csv", ci_report_csv(res.reports));
    for (std::size_t i = 0; i < res.fields.size(); ++i)
        em.snapshot("iterate_stage" + std::to_string(i + 1) + ".clf",
                    snapshot_of(res.fields[i], "iterate_stage" + std::to_string(i + 1)));

    em.report["completed"] = res.completed;
    em.report["message"] = res.message;
    json stages = json::array();
    for (const auto& r : res.reports)
        stages.push_back({{"stage", r.stage},
                          {"C", r.C},
                          {"mean_dist", r.mean_dist},
                          {"max_dist", r.max_dist},
                          {"weak_div_u", r.weak_div_u},
                          {"weak_div_m", r.weak_div_m},
                          {"renorm_gap", r.renorm_gap},
                          {"renorm_gap_bound", r.renorm_gap_bound},
                          {"h_integral", r.h_integral},
                          {"delta", r.delta},
                          {"accepted", r.accepted}});
    em.report["stages"] = stages;
    em.check(res.completed, "convex-integration schedule did not complete");
    return em.finish("convexint_report.json", res.message);
}

// ----------------------------------------------------------------- report

RunResult run_report(const ExperimentConfig& cfg, const RunOptions& opt) {
    Emitter em("report", cfg, opt);
    json files = json::array();
    std::vector<std::string> inputs;
    if (cfg.table.has("report", "inputs")) inputs = cfg.table.get_string_array("report", "inputs");
    for (const auto& p : inputs) {
        std::ifstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("report: cannot open input " + p);
        std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        json entry;
        entry["path"] = p;
        entry["bytes"] = bytes.size();
        entry["fnv1a"] = hash_hex(fnv1a_hash(bytes));
        if (p.size() > 4 && p.substr(p.size() - 4) == ".clf") {
            Snapshot s = read_snapshot(p);
            entry["field"] = {{"name", s.name},
                              {"rank", s.rank},
                              {"dim", s.grid.dim},
                              {"points", {s.grid.n[0], s.grid.n[1], s.grid.n[2]}}};
        }
        files.push_back(entry);
    }
    em.report["files"] = files;
    return em.finish("report_index.json",
                     "indexed " + std::to_string(inputs.size()) + " input(s)");
}

}  // namespace

RunResult run_experiment(const std::string& op, const ExperimentConfig& cfg,
                         const RunOptions& opt) {
    if (op == "gen") return run_gen(cfg, opt);
    if (op == "mollify") return run_mollify(cfg, opt);
    if (op == "commutator") return run_commutator(cfg, opt);
    if (op == "besov") return run_besov(cfg, opt);
    if (op == "burgers") return run_burgers(cfg, opt);
    if (op == "transport") return run_transport(cfg, opt);
    if (op == "euler2d") return run_euler2d(cfg, opt);
    if (op == "boundary") return run_boundary(cfg, opt);
    if (op == "convexint") return run_convexint(cfg, opt);
    if (op == "report") return run_report(cfg, opt);
    throw std::runtime_error("unknown experiment kind '" + op + "'");
}

}  // namespace conslab
