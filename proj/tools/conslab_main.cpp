// conslab: command-line front end for the conservation-laboratory modules.
// Every subcommand reads one TOML config, writes CSV/JSON/snapshot outputs
// into --out, and exits nonzero only on assertion failures (1) or bad
// configs/usage (2).

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "conslab/config.hpp"
#include "conslab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"conslab: numerical laboratory for conservation and dissipation experiments"};
    app.require_subcommand(1);

    const char* subs[] = {"gen",     "mollify",   "commutator", "besov",     "burgers",
                          "transport", "euler2d", "boundary",   "convexint", "report"};
    const char* descs[] = {
        "sample an analytic field and store it as a snapshot",
        "mollify a sampled field at one kernel scale",
        "commutator ladders (dl, cet, euler, taylor_gap, pressure)",
        "Besov-type regularity functionals over a scale ladder",
        "Godunov Burgers runs with entropy balance windows",
        "pseudo-spectral advection of a scalar by a solenoidal field",
        "2D (Navier-)Stokes in vorticity form with energy series",
        "channel boundary-cutoff flux ladders and verdicts",
        "convex-integration stage schedule with diagnostics",
        "index previously produced outputs into one report",
    };

    std::string config_path, out_dir = ".";
    int threads = 0;
    bool strict = false;

    for (int i = 0; i < 10; ++i) {
        CLI::App* sub = app.add_subcommand(subs[i], descs[i]);
        sub->add_option("--config", config_path, "path to the TOML run configuration")
            ->required();
        sub->add_option("--out", out_dir, "output directory (default: current)");
        sub->add_option("--threads", threads,
                        "worker threads (default: CONSERVE_LAB_THREADS, then 1)");
        sub->add_flag("--strict", strict, "exit nonzero on any invariant miss");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string op = app.get_subcommands().front()->get_name();
    try {
        conslab::ExperimentConfig cfg = conslab::load_experiment_config(config_path);
        if (cfg.kind != op) {
            std::fprintf(stderr, "error: config declares kind '%s' but subcommand is '%s'\n",
                         cfg.kind.c_str(), op.c_str());
            return 2;
        }
        conslab::RunOptions opt;
        opt.out_dir = out_dir;
        opt.threads = conslab::resolve_threads(threads);
        opt.strict = strict;
        conslab::RunResult res = conslab::run_experiment(op, cfg, opt);
        std::printf("%s [config %s] %s\n", op.c_str(), conslab::hash_hex(cfg.hash).c_str(),
                    res.summary.c_str());
        for (const auto& p : res.outputs) std::printf("  wrote %s\n", p.c_str());
        return res.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
