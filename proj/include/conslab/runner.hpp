#pragma once

// Experiment runner behind the CLI: each operation family (gen, mollify,
// commutator, besov, burgers, transport, euler2d, boundary, convexint,
// report) consumes a parsed config and writes CSV/JSON/snapshot outputs into
// the chosen directory. Every JSON report carries the config hash; a run is
// a pure function of its config, so reruns are byte-identical.

#include <string>
#include <vector>

#include "conslab/config.hpp"
#include "conslab/generators.hpp"
#include "conslab/grid.hpp"

namespace conslab {

extern const char* kModuleVersion;

struct RunOptions {
    std::string out_dir = ".";
    int threads = 1;
    bool strict = false;  // fail on any invariant miss
};

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> outputs;
    std::string summary;
};

// CLI --threads wins; otherwise CONSERVE_LAB_THREADS; otherwise 1.
int resolve_threads(int cli_threads);

// Grid and field construction from config sections ([grid], [field.*]).
PeriodicGrid grid_from_config(const ConfigTable& table, const std::string& section);
FieldSpec field_spec_from_config(const ConfigTable& table, const std::string& section);

// Dispatches on `op` (one of the ten subcommand names).
RunResult run_experiment(const std::string& op, const ExperimentConfig& cfg,
                         const RunOptions& opt);

}  // namespace conslab
