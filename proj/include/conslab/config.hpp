#pragma once

// Run configuration: a TOML-style text file (sections, scalar keys, flat
// arrays, # comments) parsed into a typed table. A run is a pure function of
// its config, so every emitted report carries the FNV-1a hash of the raw
// config text.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace conslab {

struct ConfigValue {
    std::variant<bool, long long, double, std::string, std::vector<double>,
                 std::vector<std::string>>
        v;
};

struct ConfigTable {
    // section -> key -> value ("" section for top-level keys)
    std::map<std::string, std::map<std::string, ConfigValue>> sections;

    bool has(const std::string& section, const std::string& key) const;
    const ConfigValue& at(const std::string& section, const std::string& key) const;

    bool get_bool(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key) const;
    double get_float(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::vector<double> get_float_array(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& section,
                                              const std::string& key) const;

    bool get_bool_or(const std::string& section, const std::string& key, bool dflt) const;
    long long get_int_or(const std::string& section, const std::string& key,
                         long long dflt) const;
    double get_float_or(const std::string& section, const std::string& key, double dflt) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& dflt) const;
};

// Parses the supported TOML subset; throws std::runtime_error with a
// line-numbered message on anything else.
ConfigTable parse_config(const std::string& text);

std::uint64_t fnv1a_hash(const std::string& text);
std::string hash_hex(std::uint64_t h);

struct ExperimentConfig {
    std::string raw;
    std::uint64_t hash = 0;
    ConfigTable table;
    std::string kind;  // [experiment] kind
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace conslab
