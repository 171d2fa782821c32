#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lyo/common.hpp"
#include "lyo/param_io.hpp"
#include "lyo/studies.hpp"

namespace lyo {

/// Fully resolved invocation: config-file values with flag overrides applied.
struct RunConfig {
    std::string subcommand;
    std::string params_path;
    std::string conditions_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    int verbosity = 0;
    StudyConfig study;
    std::string oat_input;                    ///< `oat` subcommand
    std::vector<std::string> benchmark_cases; ///< subset of {A1, A2, B1, B2}
    size_t benchmark_reps = 10;
    std::vector<std::pair<std::string, std::string>> case_configs; ///< per-case config paths
    KeyValueFile resolved; ///< echoed into every summary document
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "model",      "method",       "samples_mc",       "samples_pce",
        "order",      "grid_nodes",   "t_end",            "seed",
        "nodes",      "n_resample",   "ci_level",         "target_time",
        "probability_level",          "concentration_target",
        "Tb_min",     "Tb_max",       "params",           "conditions",
        "out",        "oat_input",    "benchmark_cases",  "benchmark_reps",
        "rtol",       "atol",         "verbosity",
    };
    return keys;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        std::string tok = trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!tok.empty()) out.push_back(tok);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

} // namespace detail

/// Merges config-file values with flag overrides (overrides win), validates
/// every key, and materializes the typed run configuration.
inline RunConfig parse_run_config(const std::string& subcommand, const std::string& config_path,
                                  const std::vector<std::pair<std::string, std::string>>& overrides) {
    KeyValueFile kv;
    if (!config_path.empty()) kv = read_key_value_file(config_path);
    for (const auto& [k, v] : overrides) kv.set(k, v);

    RunConfig rc;
    rc.subcommand = subcommand;
    rc.resolved = kv;

    for (const auto& [key, value] : kv.entries) {
        if (key.rfind("uncertain.", 0) == 0) {
            const std::string name = key.substr(10);
            if (name.empty()) throw ConfigError("config: empty parameter name in `" + key + "`");
            rc.study.inputs.push_back({name, parse_distribution(value)});
            continue;
        }
        if (key.rfind("case_config.", 0) == 0) {
            const std::string name = key.substr(12);
            if (name.empty()) throw ConfigError("config: empty case name in `" + key + "`");
            rc.case_configs.emplace_back(name, value);
            continue;
        }
        if (!detail::known_config_keys().count(key))
            throw ConfigError("config: unknown key `" + key + "`");
        if (key == "model") {
            if (value == "primary") rc.study.model = Model::Primary;
            else if (value == "secondary") rc.study.model = Model::Secondary;
            else throw ConfigError("config: model must be `primary` or `secondary`, got `" + value + "`");
        } else if (key == "method") {
            if (value == "pce") rc.study.method = Method::Pce;
            else if (value == "mc") rc.study.method = Method::Mc;
            else if (value == "both") rc.study.method = Method::Both;
            else throw ConfigError("config: method must be pce|mc|both, got `" + value + "`");
        } else if (key == "samples_mc") {
            rc.study.n_mc = static_cast<size_t>(parse_number(value, key));
        } else if (key == "samples_pce") {
            rc.study.n_pce = static_cast<size_t>(parse_number(value, key));
        } else if (key == "order") {
            rc.study.order = static_cast<int>(parse_number(value, key));
        } else if (key == "grid_nodes") {
            rc.study.grid_nodes = static_cast<size_t>(parse_number(value, key));
        } else if (key == "t_end") {
            rc.study.t_end = parse_number(value, key);
        } else if (key == "seed") {
            rc.seed = static_cast<uint64_t>(parse_number(value, key));
            rc.study.seed = rc.seed;
        } else if (key == "nodes") {
            rc.study.nodes = static_cast<int>(parse_number(value, key));
        } else if (key == "n_resample") {
            rc.study.n_resample = static_cast<size_t>(parse_number(value, key));
        } else if (key == "ci_level") {
            rc.study.ci_level = parse_number(value, key);
        } else if (key == "target_time") {
            rc.study.target_time = parse_number(value, key);
        } else if (key == "probability_level") {
            rc.study.probability_level = parse_number(value, key);
        } else if (key == "concentration_target") {
            rc.study.concentration_target = parse_number(value, key);
        } else if (key == "Tb_min") {
            rc.study.Tb_min = parse_number(value, key);
        } else if (key == "Tb_max") {
            rc.study.Tb_max = parse_number(value, key);
        } else if (key == "params") {
            rc.params_path = value;
        } else if (key == "conditions") {
            rc.conditions_path = value;
        } else if (key == "out") {
            rc.out_dir = value;
        } else if (key == "oat_input") {
            rc.oat_input = value;
        } else if (key == "benchmark_cases") {
            rc.benchmark_cases = detail::split_list(value);
        } else if (key == "benchmark_reps") {
            rc.benchmark_reps = static_cast<size_t>(parse_number(value, key));
        } else if (key == "rtol") {
            rc.study.integrator.rtol = parse_number(value, key);
        } else if (key == "atol") {
            rc.study.integrator.atol = parse_number(value, key);
        } else if (key == "verbosity") {
            rc.verbosity = static_cast<int>(parse_number(value, key));
        }
    }
    // A benchmark invocation built from per-case config files carries no
    // bundle paths of its own.
    const bool delegated = !rc.case_configs.empty();
    if (rc.params_path.empty() && !delegated)
        throw ConfigError("config: missing `params` (parameter file path)");
    if (rc.conditions_path.empty() && !delegated)
        throw ConfigError("config: missing `conditions` (conditions file path)");
    return rc;
}

} // namespace lyo
