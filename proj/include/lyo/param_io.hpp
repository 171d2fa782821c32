#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lyo/common.hpp"
#include "lyo/physics.hpp"

namespace lyo {

/// One parsed `key = value` document: ordered keys, `#` comments, blank lines
/// ignored. Values stay strings until a typed getter is applied.
struct KeyValueFile {
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return true;
        return false;
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        throw ConfigError("missing required key: " + key);
    }

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries)
            if (k == key) { v = value; return; }
        entries.emplace_back(key, value);
    }
};

namespace detail {
inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace detail

inline KeyValueFile parse_key_value_text(std::istream& in, const std::string& origin) {
    KeyValueFile kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
        if (kv.has(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`");
        kv.entries.emplace_back(key, value);
    }
    return kv;
}

inline KeyValueFile read_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    return parse_key_value_text(in, path);
}

inline double parse_number(const std::string& s, const std::string& context) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError(context + ": not a number: `" + s + "`");
    return v;
}

/// Numeric field registries. Names are the parameter-path strings used by the
/// parameter files and by UncertainInput; they match the struct fields.
inline const std::map<std::string, double ModelParameters::*>& model_parameter_fields() {
    static const std::map<std::string, double ModelParameters::*> fields = {
        {"H", &ModelParameters::H},           {"d", &ModelParameters::d},
        {"rho_f", &ModelParameters::rho_f},   {"cp_f", &ModelParameters::cp_f},
        {"k_f", &ModelParameters::k_f},       {"rho_e", &ModelParameters::rho_e},
        {"cp_e", &ModelParameters::cp_e},     {"k_e", &ModelParameters::k_e},
        {"rho_d", &ModelParameters::rho_d},   {"dH_sub", &ModelParameters::dH_sub},
        {"dH_des", &ModelParameters::dH_des}, {"F1", &ModelParameters::F1},
        {"F2", &ModelParameters::F2},         {"h", &ModelParameters::h},
        {"R0", &ModelParameters::R0},         {"R1", &ModelParameters::R1},
        {"R2", &ModelParameters::R2},         {"f_a", &ModelParameters::f_a},
        {"E_a", &ModelParameters::E_a},       {"sigma_sb", &ModelParameters::sigma_sb},
        {"R_gas", &ModelParameters::R_gas},   {"cw_eq", &ModelParameters::cw_eq},
    };
    return fields;
}

inline const std::map<std::string, double ProcessConditions::*>& process_condition_fields() {
    static const std::map<std::string, double ProcessConditions::*> fields = {
        {"T_b", &ProcessConditions::T_b},   {"T_u", &ProcessConditions::T_u},
        {"T_c", &ProcessConditions::T_c},   {"p_wc", &ProcessConditions::p_wc},
        {"T_0", &ProcessConditions::T_0},   {"cw_0", &ProcessConditions::cw_0},
        {"t_0", &ProcessConditions::t_0},
    };
    return fields;
}

/// Parameter bundle plus named access to every numeric field, used for
/// patching sampled values into a simulation.
struct ParameterBundle {
    ModelParameters params;
    ProcessConditions conditions;

    bool has_field(const std::string& name) const {
        return model_parameter_fields().count(name) > 0 ||
               process_condition_fields().count(name) > 0;
    }

    double get_field(const std::string& name) const {
        if (auto it = model_parameter_fields().find(name); it != model_parameter_fields().end())
            return params.*(it->second);
        if (auto it = process_condition_fields().find(name); it != process_condition_fields().end())
            return conditions.*(it->second);
        throw ConfigError("unknown parameter field: " + name);
    }

    void set_field(const std::string& name, double value) {
        if (auto it = model_parameter_fields().find(name); it != model_parameter_fields().end()) {
            params.*(it->second) = value;
            return;
        }
        if (auto it = process_condition_fields().find(name); it != process_condition_fields().end()) {
            conditions.*(it->second) = value;
            return;
        }
        throw ConfigError("unknown parameter field: " + name);
    }
};

/// schema_version accepted by the parameter/condition readers.
inline constexpr int kParameterSchemaVersion = 1;

inline ModelParameters read_model_parameters(const std::string& path) {
    KeyValueFile kv = read_key_value_file(path);
    ModelParameters p{};
    const auto& fields = model_parameter_fields();
    for (const auto& [key, value] : kv.entries) {
        if (key == "schema_version") {
            if (static_cast<int>(parse_number(value, path)) != kParameterSchemaVersion)
                throw ConfigError(path + ": unsupported schema_version " + value);
            continue;
        }
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError(path + ": unknown parameter key `" + key + "`");
        p.*(it->second) = parse_number(value, path + ": " + key);
    }
    // sigma_sb, R_gas, cw_eq keep their in-struct defaults when absent.
    for (const auto& [name, ptr] : fields) {
        if (!kv.has(name) && name != "sigma_sb" && name != "R_gas" && name != "cw_eq")
            throw ConfigError(path + ": missing parameter key `" + name + "`");
    }
    return p;
}

inline ProcessConditions read_process_conditions(const std::string& path) {
    KeyValueFile kv = read_key_value_file(path);
    ProcessConditions c{};
    const auto& fields = process_condition_fields();
    for (const auto& [key, value] : kv.entries) {
        if (key == "schema_version") {
            if (static_cast<int>(parse_number(value, path)) != kParameterSchemaVersion)
                throw ConfigError(path + ": unsupported schema_version " + value);
            continue;
        }
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError(path + ": unknown condition key `" + key + "`");
        c.*(it->second) = parse_number(value, path + ": " + key);
    }
    for (const char* required : {"T_b", "T_u", "T_c", "p_wc", "T_0"})
        if (!kv.has(required)) throw ConfigError(path + ": missing condition key `" + std::string(required) + "`");
    return c;
}

} // namespace lyo
