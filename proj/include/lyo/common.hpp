#pragma once

#include <stdexcept>
#include <string>

namespace lyo {

/// Configuration / input-file problems (bad key, unparsable value, missing file).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameter-bundle invariant violations, carrying one message per offending field.
class ValidationError : public ConfigError {
public:
    explicit ValidationError(const std::string& msg) : ConfigError(msg) {}
};

/// Time integration broke down (step underflow, non-finite state, step budget).
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Surrogate regression failed (rank-deficient or ill-conditioned design).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A requested design/control target cannot be met within the given bounds.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace lyo
