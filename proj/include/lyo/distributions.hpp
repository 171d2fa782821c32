#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "lyo/common.hpp"
#include "lyo/csv.hpp"
#include "lyo/param_io.hpp"
#include "lyo/rng.hpp"

namespace lyo {

struct Uniform {
    double a, b;
};
struct Gaussian {
    double mu, sigma;
};
/// Beta(alpha, beta) rescaled onto [a, b].
struct Beta {
    double alpha, beta;
    double a = 0.0, b = 1.0;
};
struct Gamma {
    double shape, rate;
};

using Distribution = std::variant<Uniform, Gaussian, Beta, Gamma>;

inline void check_distribution(const Distribution& d) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                if (!(v.a < v.b)) throw ConfigError("Uniform: requires a < b");
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                if (!(v.sigma > 0.0)) throw ConfigError("Gaussian: requires sigma > 0");
            } else if constexpr (std::is_same_v<T, Beta>) {
                if (!(v.alpha > 0.0) || !(v.beta > 0.0)) throw ConfigError("Beta: requires alpha, beta > 0");
                if (!(v.a < v.b)) throw ConfigError("Beta: requires a < b");
            } else {
                if (!(v.shape > 0.0) || !(v.rate > 0.0)) throw ConfigError("Gamma: requires shape, rate > 0");
            }
        },
        d);
}

/// Pinning value for one-at-a-time studies: Gaussian -> mu, Uniform ->
/// midpoint, Beta/Gamma -> mean.
inline double nominal_value(const Distribution& d) {
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) return 0.5 * (v.a + v.b);
            else if constexpr (std::is_same_v<T, Gaussian>) return v.mu;
            else if constexpr (std::is_same_v<T, Beta>)
                return v.a + (v.b - v.a) * v.alpha / (v.alpha + v.beta);
            else return v.shape / v.rate;
        },
        d);
}

/// Map to the standardized variable of the matched polynomial family:
/// Uniform/Beta -> [-1, 1] affinely, Gaussian -> (x - mu)/sigma,
/// Gamma -> rate * x.
inline double standardize(const Distribution& d, double x) {
    return std::visit(
        [x](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) return 2.0 * (x - v.a) / (v.b - v.a) - 1.0;
            else if constexpr (std::is_same_v<T, Gaussian>) return (x - v.mu) / v.sigma;
            else if constexpr (std::is_same_v<T, Beta>) return 2.0 * (x - v.a) / (v.b - v.a) - 1.0;
            else return v.rate * x;
        },
        d);
}

inline bool in_support(const Distribution& d, double x) {
    return std::visit(
        [x](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) return x >= v.a && x <= v.b;
            else if constexpr (std::is_same_v<T, Gaussian>) return std::isfinite(x);
            else if constexpr (std::is_same_v<T, Beta>) return x >= v.a && x <= v.b;
            else return x > 0.0;
        },
        d);
}

namespace detail {
/// Marsaglia-Tsang for shape >= 1; boosted for shape < 1.
inline double sample_gamma_unit_rate(double shape, SplitMix64& g) {
    if (shape < 1.0) {
        const double u = g.uniform01();
        return sample_gamma_unit_rate(shape + 1.0, g) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = g.normal01();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = g.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}
} // namespace detail

inline double sample(const Distribution& d, SplitMix64& g) {
    return std::visit(
        [&g](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return v.a + (v.b - v.a) * g.uniform01();
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                return v.mu + v.sigma * g.normal01();
            } else if constexpr (std::is_same_v<T, Beta>) {
                const double x = detail::sample_gamma_unit_rate(v.alpha, g);
                const double y = detail::sample_gamma_unit_rate(v.beta, g);
                return v.a + (v.b - v.a) * x / (x + y);
            } else {
                return detail::sample_gamma_unit_rate(v.shape, g) / v.rate;
            }
        },
        d);
}

inline std::string distribution_to_string(const Distribution& d) {
    auto num = [](double x) { return format_double(x); };
    return std::visit(
        [&num](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) return "Uniform(" + num(v.a) + ", " + num(v.b) + ")";
            else if constexpr (std::is_same_v<T, Gaussian>)
                return "Gaussian(" + num(v.mu) + ", " + num(v.sigma) + ")";
            else if constexpr (std::is_same_v<T, Beta>)
                return "Beta(" + num(v.alpha) + ", " + num(v.beta) + ", " + num(v.a) + ", " + num(v.b) + ")";
            else return "Gamma(" + num(v.shape) + ", " + num(v.rate) + ")";
        },
        d);
}

/// Parses "Family(arg, ...)" distribution specs used in config files.
inline Distribution parse_distribution(const std::string& text) {
    const std::string t = detail::trim(text);
    auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw ConfigError("distribution spec must look like Family(args): `" + text + "`");
    std::string family = detail::trim(t.substr(0, open));
    for (auto& ch : family) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    std::string inner = t.substr(open + 1, t.size() - open - 2);
    std::vector<double> args;
    size_t pos = 0;
    while (pos <= inner.size()) {
        auto comma = inner.find(',', pos);
        std::string tok = detail::trim(inner.substr(pos, comma == std::string::npos ? std::string::npos
                                                                                    : comma - pos));
        if (!tok.empty()) args.push_back(parse_number(tok, "distribution argument"));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    Distribution d;
    if (family == "uniform" && args.size() == 2) d = Uniform{args[0], args[1]};
    else if (family == "gaussian" && args.size() == 2) d = Gaussian{args[0], args[1]};
    else if (family == "normal" && args.size() == 2) d = Gaussian{args[0], args[1]};
    else if (family == "beta" && args.size() == 2) d = Beta{args[0], args[1]};
    else if (family == "beta" && args.size() == 4) d = Beta{args[0], args[1], args[2], args[3]};
    else if (family == "gamma" && args.size() == 2) d = Gamma{args[0], args[1]};
    else throw ConfigError("unknown distribution spec: `" + text + "`");
    check_distribution(d);
    return d;
}

/// A model parameter with a probability distribution attached. The name must
/// resolve to exactly one numeric field of the parameter bundle.
struct UncertainInput {
    std::string name;
    Distribution distribution;
};

inline void check_inputs(const std::vector<UncertainInput>& inputs, const ParameterBundle& bundle) {
    for (const auto& in : inputs) {
        if (!bundle.has_field(in.name))
            throw ConfigError("uncertain input does not name a parameter field: " + in.name);
        check_distribution(in.distribution);
    }
}

/// n x N_theta sample matrix, row-major. Row i comes from substream (seed, i),
/// so any prefix of the stream is reproducible independently of n.
inline std::vector<double> draw_samples(const std::vector<UncertainInput>& inputs, size_t n,
                                        uint64_t seed) {
    if (n < 1) throw ConfigError("draw_samples: need n >= 1");
    const size_t dim = inputs.size();
    std::vector<double> out(n * dim);
    for (size_t i = 0; i < n; ++i) {
        SplitMix64 g = SplitMix64::substream(seed, i);
        for (size_t j = 0; j < dim; ++j) out[i * dim + j] = sample(inputs[j].distribution, g);
    }
    return out;
}

} // namespace lyo
