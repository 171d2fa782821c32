#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lyo/common.hpp"
#include "lyo/distributions.hpp"
#include "lyo/empirical.hpp"
#include "lyo/parallel.hpp"

namespace lyo {

/// Monte Carlo ensemble: sampled inputs and the per-sample model outputs on a
/// shared output grid.
struct Ensemble {
    size_t n = 0;
    size_t input_dim = 0;
    size_t output_dim = 0;
    std::vector<double> samples; ///< n x input_dim, row-major
    std::vector<double> outputs; ///< n x output_dim, row-major
    uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::vector<std::pair<size_t, std::string>> failures; ///< sample index + reason
};

/// Runs the model at n parameter draws (substream scheme shared with the PCE
/// fitting path, so the first n_pce rows of an MC stream are exactly the PCE
/// fitting samples). Per-sample failures are recorded; more than 1% failing
/// aborts the ensemble.
inline Ensemble run_ensemble(
    const std::function<std::vector<double>(std::span<const double> theta)>& model,
    const std::vector<UncertainInput>& inputs, size_t n, uint64_t seed,
    double failure_tolerance = 0.01) {
    if (n < 1) throw ConfigError("run_ensemble: need n >= 1");
    Ensemble e;
    e.n = n;
    e.input_dim = inputs.size();
    e.seed = seed;
    e.samples = draw_samples(inputs, n, seed);

    const auto t_start = std::chrono::steady_clock::now();
    std::vector<std::vector<double>> rows(n);
    std::mutex failure_mutex;
    parallel_for(n, [&](size_t i) {
        try {
            rows[i] = model(std::span<const double>(e.samples.data() + i * e.input_dim, e.input_dim));
        } catch (const std::exception& ex) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            e.failures.emplace_back(i, ex.what());
        }
    });
    e.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    std::sort(e.failures.begin(), e.failures.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<double>(e.failures.size()) > failure_tolerance * static_cast<double>(n)) {
        std::string msg = "run_ensemble: " + std::to_string(e.failures.size()) + " of " +
                          std::to_string(n) + " samples failed; first: sample " +
                          std::to_string(e.failures.front().first) + ": " + e.failures.front().second;
        throw SimulationError(msg);
    }
    // Failed samples are dropped from the stored matrices; their indices and
    // reasons stay in `failures`.
    size_t width = 0;
    for (const auto& r : rows)
        if (!r.empty()) { width = r.size(); break; }
    if (width == 0) throw SimulationError("run_ensemble: no successful samples");
    e.output_dim = width;
    e.outputs.reserve(n * width);
    std::vector<double> kept_samples;
    kept_samples.reserve(n * e.input_dim);
    size_t kept = 0;
    for (size_t i = 0; i < n; ++i) {
        if (rows[i].empty()) continue;
        if (rows[i].size() != width)
            throw SimulationError("run_ensemble: inconsistent output width across samples");
        e.outputs.insert(e.outputs.end(), rows[i].begin(), rows[i].end());
        kept_samples.insert(kept_samples.end(), e.samples.begin() + i * e.input_dim,
                            e.samples.begin() + (i + 1) * e.input_dim);
        ++kept;
    }
    e.samples = std::move(kept_samples);
    e.n = kept;
    return e;
}

struct EnsembleStatistics {
    std::vector<double> mean;     ///< per output column
    std::vector<double> variance; ///< per output column, unbiased
};

inline EnsembleStatistics ensemble_statistics(const Ensemble& e) {
    if (e.n == 0) throw ConfigError("ensemble_statistics: empty ensemble");
    EnsembleStatistics s;
    s.mean.assign(e.output_dim, 0.0);
    s.variance.assign(e.output_dim, 0.0);
    for (size_t i = 0; i < e.n; ++i)
        for (size_t c = 0; c < e.output_dim; ++c) s.mean[c] += e.outputs[i * e.output_dim + c];
    for (double& m : s.mean) m /= static_cast<double>(e.n);
    if (e.n > 1) {
        for (size_t i = 0; i < e.n; ++i)
            for (size_t c = 0; c < e.output_dim; ++c) {
                const double d = e.outputs[i * e.output_dim + c] - s.mean[c];
                s.variance[c] += d * d;
            }
        for (double& v : s.variance) v /= static_cast<double>(e.n - 1);
    }
    return s;
}

/// Empirical distribution of one output column (same machinery as the PCE
/// resampling path).
inline EmpiricalDistribution ensemble_distribution(const Ensemble& e, size_t column) {
    if (column >= e.output_dim) throw ConfigError("ensemble_distribution: column out of range");
    std::vector<double> vals(e.n);
    for (size_t i = 0; i < e.n; ++i) vals[i] = e.outputs[i * e.output_dim + column];
    return EmpiricalDistribution(std::move(vals));
}

/// KS distance between two empirical distributions.
inline double compare_distributions(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    return ks_distance(a, b);
}

} // namespace lyo
