#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "lyo/common.hpp"

namespace lyo {

struct Histogram {
    std::vector<double> edges;  ///< nbins + 1
    std::vector<double> counts; ///< per bin
    std::vector<double> density;
};

/// Sorted-sample view of an empirical distribution: quantiles, CDF,
/// confidence intervals, and a Freedman-Diaconis histogram. Probabilities are
/// always computed from the CDF, never from histogram bins.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> samples) : s_(std::move(samples)) {
        if (s_.empty()) throw ConfigError("EmpiricalDistribution: no samples");
        std::sort(s_.begin(), s_.end());
    }

    size_t size() const { return s_.size(); }
    const std::vector<double>& sorted_samples() const { return s_; }
    double min() const { return s_.front(); }
    double max() const { return s_.back(); }

    double mean() const {
        double acc = 0.0;
        for (double v : s_) acc += v;
        return acc / static_cast<double>(s_.size());
    }

    double variance() const {
        const double m = mean();
        double acc = 0.0;
        for (double v : s_) acc += (v - m) * (v - m);
        return s_.size() > 1 ? acc / static_cast<double>(s_.size() - 1) : 0.0;
    }

    /// Linear interpolation of order statistics (position q*(n-1)).
    double quantile(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile: level must be in [0, 1]");
        const double pos = q * static_cast<double>(s_.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        if (lo + 1 >= s_.size()) return s_.back();
        const double w = pos - static_cast<double>(lo);
        return s_[lo] + w * (s_[lo + 1] - s_[lo]);
    }

    /// Equal-tail interval at the given coverage level.
    std::pair<double, double> confidence_interval(double level) const {
        if (!(level > 0.0 && level < 1.0))
            throw ConfigError("confidence_interval: level must be in (0, 1)");
        const double tail = 0.5 * (1.0 - level);
        return {quantile(tail), quantile(1.0 - tail)};
    }

    /// P(X <= x).
    double cdf(double x) const {
        auto it = std::upper_bound(s_.begin(), s_.end(), x);
        return static_cast<double>(it - s_.begin()) / static_cast<double>(s_.size());
    }

    Histogram histogram(size_t max_bins = 1000) const {
        Histogram h;
        const double lo = s_.front(), hi = s_.back();
        const double iqr = quantile(0.75) - quantile(0.25);
        const double n = static_cast<double>(s_.size());
        double width = 2.0 * iqr / std::cbrt(n);
        size_t nbins = 1;
        if (width > 0.0 && hi > lo)
            nbins = std::min<size_t>(max_bins, static_cast<size_t>(std::ceil((hi - lo) / width)));
        if (hi <= lo) nbins = 1;
        const double span = hi > lo ? hi - lo : 1.0;
        h.edges.resize(nbins + 1);
        for (size_t k = 0; k <= nbins; ++k)
            h.edges[k] = lo + span * static_cast<double>(k) / static_cast<double>(nbins);
        h.counts.assign(nbins, 0.0);
        for (double v : s_) {
            size_t bin = hi > lo ? static_cast<size_t>((v - lo) / span * static_cast<double>(nbins)) : 0;
            if (bin >= nbins) bin = nbins - 1;
            h.counts[bin] += 1.0;
        }
        h.density.resize(nbins);
        const double bw = span / static_cast<double>(nbins);
        for (size_t k = 0; k < nbins; ++k) h.density[k] = h.counts[k] / (n * bw);
        return h;
    }

private:
    std::vector<double> s_;
};

/// Two-sample Kolmogorov-Smirnov distance: sup |F_a - F_b|.
inline double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& x = a.sorted_samples();
    const auto& y = b.sorted_samples();
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    // One side exhausted: the remaining gap is monotone toward equality at 1.
    if (i < x.size()) d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    if (j < y.size()) d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    return d;
}

/// P(X <= threshold) from the empirical CDF.
inline double chance_probability(const EmpiricalDistribution& dist, double threshold) {
    return dist.cdf(threshold);
}

} // namespace lyo
