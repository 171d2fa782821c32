#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyo/common.hpp"
#include "lyo/distributions.hpp"
#include "lyo/empirical.hpp"
#include "lyo/mc.hpp"
#include "lyo/param_io.hpp"
#include "lyo/pce.hpp"
#include "lyo/primary.hpp"
#include "lyo/secondary.hpp"

namespace lyo {

enum class Model { Primary, Secondary };
enum class Method { Pce, Mc, Both };

inline const char* model_name(Model m) { return m == Model::Primary ? "primary" : "secondary"; }
inline const char* method_name(Method m) {
    switch (m) {
        case Method::Pce: return "pce";
        case Method::Mc: return "mc";
        default: return "both";
    }
}

struct StudyConfig {
    Model model = Model::Secondary;
    std::vector<UncertainInput> inputs;
    Method method = Method::Both;
    size_t n_mc = 2000;
    size_t n_pce = 50;
    int order = 2; ///< N_P
    size_t grid_nodes = 200;
    double t_end = 0.0; ///< horizon (s)
    uint64_t seed = 0;
    int nodes = 40; ///< spatial discretization
    size_t n_resample = 100000;
    double ci_level = 0.95;
    // Design / control targets.
    double target_time = 0.0;            ///< B1: required drying time (s)
    double probability_level = 0.95;     ///< chance-constraint level
    double concentration_target = 0.01;  ///< wt/wt
    double Tb_min = 0.0, Tb_max = 0.0;   ///< shelf-temperature bounds (K)
    IntegratorOptions integrator;
};

inline void check_study_config(const StudyConfig& c) {
    if (c.inputs.empty()) throw ConfigError("study: no uncertain inputs configured");
    if (!(c.t_end > 0.0)) throw ConfigError("study: t_end must be > 0");
    if (c.grid_nodes < 2) throw ConfigError("study: need at least 2 output grid nodes");
    if (!(c.probability_level >= 0.0 && c.probability_level < 1.0))
        throw ConfigError("study: probability level must lie in [0, 1)");
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0))
        throw ConfigError("study: ci level must lie in (0, 1)");
    const size_t L = multi_index_count(static_cast<int>(c.inputs.size()), c.order);
    if (c.n_pce < 2 * L)
        throw ConfigError("study: n_pce = " + std::to_string(c.n_pce) +
                          " is below the 2L guard (L = " + std::to_string(L) + ")");
    if (c.n_resample < 1000) throw ConfigError("study: n_resample must be >= 1000");
}

/// Seed salt separating surrogate resampling draws from the model sample
/// stream.
inline constexpr uint64_t kResampleSeedSalt = 0xA511E9B3CB1E1981ULL;

namespace detail {

/// Holds trajectory values on the shared output grid; samples that terminate
/// early (front-completion event) hold their final values afterwards.
inline std::vector<double> onto_grid(const std::vector<double>& traj_t,
                                     const std::vector<double>& traj_v,
                                     const std::vector<double>& grid) {
    std::vector<double> out(grid.size());
    size_t j = 0;
    for (size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k] * (1.0 + 1e-12) + 1e-12;
        while (j + 1 < traj_t.size() && traj_t[j + 1] <= t) ++j;
        out[k] = traj_v[j];
    }
    return out;
}

inline double interpolated_quantile(std::vector<double>& scratch, double q) {
    const size_t n = scratch.size();
    const double pos = q * static_cast<double>(n - 1);
    const size_t lo = static_cast<size_t>(pos);
    std::nth_element(scratch.begin(), scratch.begin() + lo, scratch.end());
    const double vlo = scratch[lo];
    if (lo + 1 >= n) return vlo;
    const double vhi = *std::min_element(scratch.begin() + lo + 1, scratch.end());
    return vlo + (pos - static_cast<double>(lo)) * (vhi - vlo);
}

} // namespace detail

/// Simulation wrapped as a black-box map from sampled parameters to output
/// columns on a fixed time grid (column layout: q * grid_nodes + k for output
/// q at grid node k).
struct GridModel {
    std::vector<double> grid;
    std::vector<std::string> output_names;
    std::function<std::vector<double>(std::span<const double>)> fn;

    size_t columns() const { return output_names.size() * grid.size(); }
    size_t column_of(size_t output, size_t node) const { return output * grid.size() + node; }
    size_t final_column(size_t output) const { return column_of(output, grid.size() - 1); }
};

inline std::vector<double> linspace(double a, double b, size_t n) {
    std::vector<double> g(n);
    for (size_t k = 0; k < n; ++k)
        g[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    return g;
}

/// Product temperature is the sublimation-interface node for primary drying
/// and the bottom (shelf-side) node for secondary drying.
inline GridModel make_grid_model(const ParameterBundle& bundle, const StudyConfig& cfg) {
    GridModel m;
    m.grid = linspace(bundle.conditions.t_0, cfg.t_end, cfg.grid_nodes);
    m.output_names = cfg.model == Model::Primary
                         ? std::vector<std::string>{"temperature", "front"}
                         : std::vector<std::string>{"temperature", "bound_water"};
    const auto inputs = cfg.inputs;
    const auto base = bundle;
    const auto grid = m.grid;
    const int nodes = cfg.nodes;
    const double t_end = cfg.t_end;
    const auto opts = cfg.integrator;
    const Model model = cfg.model;
    m.fn = [=](std::span<const double> theta) -> std::vector<double> {
        ParameterBundle b = base;
        for (size_t j = 0; j < inputs.size(); ++j) b.set_field(inputs[j].name, theta[j]);
        validated(b.params, b.conditions);
        std::vector<double> out;
        out.reserve(2 * grid.size());
        if (model == Model::Primary) {
            PrimaryTrajectory traj = simulate_primary(b.params, b.conditions, nodes, t_end, grid, opts);
            std::vector<double> s_series(traj.size());
            for (size_t k = 0; k < traj.size(); ++k) s_series[k] = traj.states[k].S;
            auto tt = detail::onto_grid(traj.times, traj.interface_temperature, grid);
            auto ss = detail::onto_grid(traj.times, s_series, grid);
            out.insert(out.end(), tt.begin(), tt.end());
            out.insert(out.end(), ss.begin(), ss.end());
        } else {
            SecondaryTrajectory traj =
                simulate_secondary(b.params, b.conditions, nodes, t_end, grid, opts);
            std::vector<double> bt(traj.size());
            for (size_t k = 0; k < traj.size(); ++k) bt[k] = traj.states[k].T.back();
            auto tt = detail::onto_grid(traj.times, bt, grid);
            auto cc = detail::onto_grid(traj.times, traj.average_concentration, grid);
            out.insert(out.end(), tt.begin(), tt.end());
            out.insert(out.end(), cc.begin(), cc.end());
        }
        return out;
    };
    return m;
}

struct TimeSeriesBand {
    std::vector<double> mean, lo, hi;
};

struct UqOutputResult {
    std::string name;
    std::optional<TimeSeriesBand> pce_band, mc_band;
    std::optional<EmpiricalDistribution> pce_final, mc_final;
    std::optional<double> ks_final;
};

struct UqStudyResult {
    std::vector<double> grid;
    std::vector<UqOutputResult> outputs;
    std::optional<PceSurrogate> surrogate;
    std::optional<Ensemble> ensemble; ///< the MC ensemble, when that route ran
    std::vector<std::string> input_names;
    size_t pce_runs = 0, mc_runs = 0;
    size_t pce_failures = 0, mc_failures = 0;
    double pce_seconds = 0.0, mc_seconds = 0.0; ///< quarantined from data outputs
};

namespace detail {

/// Mean +/- z*sigma per time node from the PCE coefficients (standard PCE
/// post-processing; no trajectory resampling).
inline TimeSeriesBand pce_band_from_moments(const std::vector<Moments>& moments, size_t output,
                                            size_t grid_nodes, double level) {
    TimeSeriesBand band;
    const double z = inverse_normal_cdf(0.5 * (1.0 + level));
    for (size_t k = 0; k < grid_nodes; ++k) {
        const size_t col = output * grid_nodes + k;
        const double sd = std::sqrt(std::max(0.0, moments[col].variance));
        band.mean.push_back(moments[col].mean);
        band.lo.push_back(moments[col].mean - z * sd);
        band.hi.push_back(moments[col].mean + z * sd);
    }
    return band;
}

inline TimeSeriesBand mc_band_from_ensemble(const Ensemble& e, size_t output, size_t grid_nodes,
                                            double level) {
    TimeSeriesBand band;
    const double tail = 0.5 * (1.0 - level);
    std::vector<double> scratch(e.n);
    for (size_t k = 0; k < grid_nodes; ++k) {
        const size_t col = output * grid_nodes + k;
        double mean = 0.0;
        for (size_t i = 0; i < e.n; ++i) {
            scratch[i] = e.outputs[i * e.output_dim + col];
            mean += scratch[i];
        }
        band.mean.push_back(mean / static_cast<double>(e.n));
        std::vector<double> tmp = scratch;
        band.lo.push_back(interpolated_quantile(tmp, tail));
        tmp = scratch;
        band.hi.push_back(interpolated_quantile(tmp, 1.0 - tail));
    }
    return band;
}

} // namespace detail

/// Time-resolved uncertainty quantification (Cases A1/A2): PCE fits one
/// coefficient column per output per grid node from n_pce model runs; MC runs
/// the full ensemble. With both methods the final-time distributions are also
/// compared by KS distance.
inline UqStudyResult run_uq_study(const ParameterBundle& bundle, const StudyConfig& cfg) {
    check_study_config(cfg);
    check_inputs(cfg.inputs, bundle);
    GridModel model = make_grid_model(bundle, cfg);

    UqStudyResult res;
    res.grid = model.grid;
    for (const auto& name : model.output_names) {
        UqOutputResult o;
        o.name = name;
        res.outputs.push_back(std::move(o));
    }

    const bool want_pce = cfg.method != Method::Mc;
    const bool want_mc = cfg.method != Method::Pce;

    if (want_pce) {
        const auto t0 = std::chrono::steady_clock::now();
        Ensemble fit_runs = run_ensemble(model.fn, cfg.inputs, cfg.n_pce, cfg.seed);
        std::vector<std::string> names;
        for (size_t q = 0; q < model.output_names.size(); ++q)
            for (size_t k = 0; k < model.grid.size(); ++k)
                names.push_back(model.output_names[q] + "@" + format_double(model.grid[k]));
        PceSurrogate s = fit_surrogate(cfg.inputs, fit_runs.samples, fit_runs.outputs, cfg.order,
                                       std::move(names));
        const auto moments = surrogate_moments(s);
        // Final-time distributions come from resampling the surrogate; the
        // time-resolved bands come from the coefficient moments.
        Eigen::MatrixXd psi = resample_basis(s, cfg.n_resample, cfg.seed ^ kResampleSeedSalt);
        for (size_t q = 0; q < model.output_names.size(); ++q) {
            res.outputs[q].pce_band =
                detail::pce_band_from_moments(moments, q, model.grid.size(), cfg.ci_level);
            Eigen::VectorXd final_vals =
                psi * s.coefficients().col(static_cast<Eigen::Index>(model.final_column(q)));
            res.outputs[q].pce_final = EmpiricalDistribution(
                std::vector<double>(final_vals.data(), final_vals.data() + final_vals.size()));
        }
        res.surrogate = std::move(s);
        res.pce_runs = cfg.n_pce;
        res.pce_failures = fit_runs.failures.size();
        res.pce_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (want_mc) {
        const auto t0 = std::chrono::steady_clock::now();
        Ensemble e = run_ensemble(model.fn, cfg.inputs, cfg.n_mc, cfg.seed);
        for (size_t q = 0; q < model.output_names.size(); ++q) {
            res.outputs[q].mc_band =
                detail::mc_band_from_ensemble(e, q, model.grid.size(), cfg.ci_level);
            res.outputs[q].mc_final = ensemble_distribution(e, model.final_column(q));
        }
        res.mc_runs = e.n;
        res.mc_failures = e.failures.size();
        res.mc_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.ensemble = std::move(e);
    }
    if (want_pce && want_mc) {
        for (auto& o : res.outputs) o.ks_final = ks_distance(*o.pce_final, *o.mc_final);
    }
    return res;
}

/// Pins every input except `which_input` at its nominal value (Gaussian ->
/// mean, Uniform -> midpoint) and reruns the UQ study with the single
/// remaining uncertain input.
inline UqStudyResult one_at_a_time_study(const ParameterBundle& bundle, const StudyConfig& cfg,
                                         const std::string& which_input) {
    check_inputs(cfg.inputs, bundle);
    ParameterBundle pinned = bundle;
    StudyConfig sub = cfg;
    sub.inputs.clear();
    bool found = false;
    for (const auto& in : cfg.inputs) {
        if (in.name == which_input) {
            sub.inputs.push_back(in);
            found = true;
        } else {
            pinned.set_field(in.name, nominal_value(in.distribution));
        }
    }
    if (!found) throw ConfigError("one_at_a_time_study: unknown input name: " + which_input);
    return run_uq_study(pinned, sub);
}

/// Probability estimate plus the distribution it came from.
struct ChanceResult {
    double probability = 0.0;
    std::optional<EmpiricalDistribution> distribution;
    Method method = Method::Pce;
    std::map<std::string, double> decision; ///< decision variables
};

struct ScanPoint {
    double T_b;
    double probability;
};

struct DesignResult {
    double T_b = 0.0; ///< minimal shelf temperature meeting the target
    ChanceResult chance;
    std::vector<ScanPoint> scan;
};

namespace detail {

/// P(cw_avg(t_target) <= target) at a given shelf temperature, evaluated on
/// the PCE surrogate distribution or the MC ensemble.
inline std::pair<double, EmpiricalDistribution>
final_concentration_probability(const ParameterBundle& bundle, const StudyConfig& cfg, double T_b) {
    ParameterBundle b = bundle;
    b.conditions.T_b = T_b;
    StudyConfig sub = cfg;
    sub.t_end = cfg.target_time;
    sub.grid_nodes = 2; // only the final value enters the chance constraint
    GridModel model = make_grid_model(b, sub);
    const size_t final_col = model.final_column(1); // bound_water
    if (cfg.method == Method::Mc) {
        Ensemble e = run_ensemble(model.fn, sub.inputs, sub.n_mc, sub.seed);
        EmpiricalDistribution dist = ensemble_distribution(e, final_col);
        return {chance_probability(dist, cfg.concentration_target), std::move(dist)};
    }
    Ensemble fit_runs = run_ensemble(model.fn, sub.inputs, sub.n_pce, sub.seed);
    PceSurrogate s = fit_surrogate(sub.inputs, fit_runs.samples, fit_runs.outputs, sub.order);
    PceSurrogate final_s = s.select_columns({static_cast<Eigen::Index>(final_col)});
    auto dists = surrogate_distribution(final_s, sub.n_resample, sub.seed ^ kResampleSeedSalt);
    return {chance_probability(dists[0], cfg.concentration_target), std::move(dists[0])};
}

inline void require_monotone_scan(const std::vector<ScanPoint>& scan, double slack,
                                  const char* what) {
    for (size_t k = 1; k < scan.size(); ++k) {
        if (scan[k].probability < scan[k - 1].probability - slack) {
            std::string msg = std::string("monotonicity check failed for ") + what + ":";
            for (const auto& p : scan)
                msg += " (" + format_double(p.T_b) + " K -> " + format_double(p.probability) + ")";
            throw SimulationError(msg);
        }
    }
}

} // namespace detail

/// Case B1: minimum shelf temperature whose probability of meeting the
/// concentration target at the target time reaches the required level.
/// Monotonicity of the probability in T_b is verified on a coarse scan, then
/// the root is located by bisection to 0.1 K.
inline DesignResult design_min_shelf_temperature(const ParameterBundle& bundle,
                                                 const StudyConfig& cfg, size_t scan_points = 5,
                                                 double tb_tolerance = 0.1) {
    check_study_config(cfg);
    check_inputs(cfg.inputs, bundle);
    if (!(cfg.Tb_min < cfg.Tb_max)) throw ConfigError("design: shelf-temperature bounds must be ordered");
    if (!(cfg.target_time > 0.0)) throw ConfigError("design: target time must be > 0");

    DesignResult res;
    auto prob_at = [&](double tb) {
        return detail::final_concentration_probability(bundle, cfg, tb);
    };

    const auto grid = linspace(cfg.Tb_min, cfg.Tb_max, scan_points);
    std::optional<EmpiricalDistribution> lo_dist, hi_dist;
    for (double tb : grid) {
        auto [p, dist] = prob_at(tb);
        res.scan.push_back({tb, p});
        if (tb == grid.front()) lo_dist = std::move(dist);
        if (tb == grid.back()) hi_dist = std::move(dist);
    }
    const size_t n_eff = cfg.method == Method::Mc ? cfg.n_mc : cfg.n_resample;
    const double slack = 2.0 / std::sqrt(static_cast<double>(n_eff));
    detail::require_monotone_scan(res.scan, slack, "P(final concentration <= target) vs T_b");

    const double p_lo = res.scan.front().probability;
    const double p_hi = res.scan.back().probability;
    if (cfg.probability_level <= p_lo) {
        // Already feasible at the lower bound; it is the trivial minimum.
        res.T_b = cfg.Tb_min;
        res.chance.probability = p_lo;
        res.chance.distribution = std::move(lo_dist);
    } else if (p_hi < cfg.probability_level) {
        throw InfeasibleError(
            "design: probability target " + format_double(cfg.probability_level) +
            " unreachable within bounds: P(" + format_double(cfg.Tb_min) + " K) = " +
            format_double(p_lo) + ", P(" + format_double(cfg.Tb_max) + " K) = " + format_double(p_hi));
    } else {
        double lo = cfg.Tb_min, hi = cfg.Tb_max;
        double p_at_hi = p_hi;
        std::optional<EmpiricalDistribution> dist_at_hi = std::move(hi_dist);
        while (hi - lo > tb_tolerance) {
            const double mid = 0.5 * (lo + hi);
            auto [p, dist] = prob_at(mid);
            if (p >= cfg.probability_level) {
                hi = mid;
                p_at_hi = p;
                dist_at_hi = std::move(dist);
            } else {
                lo = mid;
            }
        }
        res.T_b = hi;
        res.chance.probability = p_at_hi;
        res.chance.distribution = std::move(dist_at_hi);
    }
    res.chance.method = cfg.method;
    res.chance.decision["T_b"] = res.T_b;
    res.chance.decision["target_time"] = cfg.target_time;
    return res;
}

struct OptimizeResult {
    double t_f = 0.0; ///< minimal drying time (s)
    double T_b = 0.0; ///< selected shelf temperature (K)
    ChanceResult chance;
    std::vector<ScanPoint> scan; ///< P(cw(t_end) <= target) across the T_b scan
};

namespace detail {

/// P(cw_avg(t) <= target) as a function of t, backed by either the
/// time-resolved surrogate resample or the MC ensemble; linear interpolation
/// of each sample trajectory between grid nodes keeps the map continuous and
/// monotone.
class ProbabilityOverTime {
public:
    ProbabilityOverTime(const ParameterBundle& bundle, const StudyConfig& cfg, double T_b) {
        ParameterBundle b = bundle;
        b.conditions.T_b = T_b;
        GridModel model = make_grid_model(b, cfg);
        grid_ = model.grid;
        target_ = cfg.concentration_target;
        const size_t g = grid_.size();
        if (cfg.method == Method::Mc) {
            Ensemble e = run_ensemble(model.fn, cfg.inputs, cfg.n_mc, cfg.seed);
            n_ = e.n;
            values_ = Eigen::MatrixXd(static_cast<Eigen::Index>(e.n), static_cast<Eigen::Index>(g));
            for (size_t i = 0; i < e.n; ++i)
                for (size_t k = 0; k < g; ++k)
                    values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                        e.outputs[i * e.output_dim + model.column_of(1, k)];
        } else {
            // Keep the resample basis and the concentration coefficients; the
            // per-node sample values are reconstructed column-wise on demand
            // (materializing all n_resample x grid values would be wasteful).
            Ensemble fit_runs = run_ensemble(model.fn, cfg.inputs, cfg.n_pce, cfg.seed);
            PceSurrogate s =
                fit_surrogate(cfg.inputs, fit_runs.samples, fit_runs.outputs, cfg.order);
            std::vector<Eigen::Index> cw_cols;
            for (size_t k = 0; k < g; ++k)
                cw_cols.push_back(static_cast<Eigen::Index>(model.column_of(1, k)));
            coeff_ = s.coefficients()(Eigen::all, cw_cols);
            psi_ = resample_basis(s, cfg.n_resample, cfg.seed ^ kResampleSeedSalt);
            n_ = cfg.n_resample;
        }
    }

    double operator()(double t) const {
        if (t <= grid_.front()) return column_probability(0);
        if (t >= grid_.back()) return column_probability(grid_.size() - 1);
        size_t k = 1;
        while (grid_[k] < t) ++k;
        const double w = (t - grid_[k - 1]) / (grid_[k] - grid_[k - 1]);
        Eigen::VectorXd a = column_values(k - 1), b = column_values(k);
        size_t count = 0;
        for (Eigen::Index i = 0; i < a.size(); ++i)
            if (a(i) * (1.0 - w) + b(i) * w <= target_) ++count;
        return static_cast<double>(count) / static_cast<double>(n_);
    }

    EmpiricalDistribution distribution_at(double t) const {
        Eigen::VectorXd v;
        if (t >= grid_.back()) {
            v = column_values(grid_.size() - 1);
        } else {
            size_t k = 1;
            while (grid_[k] < t) ++k;
            const double w = std::clamp((t - grid_[k - 1]) / (grid_[k] - grid_[k - 1]), 0.0, 1.0);
            v = (1.0 - w) * column_values(k - 1) + w * column_values(k);
        }
        return EmpiricalDistribution(std::vector<double>(v.data(), v.data() + v.size()));
    }

    double final_probability() const { return column_probability(grid_.size() - 1); }
    double start_time() const { return grid_.front(); }
    double end_time() const { return grid_.back(); }

private:
    Eigen::VectorXd column_values(size_t k) const {
        if (values_.size() > 0) return values_.col(static_cast<Eigen::Index>(k));
        return psi_ * coeff_.col(static_cast<Eigen::Index>(k));
    }

    double column_probability(size_t k) const {
        Eigen::VectorXd v = column_values(k);
        size_t count = 0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (v(i) <= target_) ++count;
        return static_cast<double>(count) / static_cast<double>(n_);
    }

    std::vector<double> grid_;
    Eigen::MatrixXd values_; ///< MC route: one row per sample, one column per node
    Eigen::MatrixXd psi_;    ///< PCE route: resample basis
    Eigen::MatrixXd coeff_;  ///< PCE route: concentration coefficient columns
    double target_ = 0.0;
    size_t n_ = 0;
};

} // namespace detail

/// Case B2: minimize total drying time subject to the chance constraint, with
/// a constant shelf temperature as the single decision variable. A coarse
/// scan verifies that the probability at the horizon is non-decreasing in
/// T_b (so the optimal shelf temperature sits at the upper bound), then the
/// drying time is found by bisection on the monotone map t -> P(cw(t) <=
/// target).
inline OptimizeResult minimize_drying_time(const ParameterBundle& bundle, const StudyConfig& cfg,
                                           size_t scan_points = 5, double time_tolerance = 36.0) {
    check_study_config(cfg);
    check_inputs(cfg.inputs, bundle);
    if (!(cfg.Tb_min < cfg.Tb_max)) throw ConfigError("optimize: shelf-temperature bounds must be ordered");

    OptimizeResult res;
    const auto tb_grid = linspace(cfg.Tb_min, cfg.Tb_max, scan_points);
    std::optional<detail::ProbabilityOverTime> best;
    for (double tb : tb_grid) {
        detail::ProbabilityOverTime p(bundle, cfg, tb);
        res.scan.push_back({tb, p.final_probability()});
        if (tb == tb_grid.back()) best.emplace(std::move(p));
    }
    const size_t n_eff = cfg.method == Method::Mc ? cfg.n_mc : cfg.n_resample;
    const double slack = 2.0 / std::sqrt(static_cast<double>(n_eff));
    detail::require_monotone_scan(res.scan, slack, "P(concentration target met by horizon) vs T_b");

    res.T_b = cfg.Tb_max;
    const auto& pmap = *best;
    if (pmap.final_probability() < cfg.probability_level)
        throw InfeasibleError("optimize: chance constraint unreachable by the horizon: P(t_end) = " +
                              format_double(pmap.final_probability()) + " at T_b = " +
                              format_double(res.T_b) + " K");
    if (pmap(pmap.start_time()) >= cfg.probability_level) {
        res.t_f = pmap.start_time();
    } else {
        double lo = pmap.start_time(), hi = pmap.end_time();
        while (hi - lo > time_tolerance) {
            const double mid = 0.5 * (lo + hi);
            if (pmap(mid) >= cfg.probability_level) hi = mid;
            else lo = mid;
        }
        res.t_f = hi;
    }
    res.chance.probability = pmap(res.t_f);
    res.chance.distribution = pmap.distribution_at(res.t_f);
    res.chance.method = cfg.method;
    res.chance.decision["t_f"] = res.t_f;
    res.chance.decision["T_b"] = res.T_b;
    return res;
}

struct BenchmarkRow {
    std::string case_name;
    double pce_mean_s = 0.0, pce_std_s = 0.0;
    double mc_mean_s = 0.0, mc_std_s = 0.0;
};

/// One benchmarked case: A1/A2 run the UQ study, B1 the design search, B2 the
/// time-optimal control search (matched by name).
struct BenchmarkCase {
    std::string name;
    ParameterBundle bundle;
    StudyConfig config;
};

/// Wall-clock comparison of the PCE and MC routes, mean +/- sample standard
/// deviation over `reps` repetitions of each case.
inline std::vector<BenchmarkRow> benchmark_methods(const std::vector<BenchmarkCase>& cases,
                                                   size_t reps = 10) {
    auto timed = [](const std::function<void()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    auto mean_std = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        const double sd = v.size() > 1 ? std::sqrt(s2 / static_cast<double>(v.size() - 1)) : 0.0;
        return std::make_pair(m, sd);
    };

    std::vector<BenchmarkRow> table;
    for (const auto& bc : cases) {
        BenchmarkRow row;
        row.case_name = bc.name;
        std::vector<double> pce_times, mc_times;
        for (size_t r = 0; r < reps; ++r) {
            for (Method method : {Method::Pce, Method::Mc}) {
                StudyConfig c = bc.config;
                c.method = method;
                double secs = 0.0;
                if (bc.name == "B1") {
                    secs = timed([&] { design_min_shelf_temperature(bc.bundle, c); });
                } else if (bc.name == "B2") {
                    secs = timed([&] { minimize_drying_time(bc.bundle, c); });
                } else {
                    secs = timed([&] { run_uq_study(bc.bundle, c); });
                }
                (method == Method::Pce ? pce_times : mc_times).push_back(secs);
            }
        }
        std::tie(row.pce_mean_s, row.pce_std_s) = mean_std(pce_times);
        std::tie(row.mc_mean_s, row.mc_std_s) = mean_std(mc_times);
        table.push_back(std::move(row));
    }
    return table;
}

} // namespace lyo
