#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lyo/csv.hpp"
#include "lyo/ode.hpp"
#include "lyo/physics.hpp"

namespace lyo {

/// Temperature and bound-water fields co-located on z in [0, H]; z = 0 is the
/// top (radiation) surface, z = H the bottom (shelf) surface.
struct SecondaryState {
    std::vector<double> T;   ///< K
    std::vector<double> c_w; ///< wt/wt
};

struct SecondaryTrajectory {
    std::vector<double> times; ///< s
    std::vector<SecondaryState> states;
    std::vector<double> average_concentration; ///< wt/wt, trapezoidal in z

    size_t size() const { return times.size(); }
};

/// Trapezoidal spatial average of a uniformly gridded field.
inline double average_bound_water(std::span<const double> c_w) {
    if (c_w.empty()) throw ConfigError("average_bound_water: empty field");
    if (c_w.size() == 1) return c_w[0];
    double acc = 0.5 * (c_w.front() + c_w.back());
    for (size_t i = 1; i + 1 < c_w.size(); ++i) acc += c_w[i];
    return acc / static_cast<double>(c_w.size() - 1);
}

inline double average_bound_water(const SecondaryState& s) { return average_bound_water(s.c_w); }

/// Fixed-domain method-of-lines system, dimension 2N with states interleaved
/// as [T_0, c_0, T_1, c_1, ...] to keep the Jacobian banded. The desorption
/// heat source substitutes dc/dt = k_d(T) (cw_eq - c) directly.
inline OdeSystem build_secondary_system(const ModelParameters& p, const ProcessConditions& c, int N) {
    if (N < 3) throw ConfigError("build_secondary_system: need at least 3 nodes");
    validated(p, c);

    const double dz = p.H / (N - 1);
    const double tc4 = c.T_c * c.T_c * c.T_c * c.T_c;
    const double tu4 = c.T_u * c.T_u * c.T_u * c.T_u;
    const double inv_rhocp = 1.0 / (p.rho_e * p.cp_e);

    OdeSystem sys;
    sys.dimension = 2 * N;
    sys.time_dependent = false;
    sys.jacobian = JacobianStructure{2, 2, {}};
    sys.rhs = [=](double /*t*/, std::span<const double> y, std::span<double> dydt) {
        const double t0 = y[0];
        const double t0_4 = t0 * t0 * t0 * t0;
        const double ghost_lo = y[2] + 2.0 * dz * p.sigma_sb * p.F2 * (tu4 - t0_4) / p.k_e;
        const double tn = y[2 * (N - 1)];
        const double ghost_hi = y[2 * (N - 2)] - 2.0 * dz * p.h * (tn - c.T_b) / p.k_e;

        const double inv_dz2 = 1.0 / (dz * dz);
        for (int i = 0; i < N; ++i) {
            const double ti = y[2 * i];
            const double ci = y[2 * i + 1];
            const double tm = (i == 0) ? ghost_lo : y[2 * (i - 1)];
            const double tp = (i == N - 1) ? ghost_hi : y[2 * (i + 1)];
            const double kd = p.f_a * std::exp(-p.E_a / (p.R_gas * ti));
            const double cdot = kd * (p.cw_eq - ci);
            const double ti4 = ti * ti * ti * ti;
            const double cond = p.k_e * (tp - 2.0 * ti + tm) * inv_dz2;
            const double rad = p.sigma_sb * p.F1 * (tc4 - ti4) / p.d;
            dydt[2 * i] = (cond + p.rho_d * p.dH_des * cdot + rad) * inv_rhocp;
            dydt[2 * i + 1] = cdot;
        }
    };
    return sys;
}

/// Integrates the secondary-drying system from uniform T_0 and cw_0.
inline SecondaryTrajectory simulate_secondary(const ModelParameters& p, const ProcessConditions& c,
                                              int N, double t_end,
                                              std::span<const double> output_grid = {},
                                              const IntegratorOptions& opts = {}) {
    if (!(t_end > c.t_0)) throw ConfigError("simulate_secondary: t_end must exceed t_0");
    OdeSystem sys = build_secondary_system(p, c, N);

    auto snap = std::make_shared<detail::StateSnapshot>();
    auto inner = sys.rhs;
    sys.rhs = [inner, snap](double t, std::span<const double> y, std::span<double> dydt) {
        snap->t = t;
        snap->y.assign(y.begin(), y.end());
        inner(t, y, dydt);
    };

    std::vector<double> y0(2 * N);
    for (int i = 0; i < N; ++i) {
        y0[2 * i] = c.T_0;
        y0[2 * i + 1] = c.cw_0;
    }

    IntegrationResult r;
    try {
        r = integrate(sys, y0, {c.t_0, t_end}, opts, output_grid);
    } catch (const SimulationError& e) {
        std::string ctx = e.what();
        if (!snap->y.empty()) {
            double tmin = snap->y[0], tmax = snap->y[0];
            for (int i = 0; i < N; ++i) {
                tmin = std::min(tmin, snap->y[2 * i]);
                tmax = std::max(tmax, snap->y[2 * i]);
            }
            ctx += " [secondary drying at t = " + format_double(snap->t) + " s, T in [" +
                   format_double(tmin) + ", " + format_double(tmax) + "] K]";
        }
        throw SimulationError(ctx);
    }

    SecondaryTrajectory traj;
    traj.times = r.times;
    traj.states.reserve(r.states.size());
    for (const auto& y : r.states) {
        SecondaryState st;
        st.T.resize(N);
        st.c_w.resize(N);
        for (int i = 0; i < N; ++i) {
            st.T[i] = y[2 * i];
            st.c_w[i] = std::max(0.0, y[2 * i + 1]); // roundoff floor
        }
        traj.average_concentration.push_back(average_bound_water(st.c_w));
        traj.states.push_back(std::move(st));
    }
    return traj;
}

/// First time the spatial-average concentration crosses the target, linearly
/// interpolated between output nodes; empty when never reached.
inline std::optional<double> secondary_drying_time(const SecondaryTrajectory& traj, double target) {
    if (!(target > 0.0)) throw ConfigError("secondary_drying_time: target must be > 0");
    if (traj.times.empty()) throw ConfigError("secondary_drying_time: empty trajectory");
    if (traj.average_concentration.front() <= target) return traj.times.front();
    for (size_t k = 1; k < traj.size(); ++k) {
        const double a = traj.average_concentration[k - 1];
        const double b = traj.average_concentration[k];
        if (b <= target) {
            const double w = (a - target) / (a - b);
            return traj.times[k - 1] + w * (traj.times[k] - traj.times[k - 1]);
        }
    }
    return std::nullopt;
}

inline void write_secondary_trajectory_csv(const SecondaryTrajectory& traj, const std::string& path) {
    CsvWriter csv(path, {"t_s", "T_top_K", "T_bottom_K", "cw_avg_wt_wt"});
    for (size_t k = 0; k < traj.size(); ++k) {
        csv.row(std::vector<double>{traj.times[k], traj.states[k].T.front(), traj.states[k].T.back(),
                                    traj.average_concentration[k]});
    }
}

inline void write_secondary_field_csv(const SecondaryTrajectory& traj, const std::string& path_T,
                                      const std::string& path_cw) {
    if (traj.states.empty()) throw ConfigError("write_secondary_field_csv: empty trajectory");
    const size_t n = traj.states.front().T.size();
    std::vector<std::string> cols_T{"t_s"}, cols_c{"t_s"};
    for (size_t i = 0; i < n; ++i) {
        const std::string frac = format_double(static_cast<double>(i) / static_cast<double>(n - 1));
        cols_T.push_back("T_z_" + frac + "_K");
        cols_c.push_back("cw_z_" + frac + "_wt_wt");
    }
    CsvWriter csv_T(path_T, cols_T);
    CsvWriter csv_c(path_cw, cols_c);
    std::vector<double> row(n + 1);
    for (size_t k = 0; k < traj.size(); ++k) {
        row[0] = traj.times[k];
        for (size_t i = 0; i < n; ++i) row[i + 1] = traj.states[k].T[i];
        csv_T.row(row);
        row[0] = traj.times[k];
        for (size_t i = 0; i < n; ++i) row[i + 1] = traj.states[k].c_w[i];
        csv_c.row(row);
    }
}

} // namespace lyo
