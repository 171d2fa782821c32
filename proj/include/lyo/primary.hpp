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

/// Fraction of the product height at which sublimation is declared complete;
/// keeps the front-fixing map away from its H - S = 0 singularity.
inline constexpr double kFrontCompletionFraction = 1e-3;

/// Temperature nodes on the normalized frozen-layer coordinate
/// xi = (z - S)/(H - S), xi = 0 at the sublimation interface, xi = 1 at the
/// vial bottom, plus the front position.
struct PrimaryState {
    std::vector<double> theta; ///< K
    double S = 0.0;            ///< m
};

struct PrimaryTrajectory {
    std::vector<double> times;          ///< s
    std::vector<PrimaryState> states;
    std::vector<double> interface_temperature; ///< K, xi = 0 node
    std::vector<double> bottom_temperature;    ///< K, xi = 1 node
    std::vector<double> sublimation_flux;      ///< kg/(m^2 s), clamped
    std::optional<double> drying_end_time;     ///< s, set when the front event fired

    size_t size() const { return times.size(); }
};

/// Assembles the front-fixed method-of-lines system: N temperature nodes on a
/// uniform xi grid plus the front position as state N. Central differences
/// with ghost-node boundary elimination; the sublimation flux is clamped at
/// zero so the front never retreats.
inline OdeSystem build_primary_system(const ModelParameters& p, const ProcessConditions& c, int N) {
    if (N < 3) throw ConfigError("build_primary_system: need at least 3 nodes");
    validated(p, c);

    const double dxi = 1.0 / (N - 1);
    const double alpha = p.k_f / (p.rho_f * p.cp_f);
    const double tc4 = c.T_c * c.T_c * c.T_c * c.T_c;
    const double tu4 = c.T_u * c.T_u * c.T_u * c.T_u;

    OdeSystem sys;
    sys.dimension = N + 1;
    sys.time_dependent = false;
    sys.jacobian = JacobianStructure{1, 1, {0, N}};
    sys.rhs = [=](double /*t*/, std::span<const double> y, std::span<double> dydt) {
        const double S = std::min(std::max(y[N], 0.0), (1.0 - 0.5 * kFrontCompletionFraction) * p.H);
        const double L = p.H - S;
        // Trial stage states can wander; a floored interface temperature
        // keeps the exponential defined (the flux clamp then yields zero).
        const double theta0 = std::max(y[0], 50.0);
        const double Rp = p.R0 + p.R1 * S / (p.R2 + S);
        const double nw_raw = (std::exp(-6139.9 / theta0 + 28.8912) - c.p_wc) / Rp;
        const double nw = std::max(nw_raw, 0.0);
        const double sdot = nw / (p.rho_f - p.rho_e);

        const double th0_4 = theta0 * theta0 * theta0 * theta0;
        const double ghost_lo =
            y[1] - 2.0 * dxi * L * (nw * p.dH_sub - p.sigma_sb * p.F2 * (tu4 - th0_4)) / p.k_f;
        const double thn = y[N - 1];
        const double ghost_hi = y[N - 2] - 2.0 * dxi * L * p.h * (thn - c.T_b) / p.k_f;

        const double inv_dxi2 = 1.0 / (dxi * dxi);
        const double diff_scale = alpha / (L * L);
        const double src_scale = p.sigma_sb * p.F1 * p.H / (p.d * L * p.rho_f * p.cp_f);
        for (int i = 0; i < N; ++i) {
            const double tm = (i == 0) ? ghost_lo : y[i - 1];
            const double tp = (i == N - 1) ? ghost_hi : y[i + 1];
            const double ti = y[i];
            const double d2 = (tp - 2.0 * ti + tm) * inv_dxi2;
            const double d1 = (tp - tm) / (2.0 * dxi);
            const double ti4 = ti * ti * ti * ti;
            const double xi = i * dxi;
            dydt[i] = diff_scale * d2 + src_scale * (tc4 - ti4) + (1.0 - xi) * sdot / L * d1;
        }
        dydt[N] = sdot;
    };
    sys.event = [H = p.H](double /*t*/, std::span<const double> y) {
        return (1.0 - kFrontCompletionFraction) * H - y[y.size() - 1];
    };
    return sys;
}

/// Integrates the primary-drying system from the uniform initial temperature
/// and S = 0, sampling on output_grid when given. Stops early when the front
/// reaches (1 - eps) * H.
inline PrimaryTrajectory simulate_primary(const ModelParameters& p, const ProcessConditions& c,
                                          int N, double t_end,
                                          std::span<const double> output_grid = {},
                                          const IntegratorOptions& opts = {}) {
    if (!(t_end > c.t_0)) throw ConfigError("simulate_primary: t_end must exceed t_0");
    OdeSystem sys = build_primary_system(p, c, N);

    auto snap = std::make_shared<detail::StateSnapshot>();
    auto inner = sys.rhs;
    sys.rhs = [inner, snap](double t, std::span<const double> y, std::span<double> dydt) {
        snap->t = t;
        snap->y.assign(y.begin(), y.end());
        inner(t, y, dydt);
    };

    std::vector<double> y0(N + 1, c.T_0);
    y0[N] = 0.0;

    IntegrationResult r;
    try {
        r = integrate(sys, y0, {c.t_0, t_end}, opts, output_grid);
    } catch (const SimulationError& e) {
        std::string ctx = e.what();
        if (!snap->y.empty()) {
            double tmin = snap->y[0], tmax = snap->y[0];
            for (int i = 0; i < N; ++i) {
                tmin = std::min(tmin, snap->y[i]);
                tmax = std::max(tmax, snap->y[i]);
            }
            ctx += " [primary drying at t = " + format_double(snap->t) +
                   " s, S = " + format_double(snap->y[N]) +
                   " m, T in [" + format_double(tmin) + ", " + format_double(tmax) + "] K]";
        }
        throw SimulationError(ctx);
    }

    PrimaryTrajectory traj;
    traj.times = r.times;
    traj.states.reserve(r.states.size());
    for (const auto& y : r.states) {
        PrimaryState st;
        st.theta.assign(y.begin(), y.begin() + N);
        st.S = y[N];
        traj.interface_temperature.push_back(st.theta.front());
        traj.bottom_temperature.push_back(st.theta.back());
        const double rp = cake_resistance(std::max(st.S, 0.0), p.R0, p.R1, p.R2);
        traj.sublimation_flux.push_back(std::max(0.0, sublimation_flux(st.theta.front(), c.p_wc, rp)));
        traj.states.push_back(std::move(st));
    }
    if (r.termination == Termination::Event) traj.drying_end_time = r.event_time;
    return traj;
}

/// Event time if sublimation completed, empty otherwise.
inline std::optional<double> primary_drying_time(const PrimaryTrajectory& traj) {
    if (traj.times.empty()) throw ConfigError("primary_drying_time: empty trajectory");
    return traj.drying_end_time;
}

inline void write_primary_trajectory_csv(const PrimaryTrajectory& traj, const std::string& path) {
    CsvWriter csv(path, {"t_s", "S_m", "T_interface_K", "T_bottom_K", "N_w_kg_m2_s"});
    for (size_t k = 0; k < traj.size(); ++k) {
        csv.row(std::vector<double>{traj.times[k], traj.states[k].S, traj.interface_temperature[k],
                                    traj.bottom_temperature[k], traj.sublimation_flux[k]});
    }
}

inline void write_primary_field_csv(const PrimaryTrajectory& traj, const std::string& path) {
    if (traj.states.empty()) throw ConfigError("write_primary_field_csv: empty trajectory");
    const size_t n = traj.states.front().theta.size();
    std::vector<std::string> cols{"t_s"};
    for (size_t i = 0; i < n; ++i)
        cols.push_back("T_xi_" + format_double(static_cast<double>(i) / static_cast<double>(n - 1)) + "_K");
    CsvWriter csv(path, cols);
    std::vector<double> row(n + 1);
    for (size_t k = 0; k < traj.size(); ++k) {
        row[0] = traj.times[k];
        for (size_t i = 0; i < n; ++i) row[i + 1] = traj.states[k].theta[i];
        csv.row(row);
    }
}

} // namespace lyo
