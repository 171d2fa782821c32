#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lyo/common.hpp"

namespace lyo {

/// Physical constants, geometry, and transport/kinetic coefficients of the
/// drying models. All values SI; bound water in kg water per kg solid (wt/wt).
///
/// Unit convention for the cake-resistance law R_p(S) = R0 + R1*S/(R2 + S):
/// R0 and R1 carry Pa*m^2*s/kg, which reduces to m/s; R2 carries m. Data
/// sets quoting R1 in 1/s use the saturating form R0 + A1*S/(1 + A2*S); the
/// two agree via R1 = A1/A2, R2 = 1/A2 (and A2 -> 0 maps to a large R2 with
/// R1/R2 fixed). The shipped defaults document the conversion applied.
struct ModelParameters {
    double H;       ///< product height (m)
    double d;       ///< vial inner diameter (m)
    double rho_f;   ///< frozen density (kg/m^3)
    double cp_f;    ///< frozen heat capacity (J/(kg K))
    double k_f;     ///< frozen thermal conductivity (W/(m K))
    double rho_e;   ///< effective dried-region density (kg/m^3)
    double cp_e;    ///< effective dried-region heat capacity (J/(kg K))
    double k_e;     ///< effective dried-region conductivity (W/(m K))
    double rho_d;   ///< dried-region density, solid plus vacuum (kg/m^3)
    double dH_sub;  ///< heat of sublimation (J/kg)
    double dH_des;  ///< heat of desorption (J/kg)
    double F1;      ///< sidewall radiation transfer factor (-)
    double F2;      ///< top radiation transfer factor (-)
    double h;       ///< bottom overall heat-transfer coefficient (W/(m^2 K))
    double R0;      ///< cake-resistance offset (m/s)
    double R1;      ///< cake-resistance saturating amplitude (m/s)
    double R2;      ///< cake-resistance half-saturation depth (m)
    double f_a;     ///< desorption frequency factor (1/s)
    double E_a;     ///< desorption activation energy (J/mol)
    double sigma_sb = 5.670374419e-8; ///< Stefan-Boltzmann constant (W/(m^2 K^4))
    double R_gas = 8.314462618;       ///< gas constant (J/(mol K))
    double cw_eq = 0.0;               ///< equilibrium bound-water concentration (wt/wt)
};

/// Boundary/environment temperatures, chamber humidity, and initial state.
struct ProcessConditions {
    double T_b;   ///< bottom shelf temperature (K)
    double T_u;   ///< upper plate temperature (K)
    double T_c;   ///< chamber wall temperature (K)
    double p_wc;  ///< chamber water partial pressure (Pa)
    double T_0;   ///< initial product temperature (K)
    double cw_0 = 0.0; ///< initial bound-water concentration (wt/wt)
    double t_0 = 0.0;  ///< initial time (s)
};

/// Water saturation pressure over ice (Pa).
inline double saturation_pressure(double T) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw std::domain_error("saturation_pressure: temperature must be finite and > 0 K");
    return std::exp(-6139.9 / T + 28.8912);
}

/// Dried-cake mass-transfer resistance at front depth S (m/s).
inline double cake_resistance(double S, double R0, double R1, double R2) {
    if (!(S >= 0.0)) throw std::domain_error("cake_resistance: front position must be >= 0");
    if (!(R2 > 0.0)) throw std::domain_error("cake_resistance: R2 must be > 0");
    return R0 + R1 * S / (R2 + S);
}

/// Sublimation mass flux (kg/(m^2 s)); signed, negative when the chamber
/// pressure exceeds saturation. The simulators clamp at zero.
inline double sublimation_flux(double T_interface, double p_wc, double R_p) {
    if (!(R_p > 0.0)) throw std::domain_error("sublimation_flux: resistance must be > 0");
    return (saturation_pressure(T_interface) - p_wc) / R_p;
}

/// Radiative sidewall power (W) onto a surface of the given area.
inline double radiative_sidewall_heat(double T, double T_c, double F1, double area,
                                      double sigma_sb = 5.670374419e-8) {
    if (!(T > 0.0) || !(T_c > 0.0))
        throw std::domain_error("radiative_sidewall_heat: temperatures must be > 0 K");
    if (!(area > 0.0)) throw std::domain_error("radiative_sidewall_heat: area must be > 0");
    const double t2 = T * T, c2 = T_c * T_c;
    return sigma_sb * area * F1 * (c2 * c2 - t2 * t2);
}

/// Arrhenius desorption rate constant (1/s).
inline double desorption_rate_constant(double T, double f_a, double E_a,
                                       double R_gas = 8.314462618) {
    if (!(T > 0.0)) throw std::domain_error("desorption_rate_constant: temperature must be > 0 K");
    return f_a * std::exp(-E_a / (R_gas * T));
}

/// Invariant checks. Returns one message per violated constraint, each naming
/// the offending field(s); empty means the bundle is usable.
inline std::vector<std::string> validate(const ModelParameters& p, const ProcessConditions& c) {
    std::vector<std::string> v;
    auto positive = [&v](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x))
            v.push_back(std::string(name) + " must be finite and > 0");
    };
    positive(p.H, "H");
    positive(p.d, "d");
    positive(p.rho_f, "rho_f");
    positive(p.cp_f, "cp_f");
    positive(p.k_f, "k_f");
    positive(p.rho_e, "rho_e");
    positive(p.cp_e, "cp_e");
    positive(p.k_e, "k_e");
    positive(p.rho_d, "rho_d");
    positive(p.sigma_sb, "sigma_sb");
    positive(p.R_gas, "R_gas");
    if (!(p.rho_f > p.rho_e))
        v.push_back("rho_f must exceed rho_e (sublimation-front mass-balance denominator rho_f - rho_e)");
    if (!(p.R0 >= 0.0)) v.push_back("R0 must be >= 0");
    if (!(p.R1 >= 0.0)) v.push_back("R1 must be >= 0");
    if (!(p.R2 > 0.0)) v.push_back("R2 must be > 0 (cake-resistance constants)");
    // Zero is allowed for f_a, F1, F2: it switches the mechanism off, which
    // the disabled-radiation/zero-kinetics reference solutions rely on.
    if (!(p.f_a >= 0.0)) v.push_back("f_a must be >= 0");
    if (!(p.E_a >= 0.0)) v.push_back("E_a must be >= 0");
    if (!(p.F1 >= 0.0 && p.F1 <= 1.0)) v.push_back("F1 must lie in [0, 1]");
    if (!(p.F2 >= 0.0 && p.F2 <= 1.0)) v.push_back("F2 must lie in [0, 1]");
    if (!(p.h >= 0.0)) v.push_back("h must be >= 0");
    if (!(p.cw_eq >= 0.0)) v.push_back("cw_eq must be >= 0");
    if (!(c.T_b > 0.0)) v.push_back("T_b must be > 0 K");
    if (!(c.T_u > 0.0)) v.push_back("T_u must be > 0 K");
    if (!(c.T_c > 0.0)) v.push_back("T_c must be > 0 K");
    if (!(c.T_0 > 0.0)) v.push_back("T_0 must be > 0 K");
    if (!(c.p_wc >= 0.0)) v.push_back("p_wc must be >= 0");
    if (!(c.cw_0 >= 0.0)) v.push_back("cw_0 must be >= 0");
    return v;
}

/// Throwing form of validate(); the returned pair is safe to simulate with.
inline std::pair<ModelParameters, ProcessConditions>
validated(const ModelParameters& p, const ProcessConditions& c) {
    auto violations = validate(p, c);
    if (!violations.empty()) {
        std::string msg = "invalid parameter bundle:";
        for (const auto& m : violations) msg += "\n  - " + m;
        throw ValidationError(msg);
    }
    return {p, c};
}

} // namespace lyo
