#pragma once

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lyo/common.hpp"
#include "lyo/distributions.hpp"

namespace lyo {

/// Polynomial family matched to an input distribution (Legendre-Uniform,
/// probabilists' Hermite-Gaussian, Jacobi-Beta, generalized Laguerre-Gamma).
enum class PolyFamily { Legendre, Hermite, Jacobi, Laguerre };

inline PolyFamily family_for(const Distribution& d) {
    if (std::holds_alternative<Uniform>(d)) return PolyFamily::Legendre;
    if (std::holds_alternative<Gaussian>(d)) return PolyFamily::Hermite;
    if (std::holds_alternative<Beta>(d)) return PolyFamily::Jacobi;
    return PolyFamily::Laguerre;
}

inline const char* family_name(PolyFamily f) {
    switch (f) {
        case PolyFamily::Legendre: return "Legendre";
        case PolyFamily::Hermite: return "Hermite";
        case PolyFamily::Jacobi: return "Jacobi";
        case PolyFamily::Laguerre: return "Laguerre";
    }
    return "?";
}

/// Univariate orthogonal basis for one standardized input. Evaluation by the
/// family's three-term recurrence; squared norms from closed forms under the
/// standardized probability weight (psi_0 = 1 with norm 1).
class UnivariateBasis {
public:
    explicit UnivariateBasis(const Distribution& d) : family_(family_for(d)) {
        if (const auto* b = std::get_if<Beta>(&d)) {
            jac_a_ = b->beta - 1.0;  // exponent of (1 - x)
            jac_b_ = b->alpha - 1.0; // exponent of (1 + x)
        } else if (const auto* g = std::get_if<Gamma>(&d)) {
            lag_alpha_ = g->shape - 1.0;
        }
    }

    PolyFamily family() const { return family_; }

    /// Values of orders 0..out.size()-1 at the standardized coordinate.
    void eval_all(double xi, std::span<double> out) const {
        const int m = static_cast<int>(out.size());
        if (m == 0) return;
        out[0] = 1.0;
        if (m == 1) return;
        switch (family_) {
            case PolyFamily::Legendre:
                out[1] = xi;
                for (int n = 1; n + 1 < m; ++n)
                    out[n + 1] = ((2.0 * n + 1.0) * xi * out[n] - n * out[n - 1]) / (n + 1.0);
                break;
            case PolyFamily::Hermite:
                out[1] = xi;
                for (int n = 1; n + 1 < m; ++n) out[n + 1] = xi * out[n] - n * out[n - 1];
                break;
            case PolyFamily::Laguerre:
                out[1] = 1.0 + lag_alpha_ - xi;
                for (int n = 1; n + 1 < m; ++n)
                    out[n + 1] = ((2.0 * n + 1.0 + lag_alpha_ - xi) * out[n] -
                                  (n + lag_alpha_) * out[n - 1]) /
                                 (n + 1.0);
                break;
            case PolyFamily::Jacobi: {
                const double a = jac_a_, b = jac_b_;
                out[1] = 0.5 * (a + b + 2.0) * xi + 0.5 * (a - b);
                for (int n = 1; n + 1 < m; ++n) {
                    const double c1 = 2.0 * (n + 1.0) * (n + a + b + 1.0) * (2.0 * n + a + b);
                    const double c2 = (2.0 * n + a + b + 1.0) * (a * a - b * b);
                    const double c3 =
                        (2.0 * n + a + b) * (2.0 * n + a + b + 1.0) * (2.0 * n + a + b + 2.0);
                    const double c4 = 2.0 * (n + a) * (n + b) * (2.0 * n + a + b + 2.0);
                    out[n + 1] = ((c2 + c3 * xi) * out[n] - c4 * out[n - 1]) / c1;
                }
                break;
            }
        }
    }

    double eval(int order, double xi) const {
        if (order < 0) throw ConfigError("polynomial order must be >= 0");
        std::vector<double> buf(order + 1);
        eval_all(xi, buf);
        return buf[order];
    }

    /// <phi_n^2> under the standardized probability weight.
    double sq_norm(int order) const {
        if (order < 0) throw ConfigError("polynomial order must be >= 0");
        const double n = order;
        switch (family_) {
            case PolyFamily::Legendre:
                return 1.0 / (2.0 * n + 1.0);
            case PolyFamily::Hermite: {
                double f = 1.0;
                for (int k = 2; k <= order; ++k) f *= k;
                return f;
            }
            case PolyFamily::Laguerre:
                return std::exp(std::lgamma(n + lag_alpha_ + 1.0) - std::lgamma(n + 1.0) -
                                std::lgamma(lag_alpha_ + 1.0));
            case PolyFamily::Jacobi: {
                const double a = jac_a_, b = jac_b_;
                const double lognum = std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) +
                                      std::lgamma(a + b + 2.0);
                const double logden = std::lgamma(n + a + b + 1.0) + std::lgamma(n + 1.0) +
                                      std::lgamma(a + 1.0) + std::lgamma(b + 1.0);
                return std::exp(lognum - logden) / (2.0 * n + a + b + 1.0);
            }
        }
        return 1.0;
    }

private:
    PolyFamily family_;
    double jac_a_ = 0.0, jac_b_ = 0.0;
    double lag_alpha_ = 0.0;
};

struct UnivariatePolynomial {
    UnivariateBasis basis;
    int order;
    double sq_norm;

    double operator()(double xi) const { return basis.eval(order, xi); }
};

/// Order-n member of the family matched to the distribution. The optional
/// expected family guards against mismatched pairings.
inline UnivariatePolynomial univariate_polynomial(const Distribution& d, int order) {
    if (order < 0) throw ConfigError("univariate_polynomial: order must be >= 0");
    UnivariateBasis basis(d);
    return UnivariatePolynomial{basis, order, basis.sq_norm(order)};
}

inline UnivariatePolynomial univariate_polynomial(const Distribution& d, int order,
                                                  PolyFamily expected) {
    if (family_for(d) != expected)
        throw ConfigError(std::string("unsupported distribution/polynomial pairing: ") +
                          family_name(expected) + " requested for a distribution matched to " +
                          family_name(family_for(d)));
    return univariate_polynomial(d, order);
}

} // namespace lyo
