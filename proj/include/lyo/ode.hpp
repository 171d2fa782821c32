#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lyo/common.hpp"
#include "lyo/linalg.hpp"

namespace lyo {

/// Declared sparsity of df/dy: band plus optional full columns outside it.
/// Used for finite-difference grouping and for the linear solves; omit it to
/// get the dense path.
struct JacobianStructure {
    int lower = 0;
    int upper = 0;
    std::vector<int> dense_columns;
};

struct OdeSystem {
    int dimension = 0;
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)> rhs;
    /// Optional termination event: integration stops where this crosses zero.
    std::function<double(double t, std::span<const double> y)> event;
    /// False lets the stepper skip the df/dt finite difference.
    bool time_dependent = true;
    std::optional<JacobianStructure> jacobian;
};

enum class Termination { ReachedEnd, Event, Failure };

struct IntegrationResult {
    std::vector<double> times;          ///< strictly increasing, first = span start
    std::vector<std::vector<double>> states; ///< one state vector per time node
    Termination termination = Termination::ReachedEnd;
    std::optional<double> event_time;
    std::string diagnostics; ///< populated on failure

    const std::vector<double>& final_state() const { return states.back(); }
};

struct IntegratorOptions {
    double rtol = 1e-6;
    double atol = 1e-8;
    long max_steps = 2'000'000;
    double event_time_tolerance = 1e-6; ///< s
    double initial_step = 0.0;          ///< 0 = choose automatically
};

namespace detail {

/// Last state handed to a wrapped rhs; used to attach simulation context to
/// integrator failures.
struct StateSnapshot {
    double t = 0.0;
    std::vector<double> y;
};

/// Finite-difference Jacobian honoring the declared structure. Banded columns
/// are grouped so one rhs evaluation covers kl+ku+1 columns; declared dense
/// columns are probed individually.
class FdJacobian {
public:
    void compute(const OdeSystem& sys, double t, std::span<const double> y,
                 std::span<const double> f0, double rel_floor,
                 Eigen::MatrixXd* dense_out, BandMatrix* band_out,
                 std::vector<double>* cols_out) {
        const int n = sys.dimension;
        ypert_.assign(y.begin(), y.end());
        fpert_.resize(n);
        const double sqeps = std::sqrt(std::numeric_limits<double>::epsilon());
        auto delta_for = [&](int j) {
            return sqeps * (std::abs(y[j]) + rel_floor);
        };
        if (dense_out) {
            for (int j = 0; j < n; ++j) {
                const double dj = delta_for(j);
                ypert_[j] = y[j] + dj;
                sys.rhs(t, ypert_, fpert_);
                for (int i = 0; i < n; ++i) (*dense_out)(i, j) = (fpert_[i] - f0[i]) / dj;
                ypert_[j] = y[j];
            }
            return;
        }
        const auto& js = *sys.jacobian;
        const int kl = js.lower, ku = js.upper, stride = kl + ku + 1;
        band_out->set_zero();
        is_dense_col_.assign(n, false);
        for (int c : js.dense_columns) is_dense_col_[c] = true;
        for (int g = 0; g < stride && g < n; ++g) {
            bool any = false;
            for (int j = g; j < n; j += stride) {
                if (is_dense_col_[j]) continue;
                ypert_[j] = y[j] + delta_for(j);
                any = true;
            }
            if (!any) continue;
            sys.rhs(t, ypert_, fpert_);
            for (int j = g; j < n; j += stride) {
                if (is_dense_col_[j]) continue;
                const double dj = ypert_[j] - y[j];
                const int ilo = std::max(0, j - ku), ihi = std::min(n - 1, j + kl);
                for (int i = ilo; i <= ihi; ++i)
                    band_out->at(i, j) = (fpert_[i] - f0[i]) / dj;
                ypert_[j] = y[j];
            }
        }
        cols_out->assign(static_cast<size_t>(js.dense_columns.size()) * n, 0.0);
        for (size_t c = 0; c < js.dense_columns.size(); ++c) {
            const int j = js.dense_columns[c];
            const double dj = delta_for(j);
            ypert_[j] = y[j] + dj;
            sys.rhs(t, ypert_, fpert_);
            for (int i = 0; i < n; ++i)
                (*cols_out)[c * n + i] = (fpert_[i] - f0[i]) / dj;
            ypert_[j] = y[j];
        }
    }

private:
    std::vector<double> ypert_, fpert_;
    std::vector<char> is_dense_col_;
};

/// W = I - h*d*J factored along the declared structure.
class StepMatrix {
public:
    bool factor_dense(const Eigen::MatrixXd& jac, double hd) {
        dense_ = true;
        Eigen::MatrixXd w = Eigen::MatrixXd::Identity(jac.rows(), jac.cols()) - hd * jac;
        dense_lu_.compute(w);
        for (int i = 0; i < w.rows(); ++i)
            if (dense_lu_.matrixLU()(i, i) == 0.0) return false;
        return true;
    }

    bool factor_structured(const BandMatrix& jac_band, const std::vector<int>& cols,
                           const std::vector<double>& jac_cols, double hd) {
        dense_ = false;
        const int n = jac_band.n();
        BandMatrix w(n, jac_band.kl(), jac_band.ku());
        for (int j = 0; j < n; ++j) {
            const int ilo = std::max(0, j - jac_band.ku()), ihi = std::min(n - 1, j + jac_band.kl());
            for (int i = ilo; i <= ihi; ++i) w.at(i, j) = -hd * jac_band.at(i, j);
            w.at(j, j) += 1.0;
        }
        if (cols.empty()) {
            banded_ = BandedLU();
            return banded_.factor(std::move(w));
        }
        // Correction columns: (I - hd*J) has column c equal to e_c - hd*jc;
        // the banded part already holds e_c there (J's banded entries in a
        // dense column are zeroed by the FD fill), so the correction is
        // -hd*jc minus what the band contributes beyond e_c (nothing).
        std::vector<double> u(jac_cols.size());
        for (size_t c = 0; c < cols.size(); ++c)
            for (int i = 0; i < n; ++i)
                u[c * n + i] = -hd * jac_cols[c * n + i];
        bordered_ = BorderedBandedLU();
        return bordered_.factor(std::move(w), cols, u);
    }

    void solve(std::span<double> x) const {
        if (dense_) {
            Eigen::Map<Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
            v = dense_lu_.solve(v);
        } else if (has_border_) {
            bordered_.solve(x.data());
        } else {
            banded_.solve(x.data());
        }
    }

    void set_has_border(bool b) { has_border_ = b; }

private:
    bool dense_ = true;
    bool has_border_ = false;
    Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu_;
    BandedLU banded_;
    BorderedBandedLU bordered_;
};

} // namespace detail

/// Adaptive linearly-implicit (Rosenbrock) integrator: a 3-stage L-stable
/// scheme of order 3 with an embedded order-2 error estimator, suited to the
/// stiff method-of-lines systems produced by the drying models. Dense output
/// by cubic Hermite interpolation on accepted steps; events located on the
/// interpolant by bisection.
inline IntegrationResult integrate(const OdeSystem& sys, std::span<const double> y0,
                                   std::pair<double, double> t_span,
                                   const IntegratorOptions& opts = {},
                                   std::span<const double> output_grid = {}) {
    const int n = sys.dimension;
    if (static_cast<int>(y0.size()) != n)
        throw SimulationError("integrate: initial state dimension mismatch");
    if (!(t_span.second > t_span.first))
        throw SimulationError("integrate: time span must be increasing");
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
        throw SimulationError("integrate: tolerances must be > 0");

    // ros3 coefficients (Sandu et al., stiff solver benchmarks): stages share
    // one factorization; stage 3 reuses stage 2's function value.
    constexpr double kGam = 0.43586652150845899941601945119356;
    constexpr double kAlpha2 = kGam, kAlpha3 = kGam;
    constexpr double kA21 = 1.0, kA31 = 1.0, kA32 = 0.0;
    constexpr double kC21 = -1.0156171083877702091975600115545;
    constexpr double kC31 = 4.0759956452537699824805835358067;
    constexpr double kC32 = 9.2076794298330791242156818474003;
    constexpr double kM1 = 1.0;
    constexpr double kM2 = 6.1697947043828245592553615689730;
    constexpr double kM3 = -0.42772256543218573326238373806514;
    constexpr double kE1 = 0.5;
    constexpr double kE2 = -2.9079558716805469821718236208017;
    constexpr double kE3 = 0.22354069897811569627360909276199;
    constexpr double kGamma1 = kGam;
    constexpr double kGamma2 = 0.24291996454816804366592249683314;
    constexpr double kGamma3 = 2.1851380027664058511513169485832;
    const double eps = std::numeric_limits<double>::epsilon();

    IntegrationResult res;
    const bool gridded = !output_grid.empty();
    if (gridded) {
        for (size_t i = 0; i + 1 < output_grid.size(); ++i)
            if (!(output_grid[i] < output_grid[i + 1]))
                throw SimulationError("integrate: output grid must be strictly increasing");
        if (output_grid.front() < t_span.first - 1e-12 || output_grid.back() > t_span.second + 1e-12)
            throw SimulationError("integrate: output grid outside time span");
    }

    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> f0(n), fs(n), fnew(n), tdot(n, 0.0);
    std::vector<double> u1(n), u2(n), u3(n), ynew(n), err(n), tmp(n);
    double t = t_span.first;

    auto check_finite = [&](std::span<const double> v, double at_t, const char* what) {
        for (double x : v)
            if (!std::isfinite(x))
                throw SimulationError(std::string("integrate: non-finite ") + what + " at t = " +
                                      std::to_string(at_t));
    };

    sys.rhs(t, y, f0);
    check_finite(f0, t, "rhs");

    // Emission machinery: step interpolant is cubic Hermite on (t0,y,f0)-(t1,ynew,f2).
    // Values are clamped to the endpoint envelope: near stiff boundary layers
    // the endpoint slopes can be enormous while the states themselves stay
    // tame, and an unclamped cubic would swing far outside them.
    auto hermite = [&](double theta, double h, std::span<double> out) {
        const double t2c = theta * theta, t3 = t2c * theta;
        const double h00 = 2 * t3 - 3 * t2c + 1, h10 = t3 - 2 * t2c + theta;
        const double h01 = -2 * t3 + 3 * t2c, h11 = t3 - t2c;
        for (int i = 0; i < n; ++i) {
            const double v = h00 * y[i] + h10 * h * f0[i] + h01 * ynew[i] + h11 * h * fnew[i];
            out[i] = std::clamp(v, std::min(y[i], ynew[i]), std::max(y[i], ynew[i]));
        }
    };

    size_t grid_pos = 0;
    auto emit = [&](double tt, const std::vector<double>& state) {
        if (!res.times.empty() && tt <= res.times.back()) return;
        res.times.push_back(tt);
        res.states.push_back(state);
    };
    if (!gridded) {
        emit(t, y);
    } else {
        if (std::abs(output_grid[0] - t) <= 1e-12) {
            emit(t, y);
            grid_pos = 1;
        } else {
            emit(t, y); // invariant: first node equals span start
        }
    }

    double event_prev = 0.0;
    const bool has_event = static_cast<bool>(sys.event);
    if (has_event) event_prev = sys.event(t, y);

    // Initial step size from the rhs scale.
    double h = opts.initial_step;
    if (h <= 0.0) {
        double fn = 0.0, yn = 0.0;
        for (int i = 0; i < n; ++i) {
            fn = std::max(fn, std::abs(f0[i]) / (opts.atol + opts.rtol * std::abs(y[i])));
            yn = std::max(yn, std::abs(y[i]));
        }
        (void)yn;
        h = fn > 0.0 ? 0.01 / fn : (t_span.second - t_span.first) / 100.0;
        h = std::min(h, (t_span.second - t_span.first) / 10.0);
    }

    detail::FdJacobian fd;
    detail::StepMatrix w;
    Eigen::MatrixXd jac_dense;
    std::optional<BandMatrix> jac_band;
    std::vector<double> jac_cols;
    const bool structured = sys.jacobian.has_value();
    if (!structured) {
        jac_dense.resize(n, n);
    } else {
        jac_band.emplace(n, sys.jacobian->lower, sys.jacobian->upper);
        w.set_has_border(!sys.jacobian->dense_columns.empty());
    }
    const double fd_floor = opts.atol / opts.rtol;

    long steps = 0;
    bool done = false;
    while (!done) {
        if (++steps > opts.max_steps)
            throw SimulationError("integrate: exceeded max step count at t = " + std::to_string(t));
        h = std::min(h, t_span.second - t);
        bool last = (t + h >= t_span.second - 1e-14 * std::abs(t_span.second));
        if (last) h = t_span.second - t;
        if (h <= 16.0 * eps * std::max(std::abs(t), 1.0))
            throw SimulationError("integrate: step size underflow at t = " + std::to_string(t));

        // Jacobian and W factorization at the step start.
        if (structured) {
            fd.compute(sys, t, y, f0, fd_floor, nullptr, &*jac_band, &jac_cols);
        } else {
            fd.compute(sys, t, y, f0, fd_floor, &jac_dense, nullptr, nullptr);
        }
        if (sys.time_dependent) {
            const double dt = std::sqrt(eps) * std::max(std::abs(t), h);
            sys.rhs(t + dt, y, tmp);
            for (int i = 0; i < n; ++i) tdot[i] = (tmp[i] - f0[i]) / dt;
        }

        bool accepted = false;
        while (!accepted) {
            const double hg = h * kGam;
            bool ok = structured
                          ? w.factor_structured(*jac_band, sys.jacobian->dense_columns, jac_cols, hg)
                          : w.factor_dense(jac_dense, hg);
            if (!ok) {
                h *= 0.5;
                last = false;
                if (h <= 16.0 * eps * std::max(std::abs(t), 1.0))
                    throw SimulationError("integrate: singular step matrix at t = " + std::to_string(t));
                continue;
            }
            // Trial evaluations on wild stage states are recoverable: treat a
            // non-finite stage value as a rejection and retry with a smaller
            // step.
            auto stage_ok = [&](std::span<const double> v) {
                for (double x : v)
                    if (!std::isfinite(x)) return false;
                return true;
            };
            bool stage_failed = false;
            // Stage 1: (I - hg J) u1 = hg (f0 + h gamma1 T)
            for (int i = 0; i < n; ++i) u1[i] = hg * (f0[i] + h * kGamma1 * tdot[i]);
            w.solve(u1);
            // Stage 2 at y + a21 u1.
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + kA21 * u1[i];
            sys.rhs(t + kAlpha2 * h, tmp, fs);
            stage_failed = !stage_ok(fs);
            double errnorm = 2.0;
            if (!stage_failed) {
                for (int i = 0; i < n; ++i)
                    u2[i] = hg * (fs[i] + (kC21 / h) * u1[i] + h * kGamma2 * tdot[i]);
                w.solve(u2);
                // Stage 3 reuses the stage-2 function value (a31 = a21, a32 = 0).
                static_assert(kA31 == kA21 && kA32 == 0.0 && kAlpha3 == kAlpha2);
                for (int i = 0; i < n; ++i)
                    u3[i] = hg * (fs[i] + (kC31 / h) * u1[i] + (kC32 / h) * u2[i] +
                                  h * kGamma3 * tdot[i]);
                w.solve(u3);

                errnorm = 0.0;
                for (int i = 0; i < n; ++i) {
                    ynew[i] = y[i] + kM1 * u1[i] + kM2 * u2[i] + kM3 * u3[i];
                    err[i] = kE1 * u1[i] + kE2 * u2[i] + kE3 * u3[i];
                    const double sc =
                        opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                    const double r = err[i] / sc;
                    errnorm += r * r;
                }
                errnorm = std::sqrt(errnorm / n);
                if (!std::isfinite(errnorm)) errnorm = 2.0; // force rejection
            }

            if (errnorm <= 1.0) {
                accepted = true;
            } else {
                const double fac = std::max(0.2, 0.8 * std::pow(errnorm, -1.0 / 3.0));
                h *= fac;
                last = false;
                if (h <= 16.0 * eps * std::max(std::abs(t), 1.0))
                    throw SimulationError("integrate: step size underflow (error control) at t = " +
                                          std::to_string(t));
            }
            if (accepted) {
                const double tnew = last ? t_span.second : t + h;
                sys.rhs(tnew, ynew, fnew); // becomes f0 of the next step; used by dense output
                if (!stage_ok(fnew)) {
                    accepted = false;
                    h *= 0.5;
                    last = false;
                    if (h <= 16.0 * eps * std::max(std::abs(t), 1.0))
                        throw SimulationError(
                            "integrate: persistent non-finite rhs near t = " + std::to_string(t));
                    continue;
                }
                // Event check on this step.
                double event_new = 0.0;
                bool fired = false;
                if (has_event) {
                    event_new = sys.event(tnew, ynew);
                    fired = (event_prev > 0.0 && event_new <= 0.0) ||
                            (event_prev < 0.0 && event_new >= 0.0);
                }
                if (fired) {
                    // Bisection on the Hermite interpolant.
                    double lo = 0.0, hi = 1.0;
                    std::vector<double> ymid(n);
                    const double span_h = tnew - t;
                    double glo = event_prev;
                    while ((hi - lo) * span_h > opts.event_time_tolerance) {
                        const double mid = 0.5 * (lo + hi);
                        hermite(mid, span_h, ymid);
                        const double gm = sys.event(t + mid * span_h, ymid);
                        const bool same_side = (glo > 0.0 && gm > 0.0) || (glo < 0.0 && gm < 0.0);
                        if (same_side) {
                            lo = mid;
                            glo = gm;
                        } else {
                            hi = mid;
                        }
                    }
                    const double tstar = t + hi * span_h;
                    hermite(hi, span_h, ymid);
                    // Emit grid nodes before the event, then the event node.
                    if (gridded) {
                        std::vector<double> yg(n);
                        while (grid_pos < output_grid.size() && output_grid[grid_pos] < tstar) {
                            const double th = (output_grid[grid_pos] - t) / span_h;
                            hermite(th, span_h, yg);
                            emit(output_grid[grid_pos], yg);
                            ++grid_pos;
                        }
                    }
                    emit(tstar, ymid);
                    res.termination = Termination::Event;
                    res.event_time = tstar;
                    return res;
                }

                // Regular emission.
                if (gridded) {
                    std::vector<double> yg(n);
                    const double span_h = tnew - t;
                    while (grid_pos < output_grid.size() &&
                           output_grid[grid_pos] <= tnew + 1e-12 * std::max(1.0, std::abs(tnew))) {
                        const double th = std::clamp((output_grid[grid_pos] - t) / span_h, 0.0, 1.0);
                        hermite(th, span_h, yg);
                        emit(output_grid[grid_pos], yg);
                        ++grid_pos;
                    }
                } else {
                    emit(tnew, ynew);
                }

                const double h_taken = tnew - t;
                const double event_old = event_prev;
                t = tnew;
                y = ynew;
                f0 = fnew;
                event_prev = has_event ? event_new : 0.0;
                if (last) {
                    done = true;
                } else {
                    const double fac = std::clamp(0.8 * std::pow(std::max(errnorm, 1e-10), -1.0 / 3.0), 0.2, 5.0);
                    h *= fac;
                    // Approach an upcoming event in controlled increments so
                    // the crossing step barely oversteps it; far beyond the
                    // event the dynamics may be meaningless.
                    if (has_event && event_old != 0.0 && event_new != 0.0 &&
                        ((event_old > 0.0 && event_new > 0.0 && event_new < event_old) ||
                         (event_old < 0.0 && event_new < 0.0 && event_new > event_old))) {
                        const double t_to_zero =
                            h_taken * std::abs(event_new) / std::abs(event_old - event_new);
                        h = std::min(h, std::max(1.2 * t_to_zero, 1e-3 * h_taken));
                    }
                }
            }
        }
    }
    if (gridded && (res.times.empty() || res.times.back() < t_span.second - 1e-12))
        emit(t_span.second, y);
    res.termination = Termination::ReachedEnd;
    return res;
}

} // namespace lyo
