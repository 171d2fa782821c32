#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace lyo {

/// General band matrix in LAPACK-style storage with room for pivoting
/// fill-in. Element (i,j) is stored when -(kl+ku) <= i-j <= kl; entries with
/// i-j > ku above the original band are the fill region used by the
/// factorization.
class BandMatrix {
public:
    BandMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(static_cast<size_t>(ldab_) * n, 0.0) {}

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    bool in_store(int i, int j) const {
        int r = kl_ + ku_ + i - j;
        return r >= 0 && r < ldab_ && i >= 0 && i < n_ && j >= 0 && j < n_;
    }

    double& at(int i, int j) { return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }
    double at(int i, int j) const { return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }

    void set_zero() { std::fill(ab_.begin(), ab_.end(), 0.0); }

private:
    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
};

/// LU factorization of a band matrix with partial pivoting (row swaps stay
/// inside the widened band). Factors in place.
class BandedLU {
public:
    /// Returns false on an exactly zero pivot (matrix singular).
    bool factor(BandMatrix m) {
        m_ = std::move(m);
        const int n = m_->n(), kl = m_->kl(), ku = m_->ku();
        ipiv_.assign(n, 0);
        for (int j = 0; j < n; ++j) {
            const int imax = std::min(n - 1, j + kl);
            int p = j;
            double best = std::abs(m_->at(j, j));
            for (int i = j + 1; i <= imax; ++i) {
                double v = std::abs(m_->at(i, j));
                if (v > best) { best = v; p = i; }
            }
            ipiv_[j] = p;
            const double piv = m_->at(p, j);
            if (piv == 0.0) return false;
            const int cmax = std::min(n - 1, j + kl + ku);
            if (p != j)
                for (int c = j; c <= cmax; ++c) std::swap(m_->at(j, c), m_->at(p, c));
            for (int i = j + 1; i <= imax; ++i) {
                const double mult = m_->at(i, j) / piv;
                m_->at(i, j) = mult;
                if (mult != 0.0)
                    for (int c = j + 1; c <= cmax; ++c) m_->at(i, c) -= mult * m_->at(j, c);
            }
        }
        return true;
    }

    void solve(double* x) const {
        const int n = m_->n(), kl = m_->kl(), ku = m_->ku();
        for (int j = 0; j < n; ++j) {
            if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
            const int imax = std::min(n - 1, j + kl);
            const double xj = x[j];
            if (xj != 0.0)
                for (int i = j + 1; i <= imax; ++i) x[i] -= m_->at(i, j) * xj;
        }
        for (int j = n - 1; j >= 0; --j) {
            x[j] /= m_->at(j, j);
            const double xj = x[j];
            const int imin = std::max(0, j - kl - ku);
            if (xj != 0.0)
                for (int i = imin; i < j; ++i) x[i] -= m_->at(i, j) * xj;
        }
    }

private:
    std::optional<BandMatrix> m_;
    std::vector<int> ipiv_;
};

/// Solver for A = B + sum_k u_k e_{c_k}^T where B is banded and the u_k are
/// full columns replacing/augmenting columns c_k (Sherman-Morrison-Woodbury
/// against the banded factorization).
class BorderedBandedLU {
public:
    /// cols: indices of the dense columns; U: n x k column-major dense column
    /// data (the full correction column u_k = a_k - B e_{c_k}).
    bool factor(BandMatrix band, const std::vector<int>& cols, const std::vector<double>& u) {
        cols_ = cols;
        const int n = band.n();
        const int k = static_cast<int>(cols.size());
        if (!base_.factor(std::move(band))) return false;
        z_ = Eigen::MatrixXd(n, k);
        for (int c = 0; c < k; ++c) {
            std::vector<double> col(u.begin() + static_cast<size_t>(c) * n,
                                    u.begin() + static_cast<size_t>(c + 1) * n);
            base_.solve(col.data());
            for (int i = 0; i < n; ++i) z_(i, c) = col[i];
        }
        Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) cap(a, b) += z_(cols_[a], b);
        cap_lu_.compute(cap);
        // Reject a numerically singular capacitance; the caller falls back to
        // a smaller step.
        double mn = 1e300, mx = 0.0;
        for (int a = 0; a < k; ++a) {
            double d = std::abs(cap_lu_.matrixLU()(a, a));
            mn = std::min(mn, d);
            mx = std::max(mx, d);
        }
        return mn > 1e-14 * std::max(1.0, mx);
    }

    void solve(double* x) const {
        const int n = static_cast<int>(z_.rows());
        const int k = static_cast<int>(cols_.size());
        base_.solve(x);
        Eigen::VectorXd rhs(k);
        for (int a = 0; a < k; ++a) rhs(a) = x[cols_[a]];
        Eigen::VectorXd y = cap_lu_.solve(rhs);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int c = 0; c < k; ++c) acc += z_(i, c) * y(c);
            x[i] -= acc;
        }
    }

private:
    BandedLU base_;
    std::vector<int> cols_;
    Eigen::MatrixXd z_;
    Eigen::PartialPivLU<Eigen::MatrixXd> cap_lu_;
};

} // namespace lyo
