#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyo/common.hpp"
#include "lyo/csv.hpp"
#include "lyo/distributions.hpp"
#include "lyo/empirical.hpp"
#include "lyo/orthopoly.hpp"

namespace lyo {

/// Complete graded multi-index set {nu : |nu| <= N_P}, graded-lexicographic,
/// first entry all-zeros.
struct MultiIndexSet {
    int n_inputs = 0;
    int total_order = 0;
    std::vector<std::vector<int>> indices;

    size_t size() const { return indices.size(); }
};

inline MultiIndexSet multi_index_set(int n_inputs, int total_order) {
    if (n_inputs < 1) throw ConfigError("multi_index_set: need at least one input");
    if (total_order < 0) throw ConfigError("multi_index_set: order must be >= 0");
    MultiIndexSet s;
    s.n_inputs = n_inputs;
    s.total_order = total_order;
    std::vector<int> current(n_inputs, 0);
    auto emit_degree = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n_inputs - 1) {
            current[pos] = remaining;
            s.indices.push_back(current);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            current[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    for (int degree = 0; degree <= total_order; ++degree) emit_degree(emit_degree, 0, degree);
    return s;
}

/// L = (N_theta + N_P)! / (N_theta! N_P!).
inline size_t multi_index_count(int n_inputs, int total_order) {
    size_t l = 1;
    for (int k = 1; k <= total_order; ++k)
        l = l * static_cast<size_t>(n_inputs + k) / static_cast<size_t>(k);
    return l;
}

/// Fitted polynomial-chaos surrogate: one coefficient column per output
/// quantity (per output time node for time-resolved fits).
class PceSurrogate {
public:
    PceSurrogate() = default;
    PceSurrogate(std::vector<UncertainInput> inputs, MultiIndexSet mindex,
                 Eigen::MatrixXd coefficients, std::vector<std::string> column_names = {})
        : inputs_(std::move(inputs)), mindex_(std::move(mindex)),
          coeff_(std::move(coefficients)), columns_(std::move(column_names)) {
        for (const auto& in : inputs_) bases_.emplace_back(in.distribution);
        if (coeff_.rows() != static_cast<Eigen::Index>(mindex_.size()))
            throw ConfigError("PceSurrogate: coefficient row count must equal the basis size");
        compute_norms();
    }

    const std::vector<UncertainInput>& inputs() const { return inputs_; }
    const MultiIndexSet& multi_index() const { return mindex_; }
    const Eigen::MatrixXd& coefficients() const { return coeff_; }
    const std::vector<double>& basis_sq_norms() const { return sq_norms_; }
    const std::vector<std::string>& column_names() const { return columns_; }
    size_t basis_size() const { return mindex_.size(); }
    Eigen::Index output_count() const { return coeff_.cols(); }

    /// psi_i(theta) for all i, theta in raw parameter coordinates.
    void evaluate_basis(std::span<const double> theta, std::span<double> psi) const {
        const int dim = static_cast<int>(inputs_.size());
        if (static_cast<int>(theta.size()) != dim)
            throw ConfigError("evaluate_basis: input dimension mismatch");
        thread_local std::vector<double> uni;
        const int width = mindex_.total_order + 1;
        uni.resize(static_cast<size_t>(dim) * width);
        for (int j = 0; j < dim; ++j) {
            if (!in_support(inputs_[j].distribution, theta[j]))
                throw ConfigError("evaluate_basis: coordinate out of support for input " +
                                  inputs_[j].name);
            const double xi = standardize(inputs_[j].distribution, theta[j]);
            bases_[j].eval_all(xi, std::span<double>(uni.data() + static_cast<size_t>(j) * width,
                                                     width));
        }
        for (size_t i = 0; i < mindex_.size(); ++i) {
            double prod = 1.0;
            const auto& nu = mindex_.indices[i];
            for (int j = 0; j < dim; ++j) prod *= uni[static_cast<size_t>(j) * width + nu[j]];
            psi[i] = prod;
        }
    }

    /// y^T psi(theta) for every output column.
    std::vector<double> evaluate(std::span<const double> theta) const {
        std::vector<double> psi(basis_size());
        evaluate_basis(theta, psi);
        Eigen::Map<const Eigen::VectorXd> p(psi.data(), static_cast<Eigen::Index>(psi.size()));
        Eigen::VectorXd out = coeff_.transpose() * p;
        return std::vector<double>(out.data(), out.data() + out.size());
    }

    /// Restriction to a subset of output columns.
    PceSurrogate select_columns(const std::vector<Eigen::Index>& cols) const {
        Eigen::MatrixXd sub(coeff_.rows(), static_cast<Eigen::Index>(cols.size()));
        std::vector<std::string> names;
        for (size_t k = 0; k < cols.size(); ++k) {
            sub.col(static_cast<Eigen::Index>(k)) = coeff_.col(cols[k]);
            if (!columns_.empty()) names.push_back(columns_[static_cast<size_t>(cols[k])]);
        }
        return PceSurrogate(inputs_, mindex_, std::move(sub), std::move(names));
    }

private:
    void compute_norms() {
        sq_norms_.resize(mindex_.size());
        const int dim = static_cast<int>(inputs_.size());
        for (size_t i = 0; i < mindex_.size(); ++i) {
            double prod = 1.0;
            for (int j = 0; j < dim; ++j) prod *= bases_[j].sq_norm(mindex_.indices[i][j]);
            sq_norms_[i] = prod;
        }
    }

    std::vector<UncertainInput> inputs_;
    MultiIndexSet mindex_;
    Eigen::MatrixXd coeff_;
    std::vector<std::string> columns_;
    std::vector<UnivariateBasis> bases_;
    std::vector<double> sq_norms_;
};

/// Least-squares fit of the PCE coefficients from sampled responses.
/// samples: n x N_theta row-major raw parameter draws; responses: n x m
/// row-major. Design columns are scaled to unit norm before solving.
inline PceSurrogate fit_surrogate(const std::vector<UncertainInput>& inputs,
                                  std::span<const double> samples,
                                  std::span<const double> responses, int total_order,
                                  std::vector<std::string> column_names = {},
                                  double max_condition = 1e10) {
    const size_t dim = inputs.size();
    if (dim == 0) throw ConfigError("fit_surrogate: no uncertain inputs");
    const size_t n = samples.size() / dim;
    if (n * dim != samples.size()) throw ConfigError("fit_surrogate: sample matrix shape mismatch");
    const size_t m = responses.size() / n;
    if (n * m != responses.size())
        throw ConfigError("fit_surrogate: response matrix shape mismatch");
    MultiIndexSet mindex = multi_index_set(static_cast<int>(dim), total_order);
    const size_t L = mindex.size();
    if (n < L)
        throw FitError("fit_surrogate: " + std::to_string(n) + " samples for " + std::to_string(L) +
                       " basis functions; draw more samples or lower the order");
    for (double r : responses)
        if (!std::isfinite(r)) throw FitError("fit_surrogate: non-finite response value");

    PceSurrogate probe(inputs, mindex, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), 0));
    Eigen::MatrixXd design(n, L);
    std::vector<double> psi(L);
    for (size_t k = 0; k < n; ++k) {
        probe.evaluate_basis(samples.subspan(k * dim, dim), psi);
        for (size_t i = 0; i < L; ++i) design(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = psi[i];
    }
    Eigen::VectorXd scale(L);
    for (size_t i = 0; i < L; ++i) {
        const double s = design.col(static_cast<Eigen::Index>(i)).norm();
        scale(static_cast<Eigen::Index>(i)) = s > 0.0 ? s : 1.0;
        design.col(static_cast<Eigen::Index>(i)) /= scale(static_cast<Eigen::Index>(i));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0.0) || smax / smin > max_condition)
        throw FitError("fit_surrogate: rank-deficient design (condition number " +
                       format_double(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) +
                       "); draw more samples or lower the order");
    Eigen::MatrixXd y(n, m);
    for (size_t k = 0; k < n; ++k)
        for (size_t c = 0; c < m; ++c)
            y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = responses[k * m + c];
    Eigen::MatrixXd coeff = svd.solve(y);
    for (size_t i = 0; i < L; ++i) coeff.row(static_cast<Eigen::Index>(i)) /= scale(static_cast<Eigen::Index>(i));
    return PceSurrogate(inputs, std::move(mindex), std::move(coeff), std::move(column_names));
}

struct Moments {
    double mean;
    double variance;
};

/// mean = y_0; variance = sum_{i>=1} y_i^2 <psi_i^2>.
inline std::vector<Moments> surrogate_moments(const PceSurrogate& s) {
    std::vector<Moments> out;
    const auto& c = s.coefficients();
    const auto& norms = s.basis_sq_norms();
    out.reserve(c.cols());
    for (Eigen::Index col = 0; col < c.cols(); ++col) {
        double var = 0.0;
        for (Eigen::Index i = 1; i < c.rows(); ++i)
            var += c(i, col) * c(i, col) * norms[static_cast<size_t>(i)];
        out.push_back({c(0, col), var});
    }
    return out;
}

/// Basis matrix at n fresh input draws (row per draw), shared by resampling
/// paths so distributions and quantile curves use identical draws.
inline Eigen::MatrixXd resample_basis(const PceSurrogate& s, size_t n, uint64_t seed) {
    const auto samples = draw_samples(s.inputs(), n, seed);
    const size_t dim = s.inputs().size();
    Eigen::MatrixXd psi(n, s.basis_size());
    std::vector<double> row(s.basis_size());
    for (size_t k = 0; k < n; ++k) {
        s.evaluate_basis(std::span<const double>(samples.data() + k * dim, dim), row);
        for (size_t i = 0; i < row.size(); ++i)
            psi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = row[i];
    }
    return psi;
}

/// Empirical distribution of each output column at n_resample fresh draws.
inline std::vector<EmpiricalDistribution> surrogate_distribution(const PceSurrogate& s,
                                                                 size_t n_resample, uint64_t seed) {
    if (n_resample < 1000) throw ConfigError("surrogate_distribution: need at least 1000 resamples");
    Eigen::MatrixXd psi = resample_basis(s, n_resample, seed);
    std::vector<EmpiricalDistribution> out;
    out.reserve(static_cast<size_t>(s.output_count()));
    for (Eigen::Index col = 0; col < s.output_count(); ++col) {
        Eigen::VectorXd vals = psi * s.coefficients().col(col);
        out.emplace_back(std::vector<double>(vals.data(), vals.data() + vals.size()));
    }
    return out;
}

/// JSON (de)serialization of a fitted surrogate.
inline void save_surrogate(const PceSurrogate& s, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["order"] = s.multi_index().total_order;
    auto& jin = j["inputs"] = nlohmann::json::array();
    for (const auto& in : s.inputs())
        jin.push_back({{"name", in.name}, {"distribution", distribution_to_string(in.distribution)}});
    j["multi_index"] = s.multi_index().indices;
    j["columns"] = s.column_names();
    auto& jc = j["coefficients"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.coefficients().rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < s.coefficients().cols(); ++c) row.push_back(s.coefficients()(i, c));
        jc.push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

inline PceSurrogate load_surrogate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema_version", 0) != 1)
        throw ConfigError(path + ": unsupported surrogate schema version");
    std::vector<UncertainInput> inputs;
    for (const auto& ji : j.at("inputs"))
        inputs.push_back({ji.at("name").get<std::string>(),
                          parse_distribution(ji.at("distribution").get<std::string>())});
    MultiIndexSet mindex;
    mindex.indices = j.at("multi_index").get<std::vector<std::vector<int>>>();
    mindex.n_inputs = static_cast<int>(inputs.size());
    int maxdeg = 0;
    for (const auto& nu : mindex.indices)
        maxdeg = std::max(maxdeg, std::accumulate(nu.begin(), nu.end(), 0));
    mindex.total_order = maxdeg;
    auto rows = j.at("coefficients").get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd coeff(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t c = 0; c < rows[i].size(); ++c)
            coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    auto columns = j.value("columns", std::vector<std::string>{});
    return PceSurrogate(std::move(inputs), std::move(mindex), std::move(coeff), std::move(columns));
}

} // namespace lyo
