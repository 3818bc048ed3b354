#include "tfm/preaverage.hpp"

#include "tfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tfm {

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::pre_averaged: return "pre";
    case Method::max_er: return "max_er";
    case Method::projected: return "proj";
    case Method::hosvd: return "hosvd";
    case Method::hooi: return "hooi";
    }
    return "unknown";
}

Vector FiberSampleSet::weights(const Dims& dims) const {
    if (subsets.size() != dims.size() || mode >= dims.size())
        throw Error(ErrorKind::shape_mismatch, "fibre sample does not match tensor order");
    std::vector<Vector> indicators(dims.size());
    for (std::size_t l = 0; l < dims.size(); ++l) {
        if (l == mode) continue;
        if (subsets[l].empty()) throw Error(ErrorKind::invalid_argument, "empty fibre index subset");
        indicators[l] = Vector::Zero(static_cast<Eigen::Index>(dims[l]));
        for (std::size_t i : subsets[l]) {
            if (i >= dims[l]) throw Error(ErrorKind::invalid_argument, "fibre index out of range");
            indicators[l](static_cast<Eigen::Index>(i)) = 1.0;
        }
    }
    return kron_chain_minus_k(std::span<const Vector>(indicators), mode);
}

Matrix sum_fibers(const TensorSeries& x, std::size_t k, const std::optional<FiberSampleSet>& sample) {
    const StackedUnfolding u(x, k, /*center=*/false);
    if (!sample) return u.project(Vector::Ones(static_cast<Eigen::Index>(u.fibres())));
    if (sample->mode != k) throw Error(ErrorKind::invalid_argument, "fibre sample drawn for a different mode");
    return u.project(sample->weights(x.dims()));
}

std::vector<FiberSampleSet> sample_index_sets(const Dims& dims, std::size_t k, const std::vector<std::size_t>& sizes,
                                              std::size_t m0, Rng& rng) {
    if (k >= dims.size()) throw Error(ErrorKind::invalid_argument, "mode index out of range");
    if (sizes.size() != dims.size())
        throw Error(ErrorKind::shape_mismatch, "one subset size per mode is required");
    if (m0 == 0) throw Error(ErrorKind::invalid_argument, "at least one fibre sample is required");
    for (std::size_t l = 0; l < dims.size(); ++l)
        if (l != k && (sizes[l] == 0 || sizes[l] > dims[l]))
            throw Error(ErrorKind::invalid_argument, "subset size for mode " + std::to_string(l) +
                                                         " must lie in [1, " + std::to_string(dims[l]) + "]");

    std::size_t product_size = 1;
    for (std::size_t l = 0; l < dims.size(); ++l)
        if (l != k) product_size *= sizes[l];

    std::vector<FiberSampleSet> out(m0);
    std::vector<std::size_t> pool;
    for (auto& s : out) {
        s.mode = k;
        s.product_size = product_size;
        s.subsets.resize(dims.size());
        for (std::size_t l = 0; l < dims.size(); ++l) {
            if (l == k) continue;
            pool.resize(dims[l]);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            // Partial Fisher-Yates: the first sizes[l] slots are a uniform draw.
            for (std::size_t i = 0; i < sizes[l]; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, dims[l] - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            s.subsets[l].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sizes[l]));
            std::sort(s.subsets[l].begin(), s.subsets[l].end());
        }
    }
    return out;
}

namespace {

// Relative floor below which an eigenvalue counts as numerically zero.
constexpr double kEigenFloor = 1e-12;

std::optional<double> ratio_or_none(const Vector& descending, std::size_t j) {
    const double top = descending(0);
    const double bulk = descending(static_cast<Eigen::Index>(j - 1));
    if (!(top > 0.0) || !(bulk > kEigenFloor * top)) return std::nullopt;
    return top / bulk;
}

} // namespace

double eigenvalue_ratio(const Matrix& cov, std::size_t j) {
    if (j < 1 || j > static_cast<std::size_t>(cov.rows()))
        throw Error(ErrorKind::invalid_argument, "eigenvalue index must lie in [1, d_k]");
    const auto r = ratio_or_none(eigenvalues_sym(cov), j);
    if (!r) throw Error(ErrorKind::degenerate, "eigenvalue " + std::to_string(j) + " of the sample covariance is zero");
    return *r;
}

std::vector<std::size_t> subset_sizes(const Dims& dims, std::size_t k, const PreaverageConfig& cfg) {
    if (!cfg.sizes.empty()) {
        if (cfg.sizes.size() != dims.size())
            throw Error(ErrorKind::shape_mismatch, "one subset size per mode is required");
        return cfg.sizes;
    }
    if (!(cfg.n_frac > 0.0) || cfg.n_frac > 1.0)
        throw Error(ErrorKind::invalid_argument, "n_frac must lie in (0, 1]");
    std::vector<std::size_t> sizes(dims.size(), 0);
    for (std::size_t l = 0; l < dims.size(); ++l) {
        if (l == k) continue;
        const auto n = static_cast<std::size_t>(std::floor(cfg.n_frac * static_cast<double>(dims[l])));
        sizes[l] = std::clamp<std::size_t>(n, 1, dims[l]);
    }
    return sizes;
}

PreaverageResult preaverage_direction(const TensorSeries& x, std::size_t k, const PreaverageConfig& cfg, Rng& rng) {
    if (k >= x.order()) throw Error(ErrorKind::invalid_argument, "mode index out of range");
    const std::size_t T = x.length();
    const std::size_t dk = x.dim(k);
    if (T < 2) throw Error(ErrorKind::invalid_argument, "pre-averaging needs at least two time steps");
    if (cfg.m == 0 || cfg.m > cfg.m0) throw Error(ErrorKind::invalid_argument, "need 1 <= m <= m0");
    if (cfg.z == 0 || cfg.z > dk) throw Error(ErrorKind::invalid_argument, "need 1 <= z <= d_k");
    const std::size_t bulk = cfg.bulk_j.value_or(std::max<std::size_t>(1, std::min(T, dk) / 2));
    if (bulk < 1 || bulk > dk) throw Error(ErrorKind::invalid_argument, "bulk eigenvalue index must lie in [1, d_k]");

    // All draws happen before any scoring.
    std::vector<FiberSampleSet> samples = sample_index_sets(x.dims(), k, subset_sizes(x.dims(), k, cfg), cfg.m0, rng);

    const StackedUnfolding u(x, k);
    Matrix weights(static_cast<Eigen::Index>(u.fibres()), static_cast<Eigen::Index>(cfg.m0));
    for (std::size_t m = 0; m < cfg.m0; ++m) weights.col(static_cast<Eigen::Index>(m)) = samples[m].weights(x.dims());
    const Matrix summed = u.matrix() * weights; // (d_k T) x m0, centered

    const auto dki = static_cast<Eigen::Index>(dk);
    const auto Ti = static_cast<Eigen::Index>(T);
    auto sample_cov = [&](std::size_t m) -> Matrix {
        const Eigen::Map<const Matrix> y(summed.col(static_cast<Eigen::Index>(m)).data(), dki, Ti);
        return y * y.transpose() / static_cast<double>(T);
    };

    std::vector<double> scores(cfg.m0);
    for (std::size_t m = 0; m < cfg.m0; ++m) {
        scores[m] = ratio_or_none(eigenvalues_sym(sample_cov(m)), bulk).value_or(1.0);
        samples[m].er_score = scores[m];
    }

    std::vector<std::size_t> order(cfg.m0);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    PreaverageResult out;
    out.scores = scores;
    out.aggregated_covariance = Matrix::Zero(dki, dki);
    for (std::size_t i = 0; i < cfg.m; ++i) {
        out.aggregated_covariance += sample_cov(order[i]);
        out.chosen.push_back(samples[order[i]]);
    }
    out.aggregated_covariance /= static_cast<double>(cfg.m);

    const double raw_scale = x.columns().squaredNorm() / static_cast<double>(x.columns().size());
    const double n = static_cast<double>(samples.front().product_size);
    EigenDecomposition eig = top_eigen(out.aggregated_covariance, cfg.z);
    if (!(eig.values(0) > 1e-24 * raw_scale * n * n))
        throw Error(ErrorKind::degenerate, "every retained fibre sample has zero covariance");

    out.estimate.mode = k;
    out.estimate.columns = std::move(eig.vectors);
    out.estimate.eigenvalues = eig.values.cwiseMax(0.0);
    out.estimate.method = cfg.m == 1 ? Method::max_er : Method::pre_averaged;
    return out;
}

} // namespace tfm
