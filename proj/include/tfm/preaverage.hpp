#pragma once

#include "tfm/loading.hpp"
#include "tfm/rng.hpp"
#include "tfm/tensor.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace tfm {

/// One random draw of fibres for mode k: an index subset of every other mode,
/// combined as their Cartesian product.
struct FiberSampleSet {
    std::size_t mode = 0;
    /// subsets[l] for l != mode, sorted ascending; subsets[mode] is empty.
    std::vector<std::vector<std::size_t>> subsets;
    std::size_t product_size = 0;
    double er_score = 1.0;

    /// 0/1 weights over the d_{-k} unfolding columns selecting the product set.
    [[nodiscard]] Vector weights(const Dims& dims) const;
};

/// x~_t = sum of the selected mode-k fibres of X_t (all fibres when `sample`
/// is empty). Returns d_k x T.
[[nodiscard]] Matrix sum_fibers(const TensorSeries& x, std::size_t k,
                                const std::optional<FiberSampleSet>& sample = std::nullopt);

/// m0 independent draws; each per-mode subset is uniform without replacement
/// of size sizes[l]. sizes[k] is ignored.
[[nodiscard]] std::vector<FiberSampleSet> sample_index_sets(const Dims& dims, std::size_t k,
                                                            const std::vector<std::size_t>& sizes,
                                                            std::size_t m0, Rng& rng);

/// lambda_1 / lambda_j of a covariance matrix, j counted from 1 (the largest).
/// Throws ErrorKind::degenerate when lambda_j is numerically zero.
[[nodiscard]] double eigenvalue_ratio(const Matrix& cov, std::size_t j);

struct PreaverageConfig {
    std::size_t m0 = 200;
    std::size_t m = 5;
    /// n_l = max(1, floor(n_frac * d_l)) unless `sizes` is given.
    double n_frac = 0.5;
    std::vector<std::size_t> sizes;
    std::size_t z = 1;
    /// Eigenvalue rank used as the ER denominator; floor(min(T, d_k) / 2) if unset.
    std::optional<std::size_t> bulk_j;
};

struct PreaverageResult {
    LoadingEstimate estimate;
    /// The m retained samples, best score first.
    std::vector<FiberSampleSet> chosen;
    /// ER score of every draw, in draw order.
    std::vector<double> scores;
    /// Mean of the retained samples' centered covariances.
    Matrix aggregated_covariance;
};

[[nodiscard]] std::vector<std::size_t> subset_sizes(const Dims& dims, std::size_t k, const PreaverageConfig& cfg);

/// Pre-averaging estimate of the strongest mode-k directions: score m0 random
/// fibre samples by eigenvalue ratio, average the covariances of the best m,
/// return the top z eigenvectors. m = 1 gives the maximum-ratio estimator.
[[nodiscard]] PreaverageResult preaverage_direction(const TensorSeries& x, std::size_t k,
                                                    const PreaverageConfig& cfg, Rng& rng);

} // namespace tfm
