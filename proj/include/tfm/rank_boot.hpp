#pragma once

#include "tfm/projection.hpp"
#include "tfm/rng.hpp"
#include "tfm/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace tfm {

/// R = D^{-1/2} S D^{-1/2}, D = diag(S). A non-positive diagonal entry (a dead
/// coordinate) raises ErrorKind::degenerate.
[[nodiscard]] Matrix correlation_from_covariance(const Matrix& s);

/// Number of eigenvalues of `r` strictly above 1 + eta (0 if none).
[[nodiscard]] std::size_t rank_threshold(const Matrix& r, double eta);

/// Same count on an already computed descending spectrum.
[[nodiscard]] std::size_t count_above(const Vector& descending, double threshold);

/// Sparse d_{-k} x d_{-k} resampling matrix W: column i has the single entry
/// keep[i] (0 or 1) in row target[i].
struct BootstrapWeights {
    std::vector<std::size_t> target;
    std::vector<std::uint8_t> keep;

    [[nodiscard]] std::size_t size() const noexcept { return target.size(); }
    /// W W^T q: entry j is q_j times the number of kept columns aimed at j.
    [[nodiscard]] Vector apply(const Vector& q) const;
    [[nodiscard]] Matrix to_matrix() const;
};

/// Targets uniform on [0, d_minus_k), keep flags Bernoulli(p).
[[nodiscard]] BootstrapWeights bootstrap_weights(std::size_t d_minus_k, double p, Rng& rng);

/// C = 0.1, 0.2, ... up to the C whose threshold 1 + C/sqrt(T) reaches
/// d_{-k}/10, and never below 10.
[[nodiscard]] std::vector<double> default_c_grid(std::size_t T, std::size_t d_minus_k);

struct RankConfig {
    std::size_t B = 50;
    double p = 1.0;
    /// Empty selects default_c_grid for the data at hand.
    std::vector<double> c_grid;
};

struct RankDecision {
    std::size_t mode = 0;
    std::size_t rank_hat = 0;
    double c_hat = 0.0;
    /// Ranks of the usable bootstrap draws at c_hat.
    std::vector<std::size_t> bootstrap_ranks;
    /// (C, sample variance of the bootstrap ranks at C) over the grid.
    std::vector<std::pair<double, double>> variance_curve;
    /// Draws skipped because a coordinate of the projected data was dead.
    std::size_t degenerate_draws = 0;
};

/// Correlation-matrix spectra of the bootstrapped projected data, one per
/// usable draw (descending). `skipped` receives the number of dead draws.
[[nodiscard]] std::vector<Vector> bootstrap_spectra(const TensorSeries& x, std::size_t k, const ProjectionState& state,
                                                    const RankConfig& cfg, Rng& rng, std::size_t* skipped = nullptr);

/// Picks C from the grid given per-draw spectra and the sample length T and
/// returns the decision (mode left at 0).
[[nodiscard]] RankDecision select_rank(const std::vector<Vector>& spectra, std::size_t T,
                                       const std::vector<double>& c_grid);

/// Bootstrap correlation thresholding for mode k.
[[nodiscard]] RankDecision estimate_rank(const TensorSeries& x, std::size_t k, const ProjectionState& state,
                                         const RankConfig& cfg, Rng& rng);

} // namespace tfm
