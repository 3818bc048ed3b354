#pragma once

#include "tfm/rng.hpp"
#include "tfm/tensor.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tfm {

using ArCoeffs = std::array<double, 5>;

inline constexpr ArCoeffs kFactorAr{0.7, 0.3, -0.4, 0.2, -0.1};
inline constexpr ArCoeffs kCommonNoiseAr{-0.7, -0.3, -0.4, 0.2, 0.1};
inline constexpr ArCoeffs kIdiosyncraticAr{0.8, 0.4, -0.4, 0.2, -0.1};
inline constexpr std::size_t kArBurnIn = 500;

/// True when every root of the companion matrix lies strictly inside the unit circle.
[[nodiscard]] bool ar_is_stationary(std::span<const double> coeffs);

/// Autocovariances gamma_0..gamma_max_lag of a stationary AR(p) with unit
/// innovation variance, from the Yule-Walker equations.
[[nodiscard]] Vector ar_autocovariances(std::span<const double> coeffs, std::size_t max_lag);

/// AR stream of length T with N(0,1) innovations after a burn-in, divided by
/// the stationary standard deviation. Throws non_stationary.
[[nodiscard]] Vector gen_ar(std::size_t T, std::span<const double> coeffs, Rng& rng,
                            std::size_t burn_in = kArBurnIn);

/// Five-coefficient convenience wrapper around gen_ar.
[[nodiscard]] Vector gen_ar5(std::size_t T, const ArCoeffs& coeffs, Rng& rng);

/// d x r matrix B diag(d^{-zeta_j}) with B_ij ~ U(u1, u2).
[[nodiscard]] Matrix gen_loadings(std::size_t d, std::size_t r, double u1, double u2, std::span<const double> zeta,
                                  Rng& rng);

/// Haar-distributed d x d orthogonal matrix (QR of a Gaussian matrix, R with a
/// positive diagonal).
[[nodiscard]] Matrix random_orthogonal(std::size_t d, Rng& rng);

enum class Setting { Ia, Ib, IIa, IIb, IIIa, IIIb, custom };

[[nodiscard]] std::string_view to_string(Setting s) noexcept;
[[nodiscard]] Setting parse_setting(std::string_view tag);

struct DgpConfig {
    Dims dims{40, 40};
    std::size_t T = 100;
    std::vector<std::size_t> ranks{2, 2};
    std::size_t r_e = 10;
    double u1 = -2.0;
    double u2 = 2.0;
    /// zeta[k][j]; an empty outer vector means all zero. A shorter inner
    /// vector repeats its last entry.
    std::vector<std::vector<double>> zeta;
    ArCoeffs ar_factor = kFactorAr;
    ArCoeffs ar_common = kCommonNoiseAr;
    ArCoeffs ar_idio = kIdiosyncraticAr;
    double psi_sparsity = 0.7;
    double sigma_eig_lo = 1.0;
    double sigma_eig_hi = 3.0;
    /// One common-noise loading matrix for every mode-1 fibre, or one per fibre.
    bool shared_psi = false;
    /// false drops the noise term entirely.
    bool noise = true;
    std::uint64_t seed = 0;

    /// Throws ErrorKind::config on any violated invariant.
    void validate() const;
    [[nodiscard]] std::vector<double> zeta_for(std::size_t k) const;
};

/// Copy of `cfg` with the loading bounds and strengths of a named setting.
[[nodiscard]] DgpConfig apply_setting(DgpConfig cfg, Setting s);

struct DgpGroundTruth {
    std::vector<Matrix> loadings;
    /// Orthonormal bases of span(A_k) from the thin SVD.
    std::vector<Matrix> bases;
    Tensor mean;
    TensorSeries series;
};

/// Noise series built through the mode-1 unfolding:
/// xi_{t,l} = Psi e_t + Sigma_l^{1/2} eps_{t,l}.
[[nodiscard]] TensorSeries gen_noise_series(const DgpConfig& cfg, Rng& rng);

/// X_t = mu + F_t x_1 A_1 ... x_K A_K + E_t, seeded from cfg.seed.
[[nodiscard]] DgpGroundTruth simulate(const DgpConfig& cfg);

/// simulate(apply_setting(cfg, s)).
[[nodiscard]] DgpGroundTruth simulate_setting(const DgpConfig& cfg, Setting s);

/// Least-squares market betas, one per panel column (y is T x n, x has length T).
[[nodiscard]] Vector capm_betas(const Matrix& y, const Vector& x);

/// y_t - ybar - beta (x_t - xbar), column by column.
[[nodiscard]] Matrix capm_residuals(const Matrix& y, const Vector& x);

} // namespace tfm
