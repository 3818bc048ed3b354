#include "support.hpp"

#include "tfm/error.hpp"
#include "tfm/rank_boot.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

using namespace tfm;
using namespace tfm::testing;

namespace {

Matrix random_correlation(std::size_t d, std::size_t n, Rng& rng) {
    const Matrix z = random_matrix(d, n, rng);
    return correlation_from_covariance(z * z.transpose() / static_cast<double>(n));
}

std::size_t brute_force_count(const Matrix& r, double eta) {
    const Eigen::EigenSolver<Matrix> es(r, false);
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i).real() > 1.0 + eta) ++n;
    return n;
}

Vector spectrum(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<double> grid(int lo_tenths, int hi_tenths) {
    std::vector<double> g;
    for (int i = lo_tenths; i <= hi_tenths; ++i) g.push_back(i / 10.0);
    return g;
}

} // namespace

TEST(correlation_from_covariance, two_by_two_example) {
    Matrix s(2, 2);
    s << 4, 2, 2, 9;
    const Matrix r = correlation_from_covariance(s);
    EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(r(1, 1), 1.0);
    EXPECT_NEAR(r(0, 1), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(r(0, 1), r(1, 0));
}

TEST(correlation_from_covariance, dead_coordinate_is_degenerate) {
    Matrix s = Matrix::Identity(3, 3);
    s(2, 2) = 0.0;
    try {
        (void)correlation_from_covariance(s);
        FAIL() << "expected a degenerate error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    }
    EXPECT_THROW((void)correlation_from_covariance(Matrix::Identity(2, 3)), Error);
}

TEST(rank_threshold, diagonal_examples) {
    const Matrix r = Vector(spectrum({3.0, 1.5, 0.2})).asDiagonal();
    EXPECT_EQ(rank_threshold(r, 0.0), 2u);
    EXPECT_EQ(rank_threshold(r, 0.4), 2u);
    EXPECT_EQ(rank_threshold(r, 0.5), 1u);
    EXPECT_EQ(rank_threshold(r, 2.0), 0u);
    EXPECT_EQ(rank_threshold(Matrix::Identity(4, 4), 0.0), 0u);
    EXPECT_THROW((void)rank_threshold(r, -0.1), Error);
}

TEST(rank_threshold, matches_brute_force_on_random_correlations) {
    Rng rng(1);
    std::uniform_real_distribution<double> eta(0.0, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 3 + static_cast<std::size_t>(trial % 8);
        const Matrix r = random_correlation(d, 2 * d, rng);
        const double e = eta(rng);
        EXPECT_EQ(rank_threshold(r, e), brute_force_count(r, e));
    }
}

TEST(rank_threshold, monotone_in_eta) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix r = random_correlation(8, 12, rng);
        std::size_t prev = rank_threshold(r, 0.0);
        for (int i = 1; i <= 30; ++i) {
            const std::size_t now = rank_threshold(r, i * 0.1);
            EXPECT_LE(now, prev);
            prev = now;
        }
    }
}

TEST(bootstrap_weights, apply_equals_w_w_transpose) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 12);
        const BootstrapWeights w = bootstrap_weights(d, trial % 2 ? 0.5 : 1.0, rng);
        const Matrix m = w.to_matrix();
        const Vector q = random_vector(d, rng);
        EXPECT_LT(rel_diff(w.apply(q), m * m.transpose() * q), 1e-14);
        for (Eigen::Index i = 0; i < m.cols(); ++i) EXPECT_LE(m.col(i).sum(), 1.0);
        for (std::size_t t : w.target) EXPECT_LT(t, d);
    }
}

TEST(bootstrap_weights, keep_frequency_and_full_keep) {
    Rng rng(4);
    const BootstrapWeights all = bootstrap_weights(500, 1.0, rng);
    EXPECT_DOUBLE_EQ(all.to_matrix().sum(), 500.0);
    std::size_t kept = 0;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n / 100; ++i)
        for (std::uint8_t k : bootstrap_weights(100, 0.3, rng).keep) kept += k;
    // Binomial(20000, 0.3): sd about 65.
    EXPECT_NEAR(static_cast<double>(kept), 0.3 * n, 4 * 65.0);
}

TEST(bootstrap_weights, deterministic_and_validated) {
    Rng a(5), b(5);
    const BootstrapWeights wa = bootstrap_weights(30, 0.5, a);
    const BootstrapWeights wb = bootstrap_weights(30, 0.5, b);
    EXPECT_EQ(wa.target, wb.target);
    EXPECT_EQ(wa.keep, wb.keep);
    EXPECT_THROW((void)bootstrap_weights(0, 0.5, a), Error);
    EXPECT_THROW((void)bootstrap_weights(3, 0.0, a), Error);
    EXPECT_THROW((void)bootstrap_weights(3, 1.5, a), Error);
    EXPECT_THROW((void)wa.apply(Vector::Ones(4)), Error);
}

TEST(default_c_grid, step_and_extent) {
    const auto small = default_c_grid(100, 40);
    ASSERT_EQ(small.size(), 300u);
    EXPECT_DOUBLE_EQ(small.front(), 0.1);
    EXPECT_DOUBLE_EQ(small.back(), 30.0);
    const auto floor = default_c_grid(100, 5);
    EXPECT_EQ(floor.size(), 100u);
    EXPECT_DOUBLE_EQ(floor.back(), 10.0);
    const auto large = default_c_grid(200, 80);
    EXPECT_NEAR(large.back(), std::sqrt(200.0) * 7.0, 0.1);
}

TEST(select_rank, longest_plateau_midpoint) {
    // T = 100 so the threshold is 1 + C/10. Draw ranks: C <= 0.2 gives {2, 2},
    // C in [0.3, 0.5] gives {2, 1}, C >= 0.6 gives {1, 1}.
    const std::vector<Vector> spectra{spectrum({3.0, 1.055, 0.5}), spectrum({3.0, 1.025, 0.5})};
    const RankDecision d = select_rank(spectra, 100, grid(1, 10));
    EXPECT_DOUBLE_EQ(d.c_hat, 0.8);
    EXPECT_EQ(d.rank_hat, 1u);
    EXPECT_EQ(d.bootstrap_ranks, (std::vector<std::size_t>{1, 1}));
    ASSERT_EQ(d.variance_curve.size(), 10u);
    EXPECT_DOUBLE_EQ(d.variance_curve[0].second, 0.0);
    EXPECT_DOUBLE_EQ(d.variance_curve[2].second, 0.5);
    EXPECT_DOUBLE_EQ(d.variance_curve[9].second, 0.0);
}

TEST(select_rank, equal_plateaus_take_the_earliest) {
    const std::vector<Vector> spectra{spectrum({3.0, 1.035}), spectrum({3.0, 1.015})};
    const RankDecision d = select_rank(spectra, 100, grid(1, 4));
    EXPECT_DOUBLE_EQ(d.c_hat, 0.1);
    EXPECT_EQ(d.rank_hat, 2u);
}

TEST(select_rank, mode_ties_go_to_the_smaller_rank) {
    const std::vector<Vector> spectra{spectrum({3.0, 1.035}), spectrum({3.0, 1.015})};
    const RankDecision d = select_rank(spectra, 100, {0.3});
    EXPECT_EQ(d.rank_hat, 1u);
}

TEST(select_rank, contract_errors) {
    const std::vector<Vector> spectra{spectrum({2.0, 1.0})};
    EXPECT_THROW((void)select_rank({}, 100, {0.1}), Error);
    EXPECT_THROW((void)select_rank(spectra, 100, {}), Error);
    EXPECT_THROW((void)select_rank(spectra, 100, {0.0, 0.1}), Error);
    EXPECT_THROW((void)select_rank(spectra, 100, {0.2, 0.1}), Error);
    EXPECT_THROW((void)select_rank(spectra, 100, {0.1, 0.1}), Error);
}

TEST(estimate_rank, noiseless_rank_two) {
    Rng rng(6);
    const std::vector<Matrix> a{random_matrix(12, 2, rng), random_matrix(10, 1, rng)};
    const TensorSeries x = low_rank_series(a, 100, rng);
    ProjectionState state;
    state.directions = {random_vector(12, rng).normalized(), a[1].col(0).normalized()};
    Rng boot(7);
    const RankDecision d = estimate_rank(x, 0, state, RankConfig{}, boot);
    EXPECT_EQ(d.mode, 0u);
    EXPECT_EQ(d.rank_hat, 2u);
    EXPECT_EQ(d.degenerate_draws, 0u);
    EXPECT_EQ(d.bootstrap_ranks.size(), 50u);
}

TEST(estimate_rank, scale_invariant_and_deterministic) {
    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<Matrix> a{random_matrix(8, 2, rng), random_matrix(9, 2, rng)};
        Matrix cols = low_rank_series(a, 60, rng).columns() + 0.3 * random_matrix(72, 60, rng);
        const TensorSeries x({8, 9}, cols);
        ProjectionState state;
        state.directions = {random_vector(8, rng).normalized(), random_vector(9, rng).normalized()};
        RankConfig cfg;
        cfg.B = 20;
        Rng r1(11), r2(11), r3(11);
        const RankDecision base = estimate_rank(x, 1, state, cfg, r1);
        const RankDecision again = estimate_rank(x, 1, state, cfg, r2);
        const RankDecision scaled = estimate_rank(x.scaled(4.5), 1, state, cfg, r3);
        EXPECT_EQ(again.bootstrap_ranks, base.bootstrap_ranks);
        EXPECT_EQ(again.c_hat, base.c_hat);
        EXPECT_EQ(scaled.rank_hat, base.rank_hat);
        EXPECT_EQ(scaled.c_hat, base.c_hat);
    }
}

TEST(estimate_rank, contract_errors) {
    Rng rng(9);
    const TensorSeries x({3, 4}, random_matrix(12, 10, rng));
    ProjectionState state;
    state.directions = {Vector::Ones(3), Vector::Ones(4)};
    RankConfig cfg;
    EXPECT_THROW((void)estimate_rank(x, 2, state, cfg, rng), Error);
    cfg.B = 1;
    EXPECT_THROW((void)estimate_rank(x, 0, state, cfg, rng), Error);
    cfg.B = 10;
    ProjectionState short_state;
    short_state.directions = {Vector::Ones(3)};
    EXPECT_THROW((void)estimate_rank(x, 0, short_state, cfg, rng), Error);
}
