#include "support.hpp"

#include "tfm/error.hpp"

#include <gtest/gtest.h>

using namespace tfm;
using namespace tfm::testing;

namespace {

Matrix naive_kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index p = 0; p < b.rows(); ++p)
                for (Eigen::Index q = 0; q < b.cols(); ++q)
                    out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
    return out;
}

constexpr double kTol = 1e-10;

} // namespace

TEST(tensor, storage_is_column_major) {
    const Tensor t({2, 3}, std::vector<double>{0, 1, 2, 3, 4, 5});
    const std::vector<std::size_t> idx{1, 2};
    EXPECT_EQ(t.at(idx), 5.0);
    const std::vector<std::size_t> idx2{0, 1};
    EXPECT_EQ(t.at(idx2), 2.0);
}

TEST(tensor, rejects_bad_shapes) {
    EXPECT_THROW(Tensor(Dims{2, 0}), Error);
    EXPECT_THROW(Tensor(Dims{2, 2}, std::vector<double>{1, 2, 3}), Error);
    const Tensor t({2, 2});
    EXPECT_THROW((void)unfold(t, 2), Error);
    EXPECT_THROW((void)kmode_product(t, Matrix::Ones(3, 3), 0), Error);
}

TEST(tensor, unfold_matrix_case) {
    // For K = 2 the mode-1 unfolding is the matrix itself and mode 2 its transpose.
    Rng rng(1);
    const Matrix m = random_matrix(3, 4, rng);
    const Tensor t({3, 4}, Vector(m.reshaped()));
    EXPECT_LT(rel_diff(unfold(t, 0), m), kTol);
    EXPECT_LT(rel_diff(unfold(t, 1), m.transpose()), kTol);
}

TEST(tensor_property, unfold_matches_index_formula_and_round_trips) {
    Rng rng(20240601);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t K = 2 + static_cast<std::size_t>(trial % 3);
        const Dims dims = random_dims(K, 1, 5, rng);
        const Tensor t = random_tensor(dims, rng);
        for (std::size_t k = 0; k < K; ++k) {
            const Matrix u = unfold(t, k);
            ASSERT_EQ(static_cast<std::size_t>(u.rows()), dims[k]);
            ASSERT_EQ(static_cast<std::size_t>(u.cols()), product_except(dims, k));
            for_each_index(dims, [&](const std::vector<std::size_t>& idx) {
                ASSERT_EQ(u(static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(unfold_column(dims, idx, k))),
                          t.at(idx));
            });
            EXPECT_EQ(fold(u, dims, k), t);
        }
    }
}

TEST(tensor_property, kmode_product_matches_element_sums) {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t K = 2 + static_cast<std::size_t>(trial % 3);
        const Dims dims = random_dims(K, 1, 4, rng);
        const Tensor t = random_tensor(dims, rng);
        const std::size_t k = static_cast<std::size_t>(trial) % K;
        const Matrix a = random_matrix(1 + static_cast<std::size_t>(trial % 4), dims[k], rng);
        const Tensor got = kmode_product(t, a, k);
        const Tensor want = naive_kmode(t, a, k);
        ASSERT_EQ(got.dims(), want.dims());
        EXPECT_LT(rel_diff(got.vec(), want.vec()), kTol);
        // mat_k(X x_k A) = A mat_k(X)
        EXPECT_LT(rel_diff(unfold(got, k), a * unfold(t, k)), kTol);
    }
}

TEST(tensor_property, full_multilinear_product_identities) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t K = 2 + static_cast<std::size_t>(trial % 3);
        const Dims dims = random_dims(K, 1, 4, rng);
        const Tensor f = random_tensor(dims, rng);
        std::vector<Matrix> a;
        for (std::size_t l = 0; l < K; ++l) a.push_back(random_matrix(1 + (l + trial) % 4, dims[l], rng));
        Tensor x = f;
        for (std::size_t l = 0; l < K; ++l) x = kmode_product(x, a[l], l);

        // vec(F x_1 A_1 ... x_K A_K) = (A_K (x) ... (x) A_1) vec(F)
        const Matrix chain = kron_chain_minus_k(std::span<const Matrix>(a), K);
        EXPECT_LT(rel_diff(x.vec(), chain * f.vec()), kTol);

        // mat_k(X) = A_k mat_k(F) A_{-k}^T
        for (std::size_t k = 0; k < K; ++k) {
            const Matrix minus_k = kron_chain_minus_k(std::span<const Matrix>(a), k);
            EXPECT_LT(rel_diff(unfold(x, k), a[k] * unfold(f, k) * minus_k.transpose()), kTol);
        }
    }
}

TEST(tensor_property, mode_products_commute_across_modes) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t K = 2 + static_cast<std::size_t>(trial % 3);
        const Dims dims = random_dims(K, 1, 4, rng);
        const Tensor t = random_tensor(dims, rng);
        const std::size_t k = static_cast<std::size_t>(trial) % K;
        const std::size_t l = (k + 1) % K;
        const Matrix a = random_matrix(3, dims[k], rng);
        const Matrix b = random_matrix(2, dims[l], rng);
        const Tensor ab = kmode_product(kmode_product(t, a, k), b, l);
        const Tensor ba = kmode_product(kmode_product(t, b, l), a, k);
        EXPECT_LT(rel_diff(ab.vec(), ba.vec()), kTol);

        // Same mode composes: (X x_k A) x_k C = X x_k (C A).
        const Matrix c = random_matrix(2, 3, rng);
        const Tensor twice = kmode_product(kmode_product(t, a, k), c, k);
        EXPECT_LT(rel_diff(twice.vec(), kmode_product(t, c * a, k).vec()), kTol);
    }
}

TEST(tensor, kron_matches_definition) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_matrix(1 + trial % 3, 1 + trial % 4, rng);
        const Matrix b = random_matrix(2 + trial % 2, 1 + trial % 3, rng);
        EXPECT_LT(rel_diff(kron(a, b), naive_kron(a, b)), kTol);
    }
}

TEST(tensor, kron_chain_skips_mode_and_orders_last_first) {
    Rng rng(4);
    std::vector<Matrix> m{random_matrix(2, 2, rng), random_matrix(3, 1, rng), random_matrix(2, 3, rng)};
    EXPECT_LT(rel_diff(kron_chain_minus_k(std::span<const Matrix>(m), 1), naive_kron(m[2], m[0])), kTol);
    EXPECT_LT(rel_diff(kron_chain_minus_k(std::span<const Matrix>(m), 3), naive_kron(naive_kron(m[2], m[1]), m[0])),
              kTol);
    std::vector<Vector> v{random_vector(2, rng), random_vector(3, rng)};
    const Matrix want = naive_kron(v[1], v[0]);
    EXPECT_LT(rel_diff(kron_chain_minus_k(std::span<const Vector>(v), 5), want), kTol);
    EXPECT_LT(rel_diff(kron_chain_minus_k(std::span<const Vector>(v), 0), v[1]), kTol);
}

TEST(tensor, eigen_sym_orders_and_signs) {
    Matrix m(3, 3);
    m << 2, 0, 0, 0, 5, 0, 0, 0, 1;
    const EigenDecomposition e = eigen_sym(m);
    EXPECT_NEAR(e.values(0), 5.0, 1e-12);
    EXPECT_NEAR(e.values(2), 1.0, 1e-12);
    EXPECT_NEAR(e.vectors(1, 0), 1.0, 1e-12);
    Rng rng(9);
    const Matrix g = random_matrix(6, 6, rng);
    const EigenDecomposition r = eigen_sym(g * g.transpose());
    for (Eigen::Index j = 0; j < 6; ++j) {
        Eigen::Index arg = 0;
        r.vectors.col(j).cwiseAbs().maxCoeff(&arg);
        EXPECT_GE(r.vectors(arg, j), 0.0);
        if (j > 0) EXPECT_GE(r.values(j - 1), r.values(j));
    }
    EXPECT_LT(orthonormality_defect(r.vectors), 1e-12);
    EXPECT_LT(rel_diff(r.vectors * r.values.asDiagonal() * r.vectors.transpose(), g * g.transpose()), 1e-10);
    EXPECT_THROW((void)eigen_sym(Matrix::Constant(2, 2, std::nan(""))), Error);
}

TEST(tensor, centered_covariance_matches_definition) {
    Rng rng(10);
    const Matrix x = random_matrix(3, 7, rng);
    Matrix want = Matrix::Zero(3, 3);
    const Vector mean = x.rowwise().mean();
    for (Eigen::Index t = 0; t < 7; ++t) want += (x.col(t) - mean) * (x.col(t) - mean).transpose();
    want /= 7.0;
    EXPECT_LT(rel_diff(centered_covariance(x), want), 1e-12);
    EXPECT_THROW((void)centered_covariance(x.leftCols(1)), Error);
}

TEST(tensor, series_mean_scale_shift) {
    Rng rng(11);
    const Dims dims{2, 3};
    std::vector<Tensor> steps;
    for (int t = 0; t < 4; ++t) steps.push_back(random_tensor(dims, rng));
    const TensorSeries x(dims, steps);
    EXPECT_EQ(x.length(), 4u);
    EXPECT_EQ(x.step(2), steps[2]);
    Vector mean = Vector::Zero(6);
    for (const auto& s : steps) mean += s.vec();
    EXPECT_LT(rel_diff(x.mean().vec(), mean / 4.0), 1e-14);
    EXPECT_LT(rel_diff(x.scaled(2.0).columns(), 2.0 * x.columns()), 1e-14);
    const Tensor off = random_tensor(dims, rng);
    EXPECT_LT(rel_diff(x.shifted(off).step(1).vec(), steps[1].vec() + off.vec()), 1e-14);
}

TEST(tensor, stacked_unfolding_blocks_are_centered_unfoldings) {
    Rng rng(12);
    const Dims dims{3, 2, 4};
    std::vector<Tensor> steps;
    for (int t = 0; t < 5; ++t) steps.push_back(random_tensor(dims, rng));
    const TensorSeries x(dims, steps);
    const Tensor mean = x.mean();
    for (std::size_t k = 0; k < 3; ++k) {
        const StackedUnfolding u(x, k);
        const auto dk = static_cast<Eigen::Index>(dims[k]);
        Matrix cov = Matrix::Zero(dk, dk);
        for (Eigen::Index t = 0; t < 5; ++t) {
            const Matrix want = unfold(steps[static_cast<std::size_t>(t)], k) - unfold(mean, k);
            EXPECT_LT(rel_diff(u.matrix().middleRows(t * dk, dk), want), 1e-12);
            cov += want * want.transpose();
        }
        EXPECT_LT(rel_diff(u.mode_covariance(), cov / 5.0), 1e-12);
        const Vector w = random_vector(product_except(dims, k), rng);
        const Matrix proj = u.project(w);
        for (Eigen::Index t = 0; t < 5; ++t)
            EXPECT_LT(rel_diff(proj.col(t), (unfold(steps[static_cast<std::size_t>(t)], k) - unfold(mean, k)) * w),
                      1e-12);
        const StackedUnfolding raw(x, k, false);
        EXPECT_LT(rel_diff(raw.matrix().topRows(dk), unfold(steps[0], k)), 1e-12);
    }
}
