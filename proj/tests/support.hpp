#pragma once

#include "tfm/rng.hpp"
#include "tfm/tensor.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>
#include <vector>

namespace tfm::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n(rng);
    return m;
}

inline Vector random_vector(std::size_t n, Rng& rng) { return random_matrix(n, 1, rng).col(0); }

inline Dims random_dims(std::size_t K, std::size_t lo, std::size_t hi, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(lo, hi);
    Dims d(K);
    for (auto& x : d) x = pick(rng);
    return d;
}

inline Tensor random_tensor(const Dims& dims, Rng& rng) {
    return Tensor(dims, random_vector(product(dims), rng));
}

/// Orthonormal d x r basis.
inline Matrix random_basis(std::size_t d, std::size_t r, Rng& rng) {
    const Eigen::HouseholderQR<Matrix> qr(random_matrix(d, r, rng));
    return qr.householderQ() * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
}

/// Noise-free series mu + F_t x_1 A_1 ... x_K A_K with Gaussian F_t.
inline TensorSeries low_rank_series(const std::vector<Matrix>& loadings, std::size_t T, Rng& rng, double mean_scale = 1.0) {
    Dims dims;
    std::size_t core = 1;
    for (const auto& a : loadings) {
        dims.push_back(static_cast<std::size_t>(a.rows()));
        core *= static_cast<std::size_t>(a.cols());
    }
    const Matrix chain = kron_chain_minus_k(std::span<const Matrix>(loadings), loadings.size());
    Matrix cols = chain * random_matrix(core, T, rng);
    cols.colwise() += mean_scale * random_vector(product(dims), rng);
    return {dims, std::move(cols)};
}

/// Largest |entry| of a - b relative to max(1, |b|_max).
inline double rel_diff(const Matrix& a, const Matrix& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double orthonormality_defect(const Matrix& q) {
    return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

// Visits every multi-index of `dims` with index 0 fastest.
template <class F>
inline void for_each_index(const Dims& dims, F&& f) {
    std::vector<std::size_t> idx(dims.size(), 0);
    const std::size_t n = product(dims);
    for (std::size_t flat = 0; flat < n; ++flat) {
        f(idx);
        for (std::size_t l = 0; l < dims.size(); ++l) {
            if (++idx[l] < dims[l]) break;
            idx[l] = 0;
        }
    }
}

inline std::size_t unfold_column(const Dims& dims, const std::vector<std::size_t>& idx, std::size_t k) {
    std::size_t j = 0, stride = 1;
    for (std::size_t l = 0; l < dims.size(); ++l) {
        if (l == k) continue;
        j += idx[l] * stride;
        stride *= dims[l];
    }
    return j;
}

// Element-sum definition of the k-mode product.
inline Tensor naive_kmode(const Tensor& t, const Matrix& a, std::size_t k) {
    Dims out_dims = t.dims();
    out_dims[k] = static_cast<std::size_t>(a.rows());
    std::vector<double> out(product(out_dims), 0.0);
    std::size_t flat = 0;
    for_each_index(out_dims, [&](const std::vector<std::size_t>& idx) {
        std::vector<std::size_t> src = idx;
        double s = 0.0;
        for (std::size_t i = 0; i < t.dim(k); ++i) {
            src[k] = i;
            s += a(static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(i)) * t.at(src);
        }
        out[flat++] = s;
    });
    return {out_dims, out};
}

} // namespace tfm::testing
