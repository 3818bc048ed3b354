#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Product of all extents.
[[nodiscard]] std::size_t product(std::span<const std::size_t> dims);

/// Product of all extents except mode k (d_{-k}). Equals 1 for K = 1.
[[nodiscard]] std::size_t product_except(std::span<const std::size_t> dims, std::size_t k);

/// Dense order-K tensor in generalized column-major order (index 0 fastest).
///
/// Values are fixed at construction; every operation returns a new tensor.
class Tensor {
public:
    /// Zero-filled tensor.
    explicit Tensor(Dims dims);
    Tensor(Dims dims, std::vector<double> data);
    Tensor(Dims dims, const Vector& data);

    [[nodiscard]] std::size_t order() const noexcept { return dims_.size(); }
    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t dim(std::size_t k) const { return dims_.at(k); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] double operator[](std::size_t flat) const { return data_[flat]; }
    [[nodiscard]] double at(std::span<const std::size_t> index) const;

    /// The tensor as vec(X), i.e. its storage order.
    [[nodiscard]] Eigen::Map<const Vector> vec() const noexcept {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }

    bool operator==(const Tensor&) const = default;

private:
    Dims dims_;
    std::vector<double> data_;
};

/// A sequence of T tensors sharing one shape. Stored as an N x T matrix whose
/// column t is vec(X_t).
class TensorSeries {
public:
    TensorSeries(Dims dims, Matrix columns);
    TensorSeries(Dims dims, const std::vector<Tensor>& steps);

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t order() const noexcept { return dims_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t k) const { return dims_.at(k); }
    [[nodiscard]] std::size_t length() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
    [[nodiscard]] const Matrix& columns() const noexcept { return columns_; }
    [[nodiscard]] Tensor step(std::size_t t) const;
    [[nodiscard]] Tensor mean() const;

    [[nodiscard]] TensorSeries scaled(double c) const;
    [[nodiscard]] TensorSeries shifted(const Tensor& offset) const;

private:
    Dims dims_;
    Matrix columns_;
};

/// Mode-k unfolding, d_k x d_{-k}. Column j collects the fibre at
/// (i_0..i_{k-1}, ., i_{k+1}..i_{K-1}) with j = sum_{l != k} i_l J_l,
/// J_l = prod_{m < l, m != k} d_m.
[[nodiscard]] Matrix unfold(const Tensor& t, std::size_t k);

/// Inverse of unfold.
[[nodiscard]] Tensor fold(const Matrix& m, const Dims& dims, std::size_t k);

/// t x_k a: every mode-k fibre pre-multiplied by a (I x d_k).
[[nodiscard]] Tensor kmode_product(const Tensor& t, const Matrix& a, std::size_t k);

[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

/// M_{K-1} (x) ... (x) M_{k+1} (x) M_{k-1} (x) ... (x) M_0. A chain with no
/// factors left is the 1 x 1 identity.
[[nodiscard]] Matrix kron_chain_minus_k(std::span<const Matrix> mats, std::size_t k);
[[nodiscard]] Vector kron_chain_minus_k(std::span<const Vector> vecs, std::size_t k);

/// (1/T) sum_t (x_t - xbar)(x_t - xbar)^T for an n x T matrix of
/// observations (one column per time step).
[[nodiscard]] Matrix centered_covariance(const Matrix& series);

/// Eigenpairs of a symmetric matrix, values descending. Equal values keep
/// the solver's order. Each vector has its largest-magnitude entry
/// non-negative (lowest index wins ties).
struct EigenDecomposition {
    Vector values;
    Matrix vectors;
};

[[nodiscard]] EigenDecomposition eigen_sym(const Matrix& m);

/// Leading `count` eigenpairs, same conventions as eigen_sym.
[[nodiscard]] EigenDecomposition top_eigen(const Matrix& m, std::size_t count);

/// Eigenvalues only, descending.
[[nodiscard]] Vector eigenvalues_sym(const Matrix& m);

/// Applies the sign convention of EigenDecomposition to a single vector.
void fix_sign(Eigen::Ref<Vector> v);

/// Centered mode-k unfoldings of a whole series stacked vertically:
/// rows [t*d_k, (t+1)*d_k) hold unfold_k(X_t - Xbar).
class StackedUnfolding {
public:
    StackedUnfolding(const TensorSeries& x, std::size_t k, bool center = true);

    [[nodiscard]] std::size_t mode() const noexcept { return mode_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t fibres() const noexcept { return static_cast<std::size_t>(stacked_.cols()); }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return stacked_; }

    /// Column t of the result is unfold_k(X_t - Xbar) * w (d_k x T).
    [[nodiscard]] Matrix project(const Vector& w) const;

    /// (1/T) sum_t M_t M_t^T with M_t = unfold_k(X_t - Xbar).
    [[nodiscard]] Matrix mode_covariance() const;

    /// (1/T) sum_t (M_t B)(M_t B)^T for a d_{-k} x c matrix B.
    [[nodiscard]] Matrix mode_covariance(const Matrix& right) const;

private:
    std::size_t mode_;
    std::size_t rows_;
    std::size_t steps_;
    Matrix stacked_;
};

/// Reshape a length-(d*T) vector, d fastest, into d x T.
[[nodiscard]] Matrix reshape_columns(const Vector& v, std::size_t rows);

} // namespace tfm
