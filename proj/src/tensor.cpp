#include "tfm/tensor.hpp"

#include "tfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tfm {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::shape_mismatch: return "shape_mismatch";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::non_stationary: return "non_stationary";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

std::size_t product_except(std::span<const std::size_t> dims, std::size_t k) {
    std::size_t p = 1;
    for (std::size_t l = 0; l < dims.size(); ++l)
        if (l != k) p *= dims[l];
    return p;
}

namespace {

void check_dims(const Dims& dims) {
    if (dims.empty())
        throw Error(ErrorKind::invalid_argument, "tensor order must be at least 1");
    for (std::size_t d : dims)
        if (d == 0) throw Error(ErrorKind::invalid_argument, "tensor extents must be positive");
}

void check_mode(const Dims& dims, std::size_t k) {
    if (k >= dims.size())
        throw Error(ErrorKind::invalid_argument,
                    "mode index " + std::to_string(k) + " out of range for order " +
                        std::to_string(dims.size()));
}

// Strides of the (inner, d_k, outer) view of a column-major tensor.
struct ModeView {
    std::size_t inner;
    std::size_t extent;
    std::size_t outer;
};

ModeView mode_view(const Dims& dims, std::size_t k) {
    ModeView v{1, dims[k], 1};
    for (std::size_t l = 0; l < k; ++l) v.inner *= dims[l];
    for (std::size_t l = k + 1; l < dims.size(); ++l) v.outer *= dims[l];
    return v;
}

} // namespace

Tensor::Tensor(Dims dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(product(dims_), 0.0);
}

Tensor::Tensor(Dims dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != product(dims_))
        throw Error(ErrorKind::shape_mismatch, "tensor data length " + std::to_string(data_.size()) +
                                                   " does not match extents (" +
                                                   std::to_string(product(dims_)) + ")");
}

Tensor::Tensor(Dims dims, const Vector& data)
    : Tensor(std::move(dims), std::vector<double>(data.data(), data.data() + data.size())) {}

double Tensor::at(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size())
        throw Error(ErrorKind::shape_mismatch, "index arity does not match tensor order");
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (std::size_t l = 0; l < dims_.size(); ++l) {
        if (index[l] >= dims_[l]) throw Error(ErrorKind::invalid_argument, "tensor index out of range");
        flat += index[l] * stride;
        stride *= dims_[l];
    }
    return data_[flat];
}

TensorSeries::TensorSeries(Dims dims, Matrix columns) : dims_(std::move(dims)), columns_(std::move(columns)) {
    check_dims(dims_);
    if (static_cast<std::size_t>(columns_.rows()) != product(dims_))
        throw Error(ErrorKind::shape_mismatch, "series rows do not match tensor extents");
    if (columns_.cols() < 1) throw Error(ErrorKind::invalid_argument, "series must have at least one step");
}

TensorSeries::TensorSeries(Dims dims, const std::vector<Tensor>& steps) : dims_(std::move(dims)) {
    check_dims(dims_);
    if (steps.empty()) throw Error(ErrorKind::invalid_argument, "series must have at least one step");
    columns_.resize(static_cast<Eigen::Index>(product(dims_)), static_cast<Eigen::Index>(steps.size()));
    for (std::size_t t = 0; t < steps.size(); ++t) {
        if (steps[t].dims() != dims_)
            throw Error(ErrorKind::shape_mismatch, "step " + std::to_string(t) + " has different extents");
        columns_.col(static_cast<Eigen::Index>(t)) = steps[t].vec();
    }
}

Tensor TensorSeries::step(std::size_t t) const {
    if (t >= length()) throw Error(ErrorKind::invalid_argument, "time index out of range");
    return Tensor(dims_, Vector(columns_.col(static_cast<Eigen::Index>(t))));
}

Tensor TensorSeries::mean() const { return Tensor(dims_, Vector(columns_.rowwise().mean())); }

TensorSeries TensorSeries::scaled(double c) const { return TensorSeries(dims_, Matrix(c * columns_)); }

TensorSeries TensorSeries::shifted(const Tensor& offset) const {
    if (offset.dims() != dims_) throw Error(ErrorKind::shape_mismatch, "offset tensor has different extents");
    Matrix shifted = columns_.colwise() + offset.vec();
    return TensorSeries(dims_, std::move(shifted));
}

Matrix unfold(const Tensor& t, std::size_t k) {
    check_mode(t.dims(), k);
    const ModeView v = mode_view(t.dims(), k);
    Matrix m(static_cast<Eigen::Index>(v.extent), static_cast<Eigen::Index>(v.inner * v.outer));
    const auto data = t.data();
    for (std::size_t b = 0; b < v.outer; ++b)
        for (std::size_t i = 0; i < v.extent; ++i)
            for (std::size_t a = 0; a < v.inner; ++a)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + v.inner * b)) =
                    data[a + v.inner * (i + v.extent * b)];
    return m;
}

Tensor fold(const Matrix& m, const Dims& dims, std::size_t k) {
    check_dims(dims);
    check_mode(dims, k);
    const ModeView v = mode_view(dims, k);
    if (static_cast<std::size_t>(m.rows()) != v.extent ||
        static_cast<std::size_t>(m.cols()) != v.inner * v.outer)
        throw Error(ErrorKind::shape_mismatch,
                    "cannot fold a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        " matrix along mode " + std::to_string(k));
    std::vector<double> data(product(dims));
    for (std::size_t b = 0; b < v.outer; ++b)
        for (std::size_t i = 0; i < v.extent; ++i)
            for (std::size_t a = 0; a < v.inner; ++a)
                data[a + v.inner * (i + v.extent * b)] =
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + v.inner * b));
    return Tensor(dims, std::move(data));
}

Tensor kmode_product(const Tensor& t, const Matrix& a, std::size_t k) {
    check_mode(t.dims(), k);
    if (static_cast<std::size_t>(a.cols()) != t.dim(k))
        throw Error(ErrorKind::shape_mismatch, "k-mode product: matrix has " + std::to_string(a.cols()) +
                                                   " columns, mode extent is " + std::to_string(t.dim(k)));
    Dims out = t.dims();
    out[k] = static_cast<std::size_t>(a.rows());
    return fold(a * unfold(t, k), out, k);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix kron_chain_minus_k(std::span<const Matrix> mats, std::size_t k) {
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t l = mats.size(); l-- > 0;)
        if (l != k) out = kron(out, mats[l]);
    return out;
}

Vector kron_chain_minus_k(std::span<const Vector> vecs, std::size_t k) {
    Vector out = Vector::Ones(1);
    for (std::size_t l = vecs.size(); l-- > 0;) {
        if (l == k) continue;
        const Vector& v = vecs[l];
        Vector next(out.size() * v.size());
        for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * v.size(), v.size()) = out(i) * v;
        out = std::move(next);
    }
    return out;
}

Matrix centered_covariance(const Matrix& series) {
    if (series.cols() < 2)
        throw Error(ErrorKind::invalid_argument, "covariance needs at least two time steps");
    const Matrix centered = series.colwise() - series.rowwise().mean();
    return centered * centered.transpose() / static_cast<double>(series.cols());
}

void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > best) {
            best = std::abs(v(i));
            arg = i;
        }
    }
    if (v.size() > 0 && v(arg) < 0.0) v = -v;
}

namespace {

Matrix symmetrized(const Matrix& m) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::shape_mismatch, "eigen_sym expects a square matrix");
    if (!m.allFinite()) throw Error(ErrorKind::invalid_argument, "eigen_sym: matrix has non-finite entries");
    return 0.5 * (m + m.transpose());
}

std::vector<Eigen::Index> descending_order(const Vector& ascending) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ascending.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return ascending(a) > ascending(b); });
    return order;
}

} // namespace

EigenDecomposition top_eigen(const Matrix& m, std::size_t count) {
    const Matrix s = symmetrized(m);
    if (count > static_cast<std::size_t>(s.rows()))
        throw Error(ErrorKind::invalid_argument, "requested more eigenpairs than the matrix dimension");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::degenerate, "symmetric eigensolver failed");
    const auto order = descending_order(solver.eigenvalues());
    EigenDecomposition out;
    out.values.resize(static_cast<Eigen::Index>(count));
    out.vectors.resize(s.rows(), static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
        const auto src = order[j];
        const auto dst = static_cast<Eigen::Index>(j);
        out.values(dst) = solver.eigenvalues()(src);
        out.vectors.col(dst) = solver.eigenvectors().col(src);
        fix_sign(out.vectors.col(dst));
    }
    return out;
}

EigenDecomposition eigen_sym(const Matrix& m) { return top_eigen(m, static_cast<std::size_t>(m.rows())); }

Vector eigenvalues_sym(const Matrix& m) {
    const Matrix s = symmetrized(m);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::degenerate, "symmetric eigensolver failed");
    return solver.eigenvalues().reverse();
}

StackedUnfolding::StackedUnfolding(const TensorSeries& x, std::size_t k, bool center)
    : mode_(k), rows_(0), steps_(x.length()) {
    check_mode(x.dims(), k);
    const ModeView v = mode_view(x.dims(), k);
    rows_ = v.extent;
    const Vector mean = center ? Vector(x.columns().rowwise().mean()) : Vector::Zero(x.columns().rows());
    stacked_.resize(static_cast<Eigen::Index>(rows_ * steps_), static_cast<Eigen::Index>(v.inner * v.outer));
    for (std::size_t t = 0; t < steps_; ++t) {
        const auto col = x.columns().col(static_cast<Eigen::Index>(t));
        const auto row0 = static_cast<Eigen::Index>(t * rows_);
        for (std::size_t b = 0; b < v.outer; ++b)
            for (std::size_t i = 0; i < v.extent; ++i)
                for (std::size_t a = 0; a < v.inner; ++a) {
                    const auto flat = static_cast<Eigen::Index>(a + v.inner * (i + v.extent * b));
                    stacked_(row0 + static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + v.inner * b)) =
                        col(flat) - mean(flat);
                }
    }
}

Matrix StackedUnfolding::project(const Vector& w) const {
    if (w.size() != stacked_.cols())
        throw Error(ErrorKind::shape_mismatch, "projection vector has length " + std::to_string(w.size()) +
                                                   ", expected " + std::to_string(stacked_.cols()));
    return reshape_columns(stacked_ * w, rows_);
}

Matrix StackedUnfolding::mode_covariance() const {
    const auto d = static_cast<Eigen::Index>(rows_);
    Matrix s = Matrix::Zero(d, d);
    for (std::size_t t = 0; t < steps_; ++t) {
        const auto block = stacked_.middleRows(static_cast<Eigen::Index>(t) * d, d);
        s.selfadjointView<Eigen::Lower>().rankUpdate(block);
    }
    s = s.selfadjointView<Eigen::Lower>();
    return s / static_cast<double>(steps_);
}

Matrix StackedUnfolding::mode_covariance(const Matrix& right) const {
    if (right.rows() != stacked_.cols())
        throw Error(ErrorKind::shape_mismatch, "right factor does not match d_{-k}");
    const Matrix reduced = stacked_ * right;
    const auto d = static_cast<Eigen::Index>(rows_);
    Matrix s = Matrix::Zero(d, d);
    for (std::size_t t = 0; t < steps_; ++t)
        s.noalias() += reduced.middleRows(static_cast<Eigen::Index>(t) * d, d) *
                       reduced.middleRows(static_cast<Eigen::Index>(t) * d, d).transpose();
    return s / static_cast<double>(steps_);
}

Matrix reshape_columns(const Vector& v, std::size_t rows) {
    const auto r = static_cast<Eigen::Index>(rows);
    if (r == 0 || v.size() % r != 0) throw Error(ErrorKind::shape_mismatch, "cannot reshape vector");
    return Eigen::Map<const Matrix>(v.data(), r, v.size() / r);
}

} // namespace tfm
