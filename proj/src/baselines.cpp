#include "tfm/baselines.hpp"

#include "tfm/error.hpp"

#include <string>

namespace tfm {

namespace {

void check_ranks(const TensorSeries& x, const std::vector<std::size_t>& ranks) {
    if (x.length() < 2) throw Error(ErrorKind::invalid_argument, "need at least two time steps");
    if (ranks.size() != x.order()) throw Error(ErrorKind::shape_mismatch, "one rank per mode is required");
    for (std::size_t k = 0; k < ranks.size(); ++k)
        if (ranks[k] == 0 || ranks[k] > x.dim(k))
            throw Error(ErrorKind::invalid_argument, "rank for mode " + std::to_string(k) + " must lie in [1, " +
                                                         std::to_string(x.dim(k)) + "]");
}

LoadingEstimate leading_space(const Matrix& cov, std::size_t k, std::size_t rank, Method method, double floor) {
    EigenDecomposition eig = top_eigen(cov, rank);
    if (!(eig.values(0) > floor))
        throw Error(ErrorKind::degenerate, "mode " + std::to_string(k) + " covariance is zero after centering");
    return {k, std::move(eig.vectors), eig.values.cwiseMax(0.0), method};
}

double zero_floor(const TensorSeries& x) {
    const double raw = x.columns().squaredNorm() / static_cast<double>(x.columns().cols());
    return 1e-24 * raw;
}

} // namespace

std::vector<LoadingEstimate> hosvd(const TensorSeries& x, const std::vector<std::size_t>& ranks) {
    check_ranks(x, ranks);
    const double floor = zero_floor(x);
    std::vector<LoadingEstimate> out;
    for (std::size_t k = 0; k < x.order(); ++k)
        out.push_back(leading_space(StackedUnfolding(x, k).mode_covariance(), k, ranks[k], Method::hosvd, floor));
    return out;
}

std::vector<LoadingEstimate> hooi(const TensorSeries& x, const std::vector<std::size_t>& ranks, std::size_t iters) {
    check_ranks(x, ranks);
    if (iters == 0) throw Error(ErrorKind::invalid_argument, "HOOI needs at least one sweep");
    const std::size_t K = x.order();
    const double floor = zero_floor(x);

    std::vector<StackedUnfolding> unfoldings;
    unfoldings.reserve(K);
    for (std::size_t k = 0; k < K; ++k) unfoldings.emplace_back(x, k);

    std::vector<LoadingEstimate> current;
    for (std::size_t k = 0; k < K; ++k)
        current.push_back(leading_space(unfoldings[k].mode_covariance(), k, ranks[k], Method::hooi, floor));

    for (std::size_t sweep = 0; sweep < iters; ++sweep) {
        std::vector<Matrix> bases;
        for (const auto& est : current) bases.push_back(est.columns);
        std::vector<LoadingEstimate> next;
        for (std::size_t k = 0; k < K; ++k) {
            const Matrix right = kron_chain_minus_k(std::span<const Matrix>(bases), k);
            next.push_back(leading_space(unfoldings[k].mode_covariance(right), k, ranks[k], Method::hooi, floor));
        }
        current = std::move(next);
    }
    return current;
}

double tucker_fit(const TensorSeries& x, const std::vector<LoadingEstimate>& loadings) {
    if (loadings.size() != x.order()) throw Error(ErrorKind::shape_mismatch, "one loading per mode is required");
    std::vector<Matrix> bases;
    for (const auto& est : loadings) bases.push_back(est.columns);
    const Matrix right = kron_chain_minus_k(std::span<const Matrix>(bases), 0);
    const StackedUnfolding u(x, 0);
    const Matrix cov = u.mode_covariance(right);
    // trace(U^T S U) * T, S the reduced mode-0 second moment.
    return (bases[0].transpose() * cov * bases[0]).trace() * static_cast<double>(x.length());
}

} // namespace tfm
