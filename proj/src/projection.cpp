#include "tfm/projection.hpp"

#include "tfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tfm {

namespace {

Matrix second_moment(const Matrix& y) { return y * y.transpose() / static_cast<double>(y.cols()); }

void check_series(const TensorSeries& x) {
    if (x.length() < 2) throw Error(ErrorKind::invalid_argument, "projection needs at least two time steps");
}

Vector leading_direction(const StackedUnfolding& u, const Vector& q_minus_k) {
    const Matrix y = u.project(q_minus_k);
    if (!(y.squaredNorm() > 0.0))
        throw Error(ErrorKind::degenerate,
                    "projected data for mode " + std::to_string(u.mode()) + " is identically zero");
    return top_eigen(second_moment(y), 1).vectors.col(0);
}

} // namespace

Matrix project_data(const TensorSeries& x, std::size_t k, const Vector& q_minus_k) {
    check_series(x);
    if (k >= x.order()) throw Error(ErrorKind::invalid_argument, "mode index out of range");
    if (static_cast<std::size_t>(q_minus_k.size()) != product_except(x.dims(), k))
        throw Error(ErrorKind::shape_mismatch, "projection vector length does not equal d_{-k}");
    if (!(q_minus_k.norm() > 0.0)) throw Error(ErrorKind::invalid_argument, "projection vector is zero");
    return StackedUnfolding(x, k).project(q_minus_k);
}

double aligned_distance(const Vector& a, const Vector& b) { return std::min((a - b).norm(), (a + b).norm()); }

Vector minus_k_direction(const std::vector<Vector>& directions, std::size_t k) {
    return kron_chain_minus_k(std::span<const Vector>(directions), k);
}

ProjectionState refine_directions(const TensorSeries& x, std::vector<Vector> init, const RefineConfig& cfg) {
    check_series(x);
    const std::size_t K = x.order();
    if (init.size() != K) throw Error(ErrorKind::shape_mismatch, "one initial direction per mode is required");
    if (cfg.max_iters == 0) throw Error(ErrorKind::invalid_argument, "at least one refinement sweep is required");
    for (std::size_t k = 0; k < K; ++k) {
        if (static_cast<std::size_t>(init[k].size()) != x.dim(k))
            throw Error(ErrorKind::shape_mismatch, "initial direction for mode " + std::to_string(k) +
                                                       " has the wrong length");
        const double norm = init[k].norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw Error(ErrorKind::invalid_argument, "initial direction must be finite and non-zero");
        init[k] /= norm;
    }

    std::vector<StackedUnfolding> unfoldings;
    unfoldings.reserve(K);
    for (std::size_t k = 0; k < K; ++k) unfoldings.emplace_back(x, k);

    ProjectionState state;
    state.directions = std::move(init);
    while (state.iterations < cfg.max_iters) {
        const std::vector<Vector> previous = state.directions;
        const std::vector<Vector>& source = cfg.order == SweepOrder::jacobi ? previous : state.directions;
        double change = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            Vector next = leading_direction(unfoldings[k], minus_k_direction(source, k));
            change = std::max(change, aligned_distance(next, previous[k]));
            state.directions[k] = std::move(next);
        }
        ++state.iterations;
        state.history.push_back(change);
        if (change < cfg.tolerance) break;
    }
    return state;
}

LoadingEstimate estimate_loading_space(const TensorSeries& x, std::size_t k, const ProjectionState& state,
                                       std::size_t rank) {
    check_series(x);
    if (k >= x.order()) throw Error(ErrorKind::invalid_argument, "mode index out of range");
    if (state.directions.size() != x.order())
        throw Error(ErrorKind::shape_mismatch, "projection state does not match tensor order");
    if (rank == 0 || rank > x.dim(k)) throw Error(ErrorKind::invalid_argument, "rank must lie in [1, d_k]");
    const Matrix y = project_data(x, k, minus_k_direction(state.directions, k));
    if (!(y.squaredNorm() > 0.0)) throw Error(ErrorKind::degenerate, "projected data is identically zero");
    EigenDecomposition eig = top_eigen(second_moment(y), rank);
    return {k, std::move(eig.vectors), eig.values.cwiseMax(0.0), Method::projected};
}

} // namespace tfm
