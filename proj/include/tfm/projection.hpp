#pragma once

#include "tfm/loading.hpp"
#include "tfm/tensor.hpp"

#include <cstddef>
#include <vector>

namespace tfm {

/// Per-mode unit directions after some number of refinement sweeps.
struct ProjectionState {
    std::size_t iterations = 0;
    std::vector<Vector> directions;
    /// history[i] = max_k sign-aligned change of the direction in sweep i + 1.
    std::vector<double> history;
};

enum class SweepOrder {
    /// Every mode updates from the previous sweep's directions.
    jacobi,
    /// Each mode sees directions already updated earlier in the same sweep.
    gauss_seidel,
};

struct RefineConfig {
    std::size_t max_iters = 30;
    /// Stop once the largest direction change in a sweep falls below this.
    double tolerance = 1e-8;
    SweepOrder order = SweepOrder::jacobi;
};

/// y_t = unfold_k(X_t - Xbar) q_{-k}; returns d_k x T.
[[nodiscard]] Matrix project_data(const TensorSeries& x, std::size_t k, const Vector& q_minus_k);

/// min(|a - b|, |a + b|).
[[nodiscard]] double aligned_distance(const Vector& a, const Vector& b);

/// Kronecker chain of every direction except mode k's.
[[nodiscard]] Vector minus_k_direction(const std::vector<Vector>& directions, std::size_t k);

/// Iterative projection: each sweep projects the data on the Kronecker product
/// of the other modes' directions and keeps the leading eigenvector of the
/// projected second-moment matrix.
[[nodiscard]] ProjectionState refine_directions(const TensorSeries& x, std::vector<Vector> init,
                                                const RefineConfig& cfg = {});

/// Leading `rank` eigenvectors of the projected second moment built from the
/// state's other-mode directions.
[[nodiscard]] LoadingEstimate estimate_loading_space(const TensorSeries& x, std::size_t k,
                                                     const ProjectionState& state, std::size_t rank);

} // namespace tfm
