#pragma once

#include "tfm/loading.hpp"
#include "tfm/tensor.hpp"

#include <cstddef>
#include <vector>

namespace tfm {

/// Per-mode PCA with time as the replication axis: top-r_k eigenvectors of
/// (1/T) sum_t unfold_k(X_t - Xbar) unfold_k(X_t - Xbar)^T.
[[nodiscard]] std::vector<LoadingEstimate> hosvd(const TensorSeries& x, const std::vector<std::size_t>& ranks);

/// Higher-order orthogonal iteration started from hosvd, Jacobi sweeps.
[[nodiscard]] std::vector<LoadingEstimate> hooi(const TensorSeries& x, const std::vector<std::size_t>& ranks,
                                                std::size_t iters = 30);

/// sum_t |(X_t - Xbar) x_0 U_0^T ... x_{K-1} U_{K-1}^T|_F^2.
[[nodiscard]] double tucker_fit(const TensorSeries& x, const std::vector<LoadingEstimate>& loadings);

} // namespace tfm
