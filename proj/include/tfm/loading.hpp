#pragma once

#include "tfm/tensor.hpp"

#include <cstddef>
#include <string_view>

namespace tfm {

enum class Method { pre_averaged, max_er, projected, hosvd, hooi };

[[nodiscard]] std::string_view to_string(Method m) noexcept;

/// Orthonormal estimate of one mode's loading space (a single direction when
/// it has one column) with the eigenvalues it was extracted from.
struct LoadingEstimate {
    std::size_t mode = 0;
    Matrix columns;
    Vector eigenvalues;
    Method method = Method::pre_averaged;
};

} // namespace tfm
