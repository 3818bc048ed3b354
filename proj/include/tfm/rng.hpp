#pragma once

#include <cstdint>
#include <random>

namespace tfm {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for stream `index` derived from `base`. Bijective in `index` for a
/// fixed base, so distinct replications never share a stream.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(mix64(base) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

} // namespace tfm
