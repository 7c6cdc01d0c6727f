#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace rtlevo {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent stream for (seed, generation, slot); lets offspring be produced
// in any order without perturbing each other's draws.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t generation, std::uint64_t slot) noexcept;
inline Rng stream_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t slot) noexcept {
  return Rng(stream_seed(seed, generation, slot));
}

// The helpers below avoid the standard distributions, whose output is
// implementation-defined, so recorded runs replay identically everywhere.

// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;
double uniform_real(Rng& rng, double lo, double hi) noexcept;
// Uniform in [0, n); n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n) noexcept;
// Index drawn from nonnegative weights (need not be normalized). Falls back
// to uniform when the total weight is not positive.
std::size_t sample_index(std::span<const double> weights, Rng& rng) noexcept;

// FNV-1a, for deterministic content-derived seeds.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 1469598103934665603ull) noexcept;

}  // namespace rtlevo
