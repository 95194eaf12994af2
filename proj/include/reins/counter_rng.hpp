#pragma once

#include <cstdint>

namespace reins::mc {

// Counter-based uniform stream: draw k of stream s is a pure function of
// (seed, s, k), so path i is bit-identical under any parallel schedule and
// draws stay aligned across policies (common random numbers).
namespace rng {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64((stream + 1) * kGamma));
}

inline std::uint64_t bits(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + (counter + 1) * kGamma);
}

/// Uniform on the open interval (0,1); never 0, so log() is safe.
inline double uniform_open(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(bits(key, counter) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace rng
}  // namespace reins::mc
