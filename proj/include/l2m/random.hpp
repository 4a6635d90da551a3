#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace l2m {

// Seedable, platform-independent random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are not portable, so uniform and
// normal variates are produced here: uniforms from the top 53 bits, normals
// by Box-Muller (both values of each pair are used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  double normal();

  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Stream-split rule: an independent child seed for (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

// Named sub-streams so one user seed drives several independent consumers.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kDropout = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kPosteriorSample = 4;
inline constexpr std::uint64_t kHmc = 5;
inline constexpr std::uint64_t kPrior = 6;
}  // namespace streams

}  // namespace l2m
