#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mdsearch {

// SplitMix64 finalizer. Good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent sub-stream seed from (master, label, index).
// All randomness in the simulator flows through this so that runs are
// reproducible and worker-count invariant.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the label
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return mix64(mix64(master ^ h) ^ index);
}

// Thin wrapper around mt19937_64 with fixed draw conventions: every helper
// consumes exactly one generator draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution, one draw.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // True with probability p, one draw.
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mdsearch
