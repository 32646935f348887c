#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cutlim {

// Counter-based pseudo random generator built on the SplitMix64 mixing
// function. The i-th output is a pure function of (key, stream, i), so
// any consumer that derives its own stream gets a reproducible sequence
// regardless of how other consumers interleave their draws.
//
// Stream splitting: `derive(id)` produces an independent generator whose
// key mixes the parent key with the stream id. Experiments use one
// derived stream per trial so trials can run concurrently and still
// produce bit-identical results for a fixed master seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed + kKeySalt) ^ mix(stream + kStreamSalt)) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

  bool next_bool() { return (next_u64() & 1u) != 0; }

  // Independent child generator; deterministic in (this->key, id).
  CounterRng derive(std::uint64_t id) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(id + kChildSalt));
    child.counter_ = 0;
    return child;
  }

  // Index draw from nonnegative weights (need not be normalised).
  std::size_t next_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::invalid_argument("next_weighted: weights sum to zero");
    double u = next_unit() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kKeySalt = 0x5bf0363546e95a33ULL;
  static constexpr std::uint64_t kStreamSalt = 0xc2b2ae3d27d4eb4fULL;
  static constexpr std::uint64_t kChildSalt = 0x165667b19e3779f9ULL;

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace cutlim
