#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace layercast {

/// Deterministic generator with named sub-streams. Each stream is a
/// mt19937_64 seeded from splitmix64(seed, hash(name)), so adding draws to
/// one stream never perturbs another. The distribution mappings below are
/// written out by hand because the standard distributions are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace layercast
