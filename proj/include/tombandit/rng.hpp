#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tombandit {

/// Mixes a 64-bit value (splitmix64 finaliser).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent seed and a path of
/// stream identifiers. Same inputs always give the same child.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

/// Seeded random stream. Only uses the engine's raw output so draws are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t next() { return engine_(); }

  Rng split(std::uint64_t stream) { return Rng(derive_seed(engine_(), {stream})); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tombandit
