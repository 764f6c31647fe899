#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sdosim {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a master seed and a key path,
/// e.g. (master, point, trial, circuit, probe). Order of keys matters.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> keys) noexcept;

/// xoshiro256** generator with bit-exact helpers for uniform doubles,
/// bounded integers and Bernoulli trials. Satisfies
/// UniformRandomBitGenerator, so it also works with <random> and
/// <algorithm>, but the simulator only uses the helpers below so that
/// results do not depend on the standard library's distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  /// Counter-keyed stream: Rng(derive_seed(seed, keys)).
  static Rng stream(std::uint64_t seed,
                    std::initializer_list<std::uint64_t> keys) noexcept {
    return Rng(derive_seed(seed, keys));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// True with probability p. Always consumes exactly one draw.
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n) noexcept;

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace sdosim
