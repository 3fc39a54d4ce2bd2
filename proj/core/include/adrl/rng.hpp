#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "adrl/common.hpp"

namespace adrl {

// Deterministic xoshiro256++ generator. Self-contained so sequences are
// identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent substream: mixes a stream name into the seed so that
  // consumers (env seeding, action sampling, shuffling, ...) never share
  // state and disabling one leaves the others unchanged.
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();

  // Uniform in [0,1) with 53 random bits.
  Real uniform();
  Real uniform(Real lo, Real hi);

  // Unbiased integer in [0,n). n must be positive.
  int uniform_int(int n);

  // Standard normal via Box-Muller.
  Real normal();

  // Index sampled from a probability vector (assumed nonnegative, summing
  // to ~1; the tail absorbs rounding).
  int categorical(const Real* probs, int n);

  std::vector<int> permutation(int n);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  Real spare_ = 0;
};

}  // namespace adrl
