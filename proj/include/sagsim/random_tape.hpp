#pragma once

#include <cstdint>

#include "sagsim/types.hpp"

namespace sagsim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sequential seeded stream used by the graph generators. Integer and real draws are
/// defined here (not via <random> distributions) so outputs are identical across
/// standard libraries.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound), bound >= 1 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound);

  /// Uniform in [0, 1) with 53 random bits.
  double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Addressable randomness: one real R_tau(u) per (node, round), a pure function of
/// (master_seed, node, round). Values are i / 2^b for integer 0 <= i < 2^b.
class RandomTape {
 public:
  /// precision_bits = c * ceil(log2 n) (with ceil(log2 n) >= 1), capped at 52.
  RandomTape(std::uint64_t master_seed, std::size_t n, int c = 2);

  std::uint64_t master_seed() const noexcept { return seed_; }
  int precision_bits() const noexcept { return bits_; }

  /// The integer i behind round_real: uniform over [0, 2^b).
  std::uint64_t round_index(NodeId node, Round round) const;

  /// R_round(node) in [0,1). Requires round >= 1.
  double round_real(NodeId node, Round round) const;

  /// True iff round_real(node, round) <= p; always false for p <= 0.
  bool sample_event(NodeId node, Round round, double p) const;

 private:
  std::uint64_t seed_;
  int bits_;
};

/// Coin comparison shared by every engine: the event "R <= p" with p = 0 never firing.
inline bool coin_fires(double real, double p) { return p > 0.0 && real <= p; }

}  // namespace sagsim
