#include "sagsim/random_tape.hpp"

#include <algorithm>

namespace sagsim {

std::uint64_t SeededStream::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  __uint128_t m = static_cast<__uint128_t>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

RandomTape::RandomTape(std::uint64_t master_seed, std::size_t n, int c)
    : seed_(master_seed), bits_(std::clamp(c * word_bits(n), 1, 52)) {
  if (c < 1) throw ConfigError("random tape precision constant c must be >= 1");
}

std::uint64_t RandomTape::round_index(NodeId node, Round round) const {
  if (round < 1) throw ConfigError("tape rounds start at 1");
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(node) + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(round) * 0x8cb92ba72f3d8dd7ULL));
  return h >> (64 - bits_);
}

double RandomTape::round_real(NodeId node, Round round) const {
  return static_cast<double>(round_index(node, round)) /
         static_cast<double>(std::uint64_t{1} << bits_);
}

bool RandomTape::sample_event(NodeId node, Round round, double p) const {
  return coin_fires(round_real(node, round), p);
}

}  // namespace sagsim
