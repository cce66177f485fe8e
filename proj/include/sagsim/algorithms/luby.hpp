#pragma once

#include <optional>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/sparse_program.hpp"

namespace sagsim {

/// Luby's MIS: per iteration, active nodes exchange (coin, id) keys under min; a node whose
/// key is strictly below every active neighbor's joins, then winners announce and their
/// neighbors leave. Both rounds are separable.
class LubyProgram {
 public:
  struct State {
    NodeId id = 0;
    bool winner = false;
    bool in_mis = false;
    bool removed = false;
  };

  /// max_iterations = 0 picks 8 * ceil(log2 n) + 16.
  LubyProgram(const Graph& g, const RandomTape& tape, int max_iterations = 0);

  Start<State> init(const NodeContext& ctx) const;
  Round total_rounds() const { return 2 * static_cast<Round>(iterations_); }
  RoundKind kind(Round) const { return RoundKind::separable; }
  FoldOp op(Round r) const { return r % 2 == 1 ? FoldOp::min : FoldOp::bit_or; }
  Round coin_round(Round r) const { return r % 2 == 1 ? r : r - 1; }
  std::optional<Payload> send(const State& s, const NodeContext& ctx) const;
  Status receive(State& s, const NodeContext& ctx, const std::optional<Payload>& folded) const;
  Estimate estimate(const State& s, const NodeContext& ctx, Round tau) const;
  double alpha() const { return 2.0; }
  int stage_of(Round) const { return 1; }
  double stage_threshold(Round) const { return -1.0; }
  std::size_t state_bits(const State& s, const NodeContext& ctx) const;
  void encode(const State& s, std::vector<std::uint8_t>& out) const;

 private:
  Word key(const NodeContext& ctx) const;

  int iterations_;
  int id_bits_;
};

}  // namespace sagsim
