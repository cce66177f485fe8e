#pragma once

#include <optional>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/sparse_program.hpp"

namespace sagsim {

struct ShatterParams {
  double delta = 1.0;
  /// Total iterations T; 0 means ceil(4 * log2(Delta + 2)).
  int iterations = 0;
  /// Iterations per phase; 0 means max(1, floor(sqrt(delta * log2 n) / 10)).
  int phase_iterations = 0;
  /// Process nodes in degree buckets with halving stage lengths (used with the v2 planner).
  bool degree_ordered = false;
  /// n inside the super-heavy threshold 2^(sqrt(log2 n)/5); graph size when 0.
  std::size_t n_for_log = 0;
};

int default_shatter_iterations(std::size_t max_degree);
int default_shatter_phase_iterations(double delta, std::size_t n);

/// Sparsified shattering with desire levels p = 2^-k. Each phase is one separable
/// pre-phase exchange (sum of (joined flag, p) over neighbors) followed by two rounds per
/// iteration: A (beep with p; join if alone) and B (joiners announce; listeners leave).
/// Super-heavy nodes are send-only for the whole phase; their halving is applied at the
/// next pre-phase, as is deactivation of non-participating neighbors of joiners.
class ShatterProgram {
 public:
  enum class Mode : std::uint8_t { live, super_heavy, idle, joining, joined_pending, in_i, removed };

  struct State {
    NodeId id = 0;
    std::uint8_t k = 1;  // desire level p = 2^-k
    Mode mode = Mode::live;
  };

  enum class RoundType : std::uint8_t { pre, beep, announce };
  struct RoundInfo {
    RoundType type = RoundType::pre;
    int phase = 0;
    int iter = 0;  // 0-based iteration within the phase
  };
  struct Phase {
    Round first_round = 0;  // the pre-phase round
    int iterations = 0;
    int stage = 1;
    double threshold = -1.0;  // participants: degree > threshold (negative: everyone)
  };

  ShatterProgram(const Graph& g, const ShatterParams& params);

  Start<State> init(const NodeContext& ctx) const;
  Round total_rounds() const { return static_cast<Round>(info_.size()) - 1; }
  RoundKind kind(Round r) const {
    return info(r).type == RoundType::pre ? RoundKind::separable : RoundKind::sparse;
  }
  FoldOp op(Round r) const { return info(r).type == RoundType::pre ? FoldOp::sum : FoldOp::bit_or; }
  /// The announcement round reuses the beep round's coin: a joiner announces exactly when
  /// its earlier beep succeeded.
  Round coin_round(Round r) const { return info(r).type == RoundType::announce ? r - 1 : r; }
  std::optional<Payload> send(const State& s, const NodeContext& ctx) const;
  Status receive(State& s, const NodeContext& ctx, const std::optional<Payload>& folded) const;
  Estimate estimate(const State& s, const NodeContext& ctx, Round tau) const;
  double alpha() const { return 2.0; }
  int stage_of(Round r) const { return phases_[static_cast<std::size_t>(info(r).phase)].stage; }
  double stage_threshold(Round r) const { return phases_[static_cast<std::size_t>(info(r).phase)].threshold; }
  std::size_t state_bits(const State& s, const NodeContext& ctx) const;
  void encode(const State& s, std::vector<std::uint8_t>& out) const;

  const RoundInfo& info(Round r) const { return info_[static_cast<std::size_t>(std::clamp<Round>(r, 1, total_rounds()))]; }
  const std::vector<Phase>& phases() const { return phases_; }
  int total_iterations() const { return total_iterations_; }
  double super_heavy_threshold() const { return super_heavy_; }
  /// Stage lengths in rounds, in stage order.
  std::vector<Round> stage_lengths() const;

  static bool in_independent_set(const State& s) {
    return s.mode == Mode::in_i || s.mode == Mode::joined_pending || s.mode == Mode::joining;
  }

 private:
  bool participates(NodeId v, int phase) const;

  const Graph* g_;
  std::vector<Phase> phases_;
  std::vector<RoundInfo> info_;  // index = round, entry 0 unused
  int total_iterations_ = 0;
  double super_heavy_ = 0.0;
};

/// Independent set I and residual S = V \ N+(I) from final Shatter states.
struct ShatterOutput {
  std::vector<NodeId> independent;
  std::vector<NodeId> residual;
};
ShatterOutput shatter_output(const Graph& g, const std::vector<ShatterProgram::State>& states);

}  // namespace sagsim
