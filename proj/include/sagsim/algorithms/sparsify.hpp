#pragma once

#include <optional>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/sparse_program.hpp"

namespace sagsim {

/// min(1, f^i * c * ln_n / delta).
double sparsify_probability(int iteration, double f, double c, double ln_n, double delta);

/// Smallest k >= 1 with f^k >= delta.
int sparsify_iterations(double f, double delta);

struct SparsifyParams {
  double f = 8.0;
  double c = 3.0;
  /// n used inside ln n; defaults to the graph's node count when 0.
  std::size_t n_for_log = 0;
};

/// Degree-ordered sparsification as a three-rounds-per-iteration program:
///   1 (sum)  active nodes count their active neighbors;
///   2 (or)   heavy nodes (active degree >= Delta/f^i, 0 in the last iteration) announce;
///            a node is eligible if heavy or next to a heavy node;
///   3 (or)   eligible nodes join U with probability q_i and announce; listeners deactivate.
/// Nodes without any neighbor in G join U in iteration 1.
class SparsifyProgram {
 public:
  struct State {
    NodeId id = 0;
    std::uint32_t active_degree = 0;
    bool in_u = false;
    bool heavy = false;
    bool eligible = false;
    bool deactivated = false;
  };

  SparsifyProgram(const Graph& g, const SparsifyParams& params);

  Start<State> init(const NodeContext& ctx) const;
  Round total_rounds() const { return 3 * static_cast<Round>(iterations_); }
  RoundKind kind(Round r) const { return r % 3 == 0 ? RoundKind::sparse : RoundKind::separable; }
  FoldOp op(Round r) const { return r % 3 == 1 ? FoldOp::sum : FoldOp::bit_or; }
  Round coin_round(Round r) const { return r; }
  std::optional<Payload> send(const State& s, const NodeContext& ctx) const;
  Status receive(State& s, const NodeContext& ctx, const std::optional<Payload>& folded) const;
  Estimate estimate(const State& s, const NodeContext& ctx, Round tau) const;
  double alpha() const { return f_; }
  int stage_of(Round r) const;
  double stage_threshold(Round r) const;
  std::size_t state_bits(const State& s, const NodeContext& ctx) const;
  void encode(const State& s, std::vector<std::uint8_t>& out) const;

  int iterations() const { return iterations_; }
  int iteration_of(Round r) const { return static_cast<int>((r + 2) / 3); }
  double probability(int iteration) const { return q_[static_cast<std::size_t>(iteration)]; }
  /// Heavy threshold Delta/f^i; 0 in the final iteration.
  double heavy_threshold(int iteration) const;
  double delta() const { return delta_; }

 private:
  double f_;
  double c_;
  double delta_;
  double ln_n_;
  int iterations_;
  std::vector<double> q_;       // index = iteration
  std::vector<int> stage_;      // index = iteration
};

}  // namespace sagsim
