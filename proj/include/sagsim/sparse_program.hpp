#pragma once

#include <concepts>
#include <optional>
#include <vector>

#include "sagsim/congest.hpp"

namespace sagsim {

/// separable: every live node may contribute; executed by neighborhood aggregation.
/// sparse: few nodes send; eligible for Sample-and-Gather compression.
enum class RoundKind : std::uint8_t { separable, sparse };

/// Upper bound on the probability that a node sends in a future round, computed from its
/// phase-start state. frozen: the node neither receives nor changes state during the
/// phase, so its sends depend only on that state and the tape.
struct Estimate {
  double p = 0.0;
  bool frozen = false;
};

/// Broadcast-and-fold node program. In round r every non-halted node may broadcast one
/// payload; each node then receives the fold (under op(r)) of its neighbors' payloads,
/// or nothing if no neighbor sent. Sending decisions in round r may use only the coin
/// ctx.coin(coin_round(r)).
template <class P>
concept SparseProgram = requires(const P& p, typename P::State& s, const typename P::State& cs,
                                 const NodeContext& ctx, Round r,
                                 const std::optional<Payload>& folded, std::vector<std::uint8_t>& bytes) {
  { p.init(ctx) } -> std::same_as<Start<typename P::State>>;
  { p.total_rounds() } -> std::convertible_to<Round>;
  { p.kind(r) } -> std::same_as<RoundKind>;
  { p.op(r) } -> std::same_as<FoldOp>;
  { p.coin_round(r) } -> std::convertible_to<Round>;
  { p.send(cs, ctx) } -> std::same_as<std::optional<Payload>>;
  { p.receive(s, ctx, folded) } -> std::same_as<Status>;
  /// ctx.round is the phase start t; tau in (t, t + ell].
  { p.estimate(cs, ctx, r) } -> std::same_as<Estimate>;
  { p.alpha() } -> std::convertible_to<double>;
  /// Degree-ordered stage of round r (1-based) and its degree threshold; a negative
  /// threshold means every node may participate.
  { p.stage_of(r) } -> std::convertible_to<int>;
  { p.stage_threshold(r) } -> std::convertible_to<double>;
  { p.state_bits(cs, ctx) } -> std::convertible_to<std::size_t>;
  p.encode(cs, bytes);
};

/// Runs a SparseProgram on the reference CONGEST engine: broadcasts become messages and
/// the inbox is folded before the program sees it.
template <SparseProgram P>
class SparseAsNode {
 public:
  using State = typename P::State;
  explicit SparseAsNode(const P& prog) : prog_(&prog) {}

  Start<State> init(const NodeContext& ctx) const { return prog_->init(ctx); }
  void send(const State& s, const NodeContext& ctx, Outbox& out) const {
    if (auto p = prog_->send(s, ctx)) out.broadcast(*p);
  }
  Status receive(State& s, const NodeContext& ctx, const Inbox& in) const {
    std::optional<Payload> acc;
    const FoldOp op = prog_->op(ctx.round);
    for (const Message& m : in) fold_into(op, acc, m.payload);
    return prog_->receive(s, ctx, acc);
  }
  std::size_t state_bits(const State& s, const NodeContext& ctx) const { return prog_->state_bits(s, ctx); }
  void encode(const State& s, std::vector<std::uint8_t>& out) const { prog_->encode(s, out); }

 private:
  const P* prog_;
};

template <SparseProgram P>
CongestRun<typename P::State> run_reference(const Graph& g, const P& prog, const RandomTape& tape,
                                            const CongestOptions& opt = {}) {
  return run_congest(g, SparseAsNode<P>(prog), tape, prog.total_rounds(), opt);
}

/// Byte encoding helpers shared by the shipped programs.
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}
inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t x) { out.push_back(x); }

}  // namespace sagsim
