#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <set>

#include "sagsim/algorithms/shatter.hpp"
#include "sagsim/algorithms/sparsify.hpp"
#include "sagsim/compression.hpp"

using namespace sagsim;

namespace {

/// Every round is sparse; a node beeps in round r iff its coin is <= q. The estimate is
/// exact for the next round and `later` afterwards.
struct Beeper {
  struct State {
    NodeId id = 0;
    std::uint32_t heard = 0;
  };
  double q = 0.1;
  double later = 0.0;
  Round rounds = 4;

  Start<State> init(const NodeContext& c) const { return {{c.id, 0}, Status::active}; }
  Round total_rounds() const { return rounds; }
  RoundKind kind(Round) const { return RoundKind::sparse; }
  FoldOp op(Round) const { return FoldOp::sum; }
  Round coin_round(Round r) const { return r; }
  std::optional<Payload> send(const State&, const NodeContext& c) const {
    if (coin_fires(c.coin(c.round), q)) return Payload::of(1);
    return std::nullopt;
  }
  Status receive(State& s, const NodeContext&, const std::optional<Payload>& f) const {
    if (f) s.heard += static_cast<std::uint32_t>(f->w[0]);
    return Status::active;
  }
  Estimate estimate(const State&, const NodeContext& c, Round tau) const {
    return {tau == c.round + 1 ? q : later, false};
  }
  double alpha() const { return 2.0; }
  int stage_of(Round) const { return 1; }
  double stage_threshold(Round) const { return -1.0; }
  std::size_t state_bits(const State&, const NodeContext& c) const { return 2 * c.word_bits; }
  void encode(const State& s, std::vector<std::uint8_t>& out) const {
    put_u64(out, s.id);
    put_u64(out, s.heard);
  }
};

template <SparseProgram P>
struct Snapshot {
  std::vector<typename P::State> states;
  std::vector<Status> status;
};

/// Plain round-by-round execution used to build phase-start snapshots.
template <SparseProgram P>
Snapshot<P> advance(const Graph& g, const P& prog, const RandomTape& tape, Round t) {
  auto run = run_congest(g, SparseAsNode<P>(prog), tape, t);
  return {run.states, run.status};
}

/// Nodes that send in round r from the given snapshot (snapshot is advanced by one round).
template <SparseProgram P>
std::set<NodeId> step(const Graph& g, const P& prog, const RandomTape& tape, Snapshot<P>& s, Round r) {
  const std::size_t n = g.num_nodes();
  std::vector<std::optional<Payload>> out(n);
  std::set<NodeId> senders;
  for (NodeId v = 0; v < n; ++v) {
    if (s.status[v] == Status::halted) continue;
    NodeContext c{v, r, g.neighbors(v), n, word_bits(n), &tape};
    out[v] = prog.send(s.states[v], c);
    if (out[v]) senders.insert(v);
  }
  for (NodeId v = 0; v < n; ++v) {
    if (s.status[v] == Status::halted) continue;
    std::optional<Payload> acc;
    for (NodeId u : g.neighbors(v)) {
      if (out[u]) fold_into(prog.op(r), acc, *out[u]);
    }
    NodeContext c{v, r, g.neighbors(v), n, word_bits(n), &tape};
    s.status[v] = prog.receive(s.states[v], c, acc);
  }
  return senders;
}

Marking manual_marking(std::size_t n, int ell, const std::vector<NodeId>& marked) {
  Marking mk;
  mk.ell = ell;
  mk.estimate.assign(n * ell, 0.0);
  mk.mask.assign(n, 0);
  mk.frozen.assign(n, 0);
  mk.halted.assign(n, 0);
  for (NodeId u : marked) mk.mask[u] = 1;
  return mk;
}

template <SparseProgram P>
void expect_equivalent(const Graph& g, const P& prog, std::uint64_t seed, const CompressOptions& opt, double eps = 0.5) {
  RandomTape tape(seed, g.num_nodes());
  auto ref = run_reference(g, prog, tape);
  auto cmp = run_compressed(g, prog, MachineConfig::make(g.num_nodes(), eps), tape, opt);
  ASSERT_EQ(ref.trace.final_states.size(), cmp.final_states.size());
  EXPECT_TRUE(ref.trace.final_states == cmp.final_states);
  EXPECT_EQ(ref.status, cmp.status);
}

}  // namespace

TEST(Planner, V1Examples) {
  EXPECT_EQ(ell_v1(2.0, std::ldexp(1.0, 32), 0.5), 1);
  auto a = plan_phases_v1(32, 2.0, std::ldexp(1.0, 32), 0.5);
  EXPECT_EQ(a.size(), 32u);
  auto b = plan_phases_v1(10, 2.0, std::ldexp(1.0, 40), 0.8);
  ASSERT_EQ(b.size(), 5u);
  for (const auto& p : b) EXPECT_EQ(p.ell, 2);
  EXPECT_EQ(b[1].start, 2);
  auto c = plan_phases_v1(5, 2.0, 1000.0, 0.5);
  EXPECT_EQ(c.size(), 5u);
  EXPECT_EQ(c[0].ell, 1);
}

TEST(Planner, V2CaseSplit) {
  StagePlan i = ell_v2(1, 2.0, std::ldexp(1.0, 64), std::ldexp(1.0, 32), 0.5);
  EXPECT_FALSE(i.case_ii);
  StagePlan ii = ell_v2(1, 2.0, std::ldexp(1.0, 8), std::ldexp(1.0, 64), 0.5);
  EXPECT_TRUE(ii.case_ii);
  EXPECT_DOUBLE_EQ(ii.alpha_prime, 2.0 * 64 * 64);
  EXPECT_EQ(ii.ell, 1);
}

TEST(Planner, V2SingleStageAndHalving) {
  auto one = plan_phases_v2({1}, 2.0, 16.0, 1000.0, 0.5);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].ell, 1);
  EXPECT_NO_THROW(plan_phases_v2({8, 4, 2}, 2.0, 256.0, 1e6, 0.5));
  EXPECT_THROW(plan_phases_v2({4, 3}, 2.0, 256.0, 1e6, 0.5), ConfigError);
}

TEST(BallBound, Arithmetic) {
  BallBound b = ball_bound({1.0, 1.0}, 16.0, 2);
  EXPECT_DOUBLE_EQ(b.k, 8.0);
  EXPECT_DOUBLE_EQ(b.strict, 64.0);
  EXPECT_DOUBLE_EQ(b.planned, 73.0);
  EXPECT_TRUE(growth_certificate({1, 2, 4}, 2.0));
  EXPECT_FALSE(growth_certificate({1, 3}, 2.0));
}

TEST(Marking, ZeroEstimateMarksOnlyNextRoundSenders) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 2000, .p = 0.005}, 1);
  RandomTape tape(4, g.num_nodes());
  Beeper prog{.q = 0.2, .later = 0.0, .rounds = 6};
  auto snap = advance(g, prog, tape, 2);
  Marking mk = mark_nodes(g, prog, snap.states, snap.status, tape, 2, 3);
  auto senders = step(g, prog, tape, snap, 3);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    EXPECT_EQ(mk.marked(u), senders.count(u) == 1);
    EXPECT_EQ(mk.mask[u] & ~1U, 0U);
  }
}

TEST(Marking, OneEstimateMarksEveryone) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 500, .p = 0.01}, 1);
  RandomTape tape(4, g.num_nodes());
  Beeper prog{.q = 1.0, .later = 1.0, .rounds = 3};
  Snapshot<Beeper> snap = advance(g, prog, tape, 0);
  Marking mk = mark_nodes(g, prog, snap.states, snap.status, tape, 0, 3);
  for (NodeId u = 0; u < g.num_nodes(); ++u) EXPECT_EQ(mk.mask[u], 7U);
}

TEST(Marking, ShatterMarkingCoversActualSenders) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 5000, .p = 0.002}, 11);
  RandomTape tape(11, g.num_nodes());
  ShatterProgram prog(g, {.delta = 1.0, .iterations = 12, .phase_iterations = 3});
  for (const auto& ph : prog.phases()) {
    const Round t = ph.first_round;  // state after the pre-phase round
    auto snap = advance(g, prog, tape, t);
    const int ell = 2 * ph.iterations;
    Marking mk = mark_nodes(g, prog, snap.states, snap.status, tape, t, ell);
    for (int j = 0; j < ell; ++j) {
      for (NodeId u : step(g, prog, tape, snap, t + 1 + j)) {
        EXPECT_TRUE(mk.marked_for(u, j)) << "node " << u << " round " << t + 1 + j;
      }
    }
  }
}

TEST(Gather, StarAllMarked) {
  Graph g = gen_graph(GraphModel::star, {.n = 5}, 0);
  Marking mk = manual_marking(5, 1, {0, 1, 2, 3, 4});
  Ball b = gather_ball(g, mk, 0, 1, {}, 1000);
  EXPECT_EQ(b.members.size(), 5u);
  EXPECT_EQ(b.edges.size(), 4u);
  EXPECT_FALSE(b.overflow);
}

TEST(Gather, PathNeedsMarkedIntermediates) {
  Graph g = gen_graph(GraphModel::path, {.n = 5}, 0);
  // Node 2 is marked but its only route to 0 passes through unmarked node 1, which never
  // sends during the phase; node 2 therefore cannot influence node 0 and is left out.
  Ball b = gather_ball(g, manual_marking(5, 2, {2}), 0, 2, {}, 1000);
  EXPECT_EQ(b.members, (std::vector<NodeId>{0}));
  EXPECT_TRUE(b.edges.empty());
  Ball c = gather_ball(g, manual_marking(5, 2, {1, 2}), 0, 2, {}, 1000);
  EXPECT_EQ(c.members, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(c.edges, (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_EQ(c.words, 3 * member_words(0, 2) + 2 * 2);
}

TEST(Gather, OverflowFlagged) {
  Graph g = gen_graph(GraphModel::star, {.n = 50}, 0);
  std::vector<NodeId> all(50);
  for (NodeId v = 0; v < 50; ++v) all[v] = v;
  Ball b = gather_ball(g, manual_marking(50, 1, all), 0, 1, {}, 20);
  EXPECT_TRUE(b.overflow);
}

TEST(Gather, ShatterBallsMatchBruteForce) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.001}, 3);
  RandomTape tape(3, g.num_nodes());
  ShatterProgram prog(g, {.delta = 1.0, .iterations = 8, .phase_iterations = 2});
  const Round t = prog.phases()[1].first_round;
  auto snap = advance(g, prog, tape, t);
  Marking mk = mark_nodes(g, prog, snap.states, snap.status, tape, t, 2);
  for (NodeId v = 0; v < g.num_nodes(); v += 7) {
    if (mk.frozen[v]) continue;
    Ball b = gather_ball(g, mk, v, 2, {}, 1u << 30);
    std::set<NodeId> want{v};
    std::set<NodeId> layer1;
    for (NodeId u : g.neighbors(v)) {
      if (mk.marked(u)) layer1.insert(u);
    }
    want.insert(layer1.begin(), layer1.end());
    for (NodeId u : layer1) {
      if (mk.frozen[u]) continue;
      for (NodeId w : g.neighbors(u)) {
        if (mk.marked(w)) want.insert(w);
      }
    }
    EXPECT_EQ(std::set<NodeId>(b.members.begin(), b.members.end()), want) << "center " << v;
  }
}

TEST(FastForward, OneRoundMatchesDirectStep) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 1000, .p = 0.01}, 2);
  RandomTape tape(2, g.num_nodes());
  Beeper prog{.q = 0.3, .later = 0.3, .rounds = 3};
  auto snap = advance(g, prog, tape, 1);
  Marking mk = mark_nodes(g, prog, snap.states, snap.status, tape, 1, 1);
  auto after = snap;
  step(g, prog, tape, after, 2);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    Ball b = gather_ball(g, mk, v, 1, {}, 1u << 30);
    auto [s, st] = fast_forward(g, b, prog, snap.states, snap.status, mk, tape);
    EXPECT_EQ(s.heard, after.states[v].heard);
    EXPECT_EQ(st, after.status[v]);
  }
}

TEST(FastForward, SilentPhaseLeavesStateUnchanged) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 300, .p = 0.02}, 2);
  RandomTape tape(2, g.num_nodes());
  Beeper prog{.q = 0.0, .later = 0.0, .rounds = 3};
  auto snap = advance(g, prog, tape, 0);
  Marking mk = mark_nodes(g, prog, snap.states, snap.status, tape, 0, 3);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    Ball b = gather_ball(g, mk, v, 3, {}, 1u << 30);
    EXPECT_EQ(b.members.size(), 1u);
    auto [s, st] = fast_forward(g, b, prog, snap.states, snap.status, mk, tape);
    EXPECT_EQ(s.heard, 0u);
  }
}

TEST(FastForward, UnsoundEstimateDetected) {
  Graph g = gen_graph(GraphModel::path, {.n = 500}, 0);
  // Sends with probability 0.5 in later rounds but claims 0.
  Beeper prog{.q = 0.5, .later = 0.0, .rounds = 4};
  EXPECT_THROW(
      {
        RandomTape tape(2, g.num_nodes());
        CompressOptions opt;
        opt.force_ell = 3;
        opt.overflow = OverflowPolicy::abort;
        run_compressed(g, prog, MachineConfig::make(500, 0.9), tape, opt);
      },
      ExecutionError);
}

TEST(Compressed, EllOneIsRoundByRound) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 3000, .p = 0.004}, 5);
  CompressOptions opt;
  opt.force_ell = 1;
  expect_equivalent(g, ShatterProgram(g, {.delta = 1.0, .phase_iterations = 2}), 5, opt);
}

TEST(Compressed, SparsifyMatchesReference) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.01}, 2);
  expect_equivalent(g, SparsifyProgram(g, {8.0, 3.0, 0}), 2, CompressOptions{});
}

TEST(Compressed, ShatterMatchesReference) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.005}, 9);
  ShatterProgram prog(g, {.delta = 1.0, .phase_iterations = 2});
  RandomTape tape(9, g.num_nodes());
  auto ref = run_reference(g, prog, tape);
  CompressOptions opt;
  opt.force_ell = 2;
  auto cmp = run_compressed(g, prog, MachineConfig::make(g.num_nodes(), 0.5), tape, opt);
  auto a = shatter_output(g, ref.states);
  auto b = shatter_output(g, cmp.states);
  EXPECT_EQ(a.independent, b.independent);
  EXPECT_EQ(a.residual, b.residual);
  EXPECT_TRUE(ref.trace.final_states == cmp.final_states);
}

TEST(Compressed, ShatterFastForwardEllTwo) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 5000, .p = 0.002}, 7);
  CompressOptions opt;
  opt.force_ell = 2;
  expect_equivalent(g, ShatterProgram(g, {.delta = 1.0, .phase_iterations = 3}), 7, opt);
}

TEST(Compressed, DegreeOrderedV2) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 5000, .p = 0.01}, 4);
  CompressOptions opt;
  opt.version = PlanVersion::v2;
  expect_equivalent(g, ShatterProgram(g, {.delta = 1.0, .phase_iterations = 2, .degree_ordered = true}), 4, opt);
}

TEST(Compressed, ShrinkOnOverflowStaysExact) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 4000, .p = 0.01}, 6);
  CompressOptions opt;
  opt.force_ell = 3;
  // eps = 0.25 gives S = 8 words: every ball overflows and the engine must fall back.
  RandomTape tape(6, g.num_nodes());
  ShatterProgram prog(g, {.delta = 1.0, .phase_iterations = 2});
  auto ref = run_reference(g, prog, tape);
  auto cmp = run_compressed(g, prog, MachineConfig::make(4000, 0.25), tape, opt);
  EXPECT_TRUE(ref.trace.final_states == cmp.final_states);
  bool any_fallback = false;
  for (const auto& p : cmp.phases) any_fallback = any_fallback || p.fallback || p.overflow_retries > 0;
  EXPECT_TRUE(any_fallback);
}

TEST(Compressed, AbortOnOverflow) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 4000, .p = 0.01}, 6);
  CompressOptions opt;
  opt.force_ell = 3;
  opt.overflow = OverflowPolicy::abort;
  RandomTape tape(6, g.num_nodes());
  ShatterProgram prog(g, {.delta = 1.0, .phase_iterations = 2});
  try {
    run_compressed(g, prog, MachineConfig::make(4000, 0.25), tape, opt);
    FAIL() << "expected a capacity error";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("phase length too aggressive"), std::string::npos);
  }
}

TEST(Compressed, DirectOnlyMatchesReference) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 3000, .p = 0.005}, 8);
  CompressOptions opt;
  opt.direct_only = true;
  expect_equivalent(g, ShatterProgram(g, {}), 8, opt);
}

TEST(Compressed, CostAwarePlannerSkipsUnprofitablePhases) {
  EXPECT_EQ(min_compressed_phase_rounds(1), 2);
  EXPECT_EQ(min_compressed_phase_rounds(3), 4);
  EXPECT_EQ(min_compressed_phase_rounds(8), 5);
  // Low degree: one aggregation round per direct round, so short phases stay uncompressed.
  Graph g = gen_graph(GraphModel::gnp, {.n = 3000, .p = 0.003}, 3);
  ShatterProgram prog(g, {.delta = 1.0, .phase_iterations = 2});
  RandomTape tape(3, g.num_nodes());
  const MachineConfig mc = MachineConfig::make(3000, 0.5);
  auto planned = run_compressed(g, prog, mc, tape);
  ASSERT_FALSE(planned.phases.empty());
  for (const auto& p : planned.phases) EXPECT_TRUE(p.direct);
  CompressOptions direct;
  direct.direct_only = true;
  auto base = run_compressed(g, prog, mc, tape, direct);
  EXPECT_EQ(planned.final_states, base.final_states);
  EXPECT_LE(planned.metrics.round_count(), base.metrics.round_count());
  CompressOptions off;
  off.cost_aware = false;
  auto forced = run_compressed(g, prog, mc, tape, off);
  EXPECT_EQ(forced.final_states, base.final_states);
  for (const auto& p : forced.phases) EXPECT_FALSE(p.direct);
}

TEST(Compressed, PhaseReportsCarryCertificates) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 5000, .p = 0.005}, 1);
  ShatterProgram prog(g, {.delta = 1.0, .phase_iterations = 2});
  RandomTape tape(1, g.num_nodes());
  CompressOptions opt;
  opt.force_ell = 2;
  auto run = run_compressed(g, prog, MachineConfig::make(5000, 0.5), tape, opt);
  ASSERT_FALSE(run.phases.empty());
  for (const auto& p : run.phases) {
    if (p.fallback) continue;
    EXPECT_TRUE(p.growth_ok);
    EXPECT_TRUE(p.bound_ok);
    EXPECT_EQ(p.a_tilde.size(), static_cast<std::size_t>(p.ell));
    EXPECT_GE(p.mpc_rounds, 1u);
  }
  EXPECT_EQ(run.congest_rounds, prog.total_rounds());
}
