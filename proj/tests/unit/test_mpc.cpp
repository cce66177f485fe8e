#include <gtest/gtest.h>

#include <cmath>

#include "sagsim/algorithms/pipelines.hpp"
#include "sagsim/mpc.hpp"

using namespace sagsim;

TEST(Mpc, MachineSize) {
  EXPECT_EQ(MachineConfig::make(16, 0.5).S, 4u);
  EXPECT_EQ(MachineConfig::make(10000, 0.5).S, 100u);
  EXPECT_EQ(MachineConfig::make(8, 0.99).S, 8u);
  EXPECT_THROW(MachineConfig::make(100, 1.0), ConfigError);
  EXPECT_THROW(MachineConfig::make(1, 0.5), ConfigError);
}

TEST(Mpc, MemoryModeNames) {
  EXPECT_EQ(parse_memory_mode("input-linear"), MemoryMode::input_linear);
  EXPECT_EQ(parse_memory_mode("unrestricted"), MemoryMode::unrestricted);
  EXPECT_THROW(parse_memory_mode("huge"), ConfigError);
}

TEST(Mpc, StarCenterIsSplit) {
  Graph g = gen_graph(GraphModel::star, {.n = 16}, 0);
  MachineConfig cfg = MachineConfig::make(16, 0.5);
  MachineLayout lay = build_layout(g, cfg);
  EXPECT_EQ(lay.num_copies(0), 4u);
  EXPECT_LE(lay.tree_depth(0), 2u);
  EXPECT_LE(lay.max_machine_words(), cfg.S);
  for (NodeId v = 1; v < 16; ++v) EXPECT_EQ(lay.num_copies(v), 1u);
}

TEST(Mpc, CliqueNodesUnsplit) {
  Graph g = gen_graph(GraphModel::clique, {.n = 8}, 0);
  MachineLayout lay = build_layout(g, MachineConfig::make(8, 0.99));
  for (NodeId v = 0; v < 8; ++v) EXPECT_EQ(lay.num_copies(v), 1u);
  EXPECT_EQ(lay.max_depth, 0u);
}

TEST(Mpc, GnpResidentWordsWithinCap) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.01}, 1);
  MachineConfig cfg = MachineConfig::make(10000, 0.5);
  MachineLayout lay = build_layout(g, cfg);
  for (std::size_t w : lay.machine_words) EXPECT_LE(w, cfg.S);
  std::uint64_t depth_bound = static_cast<std::uint64_t>(std::ceil(1.0 / cfg.epsilon));
  EXPECT_LE(lay.max_depth, depth_bound);
}

TEST(Mpc, LandingCopyHoldsSender) {
  Graph g = gen_graph(GraphModel::star, {.n = 40}, 0);
  MachineLayout lay = build_layout(g, MachineConfig::make(40, 0.5));
  for (NodeId u = 1; u < 40; ++u) {
    const NodeCopy& c = lay.copies[lay.landing_copy[g.offset(u)]];
    auto nb = g.neighbors(0);
    const auto pos = static_cast<std::uint32_t>(std::lower_bound(nb.begin(), nb.end(), u) - nb.begin());
    EXPECT_GE(pos, c.first);
    EXPECT_LT(pos, c.first + c.count);
  }
}

TEST(Mpc, AggregateSumGivesDegree) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 500, .p = 0.05}, 2);
  MachineLayout lay = build_layout(g, MachineConfig::make(500, 0.5));
  RoundMetrics m;
  auto out = aggregate_separable(lay, g, FoldOp::sum, std::vector<Word>(500, 1), m);
  for (NodeId v = 0; v < 500; ++v) EXPECT_EQ(out[v], g.degree(v));
  EXPECT_GE(m.round_count(), 1u);
}

TEST(Mpc, AggregateMaxOnPath) {
  Graph g = gen_graph(GraphModel::path, {.n = 3}, 0);
  MachineConfig mc;
  mc.S = 2;
  MachineLayout lay = build_layout(g, mc);
  RoundMetrics m;
  auto out = aggregate_separable(lay, g, FoldOp::max, {5, 1, 9}, m);
  EXPECT_EQ(out, (std::vector<Word>{1, 9, 1}));
}

TEST(Mpc, AggregateOrMatchesBruteForce) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 2000, .p = 0.01}, 5);
  MachineLayout lay = build_layout(g, MachineConfig::make(2000, 0.5));
  SeededStream rng(5);
  std::vector<Word> bits(2000);
  for (auto& b : bits) b = rng.below(2);
  RoundMetrics m;
  auto out = aggregate_separable(lay, g, FoldOp::bit_or, bits, m);
  for (NodeId v = 0; v < 2000; ++v) {
    Word want = 0;
    for (NodeId u : g.neighbors(v)) want |= bits[u];
    EXPECT_EQ(out[v], want);
  }
}

TEST(Mpc, AggregateOnSplitNodes) {
  // Hub of degree 299 split across many machines.
  Graph g = gen_graph(GraphModel::star, {.n = 300}, 0);
  MachineConfig cfg = MachineConfig::make(300, 0.5);
  MachineLayout lay = build_layout(g, cfg);
  ASSERT_GT(lay.num_copies(0), 1u);
  std::vector<Word> vals(300);
  for (NodeId v = 0; v < 300; ++v) vals[v] = v;
  RoundMetrics m;
  auto out = aggregate_separable(lay, g, FoldOp::sum, vals, m);
  EXPECT_EQ(out[0], 299u * 300 / 2);
  EXPECT_EQ(out[5], 0u);
  for (const MpcRound& r : m.rounds) {
    EXPECT_LE(r.max_sent, cfg.S);
    EXPECT_LE(r.max_recv, cfg.S);
  }
}

TEST(Mpc, ExchangeEmptyCostsOneRound) {
  RoundMetrics m;
  auto out = exchange(4, 10, {}, m);
  EXPECT_TRUE(out.empty());
  ASSERT_EQ(m.round_count(), 1u);
  EXPECT_EQ(m.rounds[0].max_sent, 0u);
}

TEST(Mpc, ExchangeRespectsSendCap) {
  const std::size_t S = 5;
  std::vector<MachineMessage> msgs;
  for (std::uint32_t i = 0; i < 3 * S; ++i) msgs.push_back({0, i + 1, {i}});
  RoundMetrics m;
  auto out = exchange(3 * S + 1, S, msgs, m);
  EXPECT_EQ(out.size(), 3 * S);
  EXPECT_EQ(m.round_count(), 3u);
}

TEST(Mpc, ExchangeAllToAll) {
  const std::size_t n = 10000;
  MachineConfig cfg = MachineConfig::make(n, 0.5);
  const auto k = static_cast<std::uint32_t>(std::ceil(std::pow(n, 0.5)));
  std::vector<MachineMessage> msgs;
  for (std::uint32_t a = 0; a < k; ++a) {
    for (std::uint32_t b = 0; b < k; ++b) {
      if (a != b) msgs.push_back({a, b, {a}});
    }
  }
  RoundMetrics m;
  exchange(k, cfg.S, msgs, m);
  EXPECT_EQ(m.round_count(), (k - 1 + cfg.S - 1) / cfg.S);
}

TEST(Mpc, ExchangeRejectsOversizedMessage) {
  RoundMetrics m;
  EXPECT_THROW(exchange(2, 2, {{0, 1, {1, 2, 3}}}, m), CapacityError);
}

TEST(Mpc, ChargeStepSplitsHeavyTraffic) {
  RoundMetrics m;
  Traffic t(2);
  t.add(0, 1, 25);
  EXPECT_EQ(charge_step(m, "x", t, 10, {}), 3u);
}

TEST(Mpc, AuditLegalAndForcedFailure) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 1000, .p = 0.01}, 3);
  MachineConfig cfg = MachineConfig::make(1000, 0.5);
  MachineLayout lay = build_layout(g, cfg);
  RoundMetrics m;
  aggregate_separable(lay, g, FoldOp::sum, std::vector<Word>(1000, 1), m);
  EXPECT_TRUE(audit(m, cfg, 1000, g.num_edges()).pass);
  cfg.budget_override = 1.0;
  AuditReport bad = audit(m, cfg, 1000, g.num_edges());
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.first_bad_round, 1);
}

TEST(Mpc, TwoRulingSetPipelinePassesAudit) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.005}, 1);
  PipelineOptions opt;
  opt.engine.engine = Engine::mpc_v1;
  RulingSetResult r = two_ruling_set(g, opt);
  ASSERT_TRUE(r.metrics.audit.has_value());
  EXPECT_TRUE(r.metrics.audit->pass) << r.metrics.audit->reason;
}
