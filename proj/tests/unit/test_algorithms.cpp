#include <gtest/gtest.h>

#include <cmath>

#include "sagsim/algorithms/pipelines.hpp"
#include "sagsim/verify.hpp"

using namespace sagsim;

namespace {

PipelineOptions opts(Engine e, std::uint64_t seed) {
  PipelineOptions o;
  o.engine.engine = e;
  o.seed = seed;
  return o;
}

Graph edgeless(std::size_t n) { return Graph::from_edges(n, {}); }

}  // namespace

TEST(Sparsify, ProbabilityFormula) {
  EXPECT_DOUBLE_EQ(sparsify_probability(1, 4.0, 3.0, 10.0, 256.0), 120.0 / 256.0);
  EXPECT_DOUBLE_EQ(sparsify_probability(3, 4.0, 3.0, 10.0, 256.0), 1.0);
  EXPECT_EQ(sparsify_iterations(8.0, 100.0), 3);
  EXPECT_EQ(sparsify_iterations(8.0, 64.0), 2);
  EXPECT_EQ(sparsify_iterations(8.0, 1.0), 1);
}

TEST(Sparsify, EdgelessGraphKeepsEveryone) {
  Graph g = edgeless(20);
  RulingSetResult r = run_sparsify(g, opts(Engine::congest, 1));
  EXPECT_EQ(r.set.size(), 20u);
}

TEST(Sparsify, RoundCountIsThreePerIteration) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 2000, .p = 0.02}, 1);
  SparsifyProgram prog(g, {8.0, 3.0, 0});
  const int k = static_cast<int>(std::ceil(std::log(static_cast<double>(g.max_degree())) / std::log(8.0) - 1e-12));
  EXPECT_EQ(prog.iterations(), k);
  EXPECT_EQ(prog.total_rounds(), 3 * k);
}

TEST(Sparsify, DominatesAndRespectsDegreeBound) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.02}, 1);
  PipelineOptions o = opts(Engine::congest, 1);
  o.f = 8.0;
  RulingSetResult r = run_sparsify(g, o);
  EXPECT_TRUE(r.dominated.pass);
  Verdict d = verify_degree_bound(g, r.set, 8.0, 3.0, 10000.0);
  EXPECT_TRUE(d.pass) << d.measured;
  EXPECT_NEAR(d.bound, 442.1, 0.1);
}

TEST(Sparsify, RejectsBadParameters) {
  Graph g = gen_graph(GraphModel::path, {.n = 10}, 0);
  PipelineOptions o = opts(Engine::congest, 1);
  o.f = 3.0;
  EXPECT_THROW(run_sparsify(g, o), ConfigError);
  o.f = 8.0;
  o.c = 2.0;
  EXPECT_THROW(run_sparsify(g, o), ConfigError);
}

TEST(Shatter, SingleNodeJoins) {
  Graph g = edgeless(1);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomTape tape(seed, 2);
    ShatterProgram prog(g, {.delta = 1.0, .iterations = 40});
    auto run = run_reference(g, prog, tape);
    EXPECT_TRUE(ShatterProgram::in_independent_set(run.states[0]));
  }
}

TEST(Shatter, RoundScheduleShape) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 1000, .p = 0.02}, 1);
  ShatterProgram prog(g, {.delta = 1.0, .iterations = 10, .phase_iterations = 3});
  EXPECT_EQ(prog.total_iterations(), 10);
  EXPECT_EQ(prog.phases().size(), 4u);
  EXPECT_EQ(prog.total_rounds(), 2 * 10 + 4);
  EXPECT_EQ(prog.kind(1), RoundKind::separable);
  EXPECT_EQ(prog.kind(2), RoundKind::sparse);
  EXPECT_EQ(prog.coin_round(3), 2);
}

TEST(Shatter, DegreeOrderedStagesHalve) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 2000, .p = 0.05}, 1);
  ShatterProgram prog(g, {.delta = 1.0, .degree_ordered = true});
  auto lens = prog.stage_lengths();
  ASSERT_GE(lens.size(), 2u);
  for (std::size_t i = 1; i < lens.size(); ++i) EXPECT_EQ(lens[i], 2 * (lens[i - 1] / 4));
}

TEST(Shatter, SuperHeavyHalvesDesire) {
  // A hub whose neighbors' desire sum exceeds the super-heavy threshold at the first pre-phase.
  Graph g = gen_graph(GraphModel::star, {.n = 400}, 0);
  ShatterParams p{.delta = 1.0, .iterations = 4, .phase_iterations = 1};
  ShatterProgram prog(g, p);
  RandomTape tape(1, g.num_nodes());
  NodeContext c0{0, 0, g.neighbors(0), g.num_nodes(), word_bits(g.num_nodes()), &tape};
  auto s = prog.init(c0).state;
  NodeContext c1 = c0;
  c1.round = 1;
  std::optional<Payload> sum = Payload::of(0, Word{399} << 39);  // 399 neighbors at p = 1/2
  ASSERT_GE(399 * 0.5, prog.super_heavy_threshold());
  prog.receive(s, c1, sum);
  EXPECT_EQ(s.mode, ShatterProgram::Mode::super_heavy);
  EXPECT_EQ(s.k, 1);
  // It beeps with 2^-(k + iter) during the phase and its k grows at the next pre-phase.
  NodeContext c3 = c0;
  c3.round = 4;
  std::optional<Payload> none;
  prog.receive(s, c3, none);
  EXPECT_EQ(s.k, 2);
  EXPECT_EQ(s.mode, ShatterProgram::Mode::live);
}

TEST(Shatter, OutputIsIndependentWithSmallResidual) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.005}, 4);
  RandomTape tape(4, g.num_nodes());
  ShatterProgram prog(g, {.delta = 1.0});
  auto run = run_reference(g, prog, tape);
  ShatterOutput out = shatter_output(g, run.states);
  EXPECT_TRUE(verify_independent(g, out.independent).pass);
  ComponentReport cr = component_report(g, out.residual);
  EXPECT_LE(cr.max_size(), MachineConfig::make(10000, 0.5).S);
}

TEST(FinishOff, Examples) {
  Graph g = Graph::from_edges(4, {{0, 1}, {2, 3}});
  PipelineOptions o = opts(Engine::mpc_v1, 1);
  Session s(g, o);
  std::vector<NodeId> all{0, 1, 2, 3};
  FinishReport r = finish_off(g, all, s);
  EXPECT_EQ(r.independent, (std::vector<NodeId>{0, 2}));
  FinishReport e = finish_off(g, std::vector<NodeId>{}, s);
  EXPECT_TRUE(e.independent.empty());
}

TEST(FinishOff, ResidualOfShatterIsSolvedMaximally) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.005}, 4);
  RandomTape tape(4, g.num_nodes());
  ShatterProgram prog(g, {.delta = 1.0, .iterations = 6});
  auto run = run_reference(g, prog, tape);
  ShatterOutput out = shatter_output(g, run.states);
  ASSERT_FALSE(out.residual.empty());
  Session s(g, opts(Engine::congest, 1));
  FinishReport r = finish_off(g, out.residual, s);
  auto sub = induced_subgraph(g, out.residual);
  std::vector<NodeId> local;
  for (NodeId v : r.independent) local.push_back(sub.to_child[v]);
  EXPECT_TRUE(verify_maximal_independent(sub.graph, local).pass);
}

TEST(FinishOff, OversizedComponentNamed) {
  Graph g = gen_graph(GraphModel::clique, {.n = 30}, 0);
  Session s(g, opts(Engine::mpc_v1, 1));
  std::vector<NodeId> all(30);
  for (NodeId v = 0; v < 30; ++v) all[v] = v;
  try {
    finish_off(g, all, s);
    FAIL() << "expected a capacity error";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("component containing node 0"), std::string::npos) << e.what();
  }
}

TEST(RulingSet, CliqueGivesOneNode) {
  Graph g = gen_graph(GraphModel::clique, {.n = 10}, 0);
  for (Engine e : {Engine::congest, Engine::mpc_v1, Engine::mpc_v2}) {
    RulingSetResult r = two_ruling_set(g, opts(e, 3));
    EXPECT_EQ(r.set.size(), 1u);
    EXPECT_TRUE(verify_domination(g, r.set, 1).pass);
  }
}

TEST(RulingSet, PathAllSeeds) {
  Graph g = gen_graph(GraphModel::path, {.n = 7}, 0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RulingSetResult r = two_ruling_set(g, opts(Engine::mpc_v1, seed));
    EXPECT_TRUE(r.independent.pass);
    EXPECT_TRUE(r.dominated.pass);
    EXPECT_TRUE(r.success());
  }
}

TEST(RulingSet, FSchedules) {
  const double d16 = std::ldexp(1.0, 16);
  EXPECT_NEAR(std::log2(two_ruling_set_f(d16, MemoryMode::unrestricted)), std::pow(16.0, 2.0 / 3.0), 1e-9);
  EXPECT_NEAR(two_ruling_set_f(d16, MemoryMode::input_linear), 16.0, 1e-9);
  auto ii = beta_f_schedule(2, d16, MemoryMode::input_linear);
  ASSERT_EQ(ii.size(), 1u);
  EXPECT_NEAR(ii[0], 16.0, 1e-9);
  auto i2 = beta_f_schedule(2, d16, MemoryMode::unrestricted);
  EXPECT_NEAR(i2[0], two_ruling_set_f(d16, MemoryMode::unrestricted), 1e-9);
  auto i3 = beta_f_schedule(3, d16, MemoryMode::unrestricted);
  ASSERT_EQ(i3.size(), 2u);
  const double d2 = 0.5 + 1.0 / 14.0;
  EXPECT_NEAR(std::log2(i3[1]), std::pow(16.0, d2), 1e-9);
  EXPECT_NEAR(std::log2(i3[0]), std::pow(16.0, 0.5 + 1.0 / 14.0 + d2 / 2), 1e-9);
  EXPECT_DOUBLE_EQ(clamp_f(2.0), 4.0);
  EXPECT_THROW(beta_f_schedule(1, 10.0, MemoryMode::unrestricted), ConfigError);
}

TEST(RulingSet, BetaTwoHasOneStage) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 2000, .p = 0.01}, 1);
  RulingSetResult r = beta_ruling_set(g, 2, opts(Engine::mpc_v1, 1));
  EXPECT_EQ(r.stages.size(), 1u);
  RulingSetResult two = two_ruling_set(g, opts(Engine::mpc_v1, 1));
  EXPECT_EQ(r.set, two.set);
}

TEST(RulingSet, BetaThreeLargeGraph) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 100000, .p = 0.001}, 6);
  RulingSetResult r = beta_ruling_set(g, 3, opts(Engine::mpc_v1, 6));
  EXPECT_TRUE(r.independent.pass);
  EXPECT_TRUE(r.dominated.pass);
  ASSERT_EQ(r.stage_reports.size(), 2u);
  for (const StageReport& s : r.stage_reports) {
    EXPECT_TRUE(s.dominates.pass);
    EXPECT_TRUE(s.degree.pass) << s.degree.measured << " > " << s.degree.bound;
  }
}

TEST(RulingSet, EnginesAgree) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 3000, .p = 0.01}, 2);
  RulingSetResult a = two_ruling_set(g, opts(Engine::congest, 5));
  RulingSetResult b = two_ruling_set(g, opts(Engine::mpc_v1, 5));
  EXPECT_EQ(a.set, b.set);
  PipelineOptions o = opts(Engine::mpc_v1, 5);
  o.engine.force_ell = 3;
  o.shatter_phase_iterations = 3;
  PipelineOptions p = opts(Engine::congest, 5);
  p.shatter_phase_iterations = 3;
  EXPECT_EQ(two_ruling_set(g, o).set, two_ruling_set(g, p).set);
}

TEST(Mis, ShatterPlusFinishIsMaximal) {
  Graph g = gen_graph(GraphModel::gnp, {.n = 5000, .p = 0.004}, 3);
  RulingSetResult r = mis(g, opts(Engine::mpc_v2, 3));
  EXPECT_TRUE(verify_maximal_independent(g, r.set).pass);
}

TEST(Luby, Examples) {
  RulingSetResult e = luby_mis(edgeless(15), opts(Engine::congest, 1));
  EXPECT_EQ(e.set.size(), 15u);
  RulingSetResult c = luby_mis(gen_graph(GraphModel::clique, {.n = 12}, 0), opts(Engine::mpc_v1, 1));
  EXPECT_EQ(c.set.size(), 1u);
  Graph g = gen_graph(GraphModel::gnp, {.n = 10000, .p = 0.01}, 8);
  RulingSetResult r = luby_mis(g, opts(Engine::mpc_v1, 8));
  EXPECT_TRUE(verify_maximal_independent(g, r.set).pass);
}

TEST(Engine, Names) {
  EXPECT_EQ(parse_engine("mpc-v2"), Engine::mpc_v2);
  EXPECT_EQ(to_string(Engine::congest), "congest");
  EXPECT_THROW(parse_engine("gpu"), ConfigError);
}
