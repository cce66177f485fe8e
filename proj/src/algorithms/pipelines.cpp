#include "sagsim/algorithms/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace sagsim {

namespace {

constexpr std::uint64_t kSaltSparsify = 0x5350'0000;
constexpr std::uint64_t kSaltShatter = 0x5348'0000;
constexpr std::uint64_t kSaltLuby = 0x4c55'0000;

std::vector<NodeId> lift(const InducedSubgraph& sub, const std::vector<NodeId>& local) {
  std::vector<NodeId> out;
  out.reserve(local.size());
  for (NodeId v : local) out.push_back(sub.to_parent[v]);
  return out;
}

std::vector<NodeId> all_nodes(const Graph& g) {
  std::vector<NodeId> v(g.num_nodes());
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

double delta_of(const Graph& g) {
  return static_cast<double>(std::max<std::size_t>(g.max_degree(), 1));
}

struct MisOutcome {
  std::vector<NodeId> set;  // input ids
  std::size_t shatter_size = 0;
  std::size_t residual_size = 0;
  std::vector<std::size_t> components;
};

/// Shatter followed by finish-off on g[nodes].
MisOutcome shatter_mis(const Graph& g, const std::vector<NodeId>& nodes, Session& s) {
  const PipelineOptions& opt = s.options();
  const InducedSubgraph sub = induced_subgraph(g, nodes);
  ShatterParams sp;
  sp.delta = opt.shatter_delta;
  sp.iterations = opt.shatter_iterations;
  sp.phase_iterations = opt.shatter_phase_iterations;
  sp.degree_ordered = opt.engine.engine == Engine::mpc_v2;
  sp.n_for_log = s.n_global();
  const ShatterProgram prog(sub.graph, sp);
  const auto states = s.execute(sub.graph, prog, s.tape(kSaltShatter), "shatter");
  const ShatterOutput out = shatter_output(sub.graph, states);
  FinishReport fin = finish_off(sub.graph, out.residual, s);

  MisOutcome res;
  res.shatter_size = out.independent.size();
  res.residual_size = out.residual.size();
  res.components = fin.component_sizes;
  res.set = lift(sub, out.independent);
  const auto extra = lift(sub, fin.independent);
  res.set.insert(res.set.end(), extra.begin(), extra.end());
  std::sort(res.set.begin(), res.set.end());
  return res;
}

struct SparsifyOutcome {
  std::vector<NodeId> u;  // input ids
  StageReport report;
};

SparsifyOutcome sparsify_stage(const Graph& g, const std::vector<NodeId>& nodes, double f, int index, Session& s) {
  const PipelineOptions& opt = s.options();
  const InducedSubgraph sub = induced_subgraph(g, nodes);
  SparsifyParams params{f, opt.c, s.n_global()};
  const SparsifyProgram prog(sub.graph, params);
  const auto states = s.execute(sub.graph, prog, s.tape(kSaltSparsify + static_cast<std::uint64_t>(index)),
                                "sparsify-" + std::to_string(index));
  std::vector<NodeId> local;
  for (NodeId v = 0; v < sub.graph.num_nodes(); ++v) {
    if (states[v].in_u) local.push_back(v);
  }
  SparsifyOutcome out;
  out.report.index = index;
  out.report.f = f;
  out.report.input_size = nodes.size();
  out.report.input_max_degree = sub.graph.max_degree();
  out.report.output_size = local.size();
  out.report.dominates = verify_domination(sub.graph, local, 1);
  out.report.degree = verify_degree_bound(sub.graph, local, f, opt.c, static_cast<double>(s.n_global()));
  out.u = lift(sub, local);
  return out;
}

void check_common(const PipelineOptions& opt) {
  if (!(opt.c >= 3.0)) throw ConfigError("sparsification constant c must be >= 3");
  if (opt.f && !(*opt.f > 3.0)) throw ConfigError("sparsification parameter f must exceed 3");
  if (!(opt.shatter_delta > 0.0)) throw ConfigError("shatter delta must be > 0");
}

RulingSetResult ruling_impl(const Graph& g, int beta, const std::vector<double>& fs, const std::string& schedule,
                            const std::string& name, const PipelineOptions& opt) {
  check_common(opt);
  Session s(g, opt);
  RulingSetResult res;
  res.algorithm = name;
  res.beta = beta;
  res.schedule = schedule;
  res.f_schedule = fs;
  std::vector<NodeId> current = all_nodes(g);
  for (int i = 1; i < beta; ++i) {
    SparsifyOutcome st = sparsify_stage(g, current, fs[static_cast<std::size_t>(i) - 1], i, s);
    current = st.u;
    res.stages.push_back(std::move(st.u));
    res.stage_reports.push_back(std::move(st.report));
  }
  MisOutcome m = shatter_mis(g, current, s);
  res.set = std::move(m.set);
  res.shatter_size = m.shatter_size;
  res.residual_size = m.residual_size;
  res.residual_components = std::move(m.components);
  res.independent = verify_independent(g, res.set);
  res.dominated = verify_domination(g, res.set, beta);
  s.finish(g.num_nodes(), g.num_edges());
  res.metrics = std::move(s.metrics());
  return res;
}

}  // namespace

std::string to_string(Engine e) {
  switch (e) {
    case Engine::congest: return "congest";
    case Engine::mpc_v1: return "mpc-v1";
    case Engine::mpc_v2: return "mpc-v2";
  }
  return "?";
}

Engine parse_engine(const std::string& name) {
  if (name == "congest") return Engine::congest;
  if (name == "mpc-v1" || name == "mpc_v1") return Engine::mpc_v1;
  if (name == "mpc-v2" || name == "mpc_v2") return Engine::mpc_v2;
  throw ConfigError("unknown engine '" + name + "' (expected congest, mpc-v1 or mpc-v2)");
}

Session::Session(const Graph& input, const PipelineOptions& opt) : opt_(opt), n_(input.num_nodes()) {
  // A single-node input would give S = 1; two words is the smallest meaningful machine.
  machine_ = MachineConfig::make(std::max<std::size_t>(n_, 2), opt.engine.epsilon, opt.engine.memory);
  machine_.c_mem = opt.engine.c_mem;
  machine_.budget_override = opt.engine.budget_override;
}

RandomTape Session::tape(std::uint64_t salt) const {
  return RandomTape(splitmix64(opt_.seed ^ splitmix64(salt)), n_);
}

void Session::finish(std::size_t n, std::size_t m) {
  if (opt_.engine.engine == Engine::congest) return;
  metrics_.mpc.peak_machines = std::max(metrics_.mpc.peak_machines, metrics_.machines);
  metrics_.audit = audit(metrics_.mpc, machine_, n, m);
}

std::vector<NodeId> greedy_mis(const Graph& g) {
  std::vector<NodeId> out;
  std::vector<bool> blocked(g.num_nodes(), false);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (blocked[v]) continue;
    out.push_back(v);
    for (NodeId u : g.neighbors(v)) blocked[u] = true;
  }
  return out;
}

FinishReport finish_off(const Graph& g, std::span<const NodeId> residual, Session& session) {
  FinishReport rep;
  if (residual.empty()) return rep;
  const InducedSubgraph sub = induced_subgraph(g, residual);
  const Graph& h = sub.graph;
  const std::size_t n = h.num_nodes();
  const std::size_t S = session.machine().S;
  const bool mpc = session.options().engine.engine != Engine::congest;

  // Components and a diameter upper bound (twice the eccentricity of the smallest id).
  std::vector<NodeId> comp(n, kNoNode);
  std::vector<std::uint32_t> dist(n, 0);
  std::vector<NodeId> leaders;
  for (NodeId root = 0; root < n; ++root) {
    if (comp[root] != kNoNode) continue;
    const auto c = static_cast<NodeId>(leaders.size());
    leaders.push_back(root);
    std::deque<NodeId> q{root};
    comp[root] = c;
    std::size_t size = 0, degsum = 0;
    std::uint32_t ecc = 0;
    while (!q.empty()) {
      const NodeId x = q.front();
      q.pop_front();
      ++size;
      degsum += h.degree(x);
      ecc = std::max(ecc, dist[x]);
      for (NodeId y : h.neighbors(x)) {
        if (comp[y] == kNoNode) {
          comp[y] = c;
          dist[y] = dist[x] + 1;
          q.push_back(y);
        }
      }
    }
    const std::size_t words = size + degsum;  // ids plus both directions of every edge
    rep.component_sizes.push_back(size);
    rep.max_component_words = std::max(rep.max_component_words, words);
    rep.diameter_bound = std::max<std::size_t>(rep.diameter_bound, 2 * ecc);
    // Capacity is measured in nodes; the adjacency footprint is reported separately.
    if (mpc && size > S) {
      throw CapacityError("residual component containing node " + std::to_string(sub.to_parent[root]) +
                          " has " + std::to_string(size) + " nodes (" + std::to_string(words) +
                          " words with adjacency), more than one machine (S=" + std::to_string(S) + ")");
    }
  }
  std::sort(rep.component_sizes.begin(), rep.component_sizes.end());

  for (NodeId v : greedy_mis(h)) rep.independent.push_back(sub.to_parent[v]);

  if (mpc) {
    RoundMetrics& metrics = session.metrics().mpc;
    const std::uint64_t before = metrics.round_count();
    const MachineLayout lay = build_layout(h, session.machine());
    const Residency res{lay.max_machine_words(), lay.total_words() + n};
    // Label propagation with pointer doubling: ceil(log2(D+1)) + 1 min-label exchanges.
    const int steps = ceil_log2(rep.diameter_bound + 1) + 1;
    std::vector<Word> label(n);
    std::iota(label.begin(), label.end(), Word{0});
    for (int i = 0; i < steps; ++i) {
      const auto nb = aggregate_separable(lay, h, FoldOp::min, label, metrics);
      for (NodeId v = 0; v < n; ++v) label[v] = std::min(label[v], nb[v]);
    }
    // Gather every component onto the machine of its leader, then send the answer back.
    Traffic gather(lay.num_machines()), commit(lay.num_machines());
    for (NodeId v = 0; v < n; ++v) {
      const std::uint32_t home = lay.host(leaders[comp[v]]);
      gather.add(lay.host(v), home, 1 + h.degree(v));
      commit.add(home, lay.host(v), 1);
    }
    charge_step(metrics, "finish-gather", gather, S, res);
    charge_step(metrics, "finish-commit", commit, S, res);
    session.metrics().machines = std::max(session.metrics().machines, lay.num_machines() + leaders.size());
    rep.mpc_rounds = metrics.round_count() - before;
  }
  return rep;
}

bool RulingSetResult::success() const {
  if (independence_required && !independent.pass) return false;
  if (domination_required && !dominated.pass) return false;
  return std::all_of(stage_reports.begin(), stage_reports.end(),
                     [](const StageReport& s) { return s.dominates.pass; });
}

double clamp_f(double f) { return std::max(f, 4.0); }

double two_ruling_set_f(double delta, MemoryMode mode) {
  const double lg = std::log2(std::max(delta, 1.0));
  const double e = mode == MemoryMode::unrestricted ? 2.0 / 3.0 : 0.5;
  return std::exp2(std::pow(lg, e));
}

std::vector<double> beta_f_schedule(int beta, double delta, MemoryMode mode) {
  if (beta < 2) throw ConfigError("beta must be >= 2");
  const double lg = std::log2(std::max(delta, 1.0));
  std::vector<double> f(static_cast<std::size_t>(beta) - 1);
  if (mode == MemoryMode::unrestricted) {
    const double base = 0.5 + 1.0 / (std::ldexp(1.0, beta + 1) - 2.0);
    double d = base;
    for (int i = beta - 1; i >= 1; --i) {
      f[static_cast<std::size_t>(i) - 1] = std::exp2(std::pow(lg, d));
      d = base + d / 2.0;
    }
  } else {
    for (int i = 1; i < beta; ++i) {
      f[static_cast<std::size_t>(i) - 1] = std::exp2(std::pow(lg, 1.0 - static_cast<double>(i) / beta));
    }
  }
  return f;
}

RulingSetResult two_ruling_set(const Graph& g, const PipelineOptions& opt) {
  const double f = opt.f ? *opt.f : clamp_f(two_ruling_set_f(delta_of(g), opt.engine.memory));
  const std::string schedule = opt.f ? "fixed" : (opt.engine.memory == MemoryMode::unrestricted ? "i" : "ii");
  return ruling_impl(g, 2, {f}, schedule, "2rs", opt);
}

RulingSetResult beta_ruling_set(const Graph& g, int beta, const PipelineOptions& opt) {
  if (beta < 2) throw ConfigError("beta must be >= 2");
  std::vector<double> fs;
  if (opt.f) {
    fs.assign(static_cast<std::size_t>(beta) - 1, *opt.f);
  } else {
    fs = beta_f_schedule(beta, delta_of(g), opt.engine.memory);
    for (double& f : fs) f = clamp_f(f);
  }
  const std::string schedule = opt.f ? "fixed" : (opt.engine.memory == MemoryMode::unrestricted ? "i" : "ii");
  return ruling_impl(g, beta, fs, schedule, "brs", opt);
}

RulingSetResult mis(const Graph& g, const PipelineOptions& opt) {
  check_common(opt);
  Session s(g, opt);
  RulingSetResult res;
  res.algorithm = "mis";
  MisOutcome m = shatter_mis(g, all_nodes(g), s);
  res.set = std::move(m.set);
  res.shatter_size = m.shatter_size;
  res.residual_size = m.residual_size;
  res.residual_components = std::move(m.components);
  res.independent = verify_independent(g, res.set);
  res.dominated = verify_domination(g, res.set, 1);
  s.finish(g.num_nodes(), g.num_edges());
  res.metrics = std::move(s.metrics());
  return res;
}

RulingSetResult luby_mis(const Graph& g, const PipelineOptions& opt) {
  Session s(g, opt);
  RulingSetResult res;
  res.algorithm = "luby";
  const RandomTape tape = s.tape(kSaltLuby);
  const LubyProgram prog(g, tape);
  const auto states = s.execute(g, prog, tape, "luby");
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (states[v].in_mis) res.set.push_back(v);
  }
  res.independent = verify_independent(g, res.set);
  res.dominated = verify_domination(g, res.set, 1);
  s.finish(g.num_nodes(), g.num_edges());
  res.metrics = std::move(s.metrics());
  return res;
}

RulingSetResult run_sparsify(const Graph& g, const PipelineOptions& opt) {
  check_common(opt);
  Session s(g, opt);
  const double f = opt.f ? *opt.f : clamp_f(two_ruling_set_f(delta_of(g), opt.engine.memory));
  RulingSetResult res;
  res.algorithm = "sparsify";
  res.f_schedule = {f};
  res.schedule = opt.f ? "fixed" : (opt.engine.memory == MemoryMode::unrestricted ? "i" : "ii");
  SparsifyOutcome st = sparsify_stage(g, all_nodes(g), f, 1, s);
  res.set = st.u;
  res.stages.push_back(std::move(st.u));
  res.stage_reports.push_back(std::move(st.report));
  res.independent = verify_independent(g, res.set);
  res.independence_required = false;
  res.dominated = verify_domination(g, res.set, 1);
  s.finish(g.num_nodes(), g.num_edges());
  res.metrics = std::move(s.metrics());
  return res;
}

RulingSetResult run_shatter(const Graph& g, const PipelineOptions& opt) {
  check_common(opt);
  Session s(g, opt);
  ShatterParams sp;
  sp.delta = opt.shatter_delta;
  sp.iterations = opt.shatter_iterations;
  sp.phase_iterations = opt.shatter_phase_iterations;
  sp.degree_ordered = opt.engine.engine == Engine::mpc_v2;
  const ShatterProgram prog(g, sp);
  const auto states = s.execute(g, prog, s.tape(kSaltShatter), "shatter");
  const ShatterOutput out = shatter_output(g, states);
  RulingSetResult res;
  res.algorithm = "shatter";
  res.set = out.independent;
  res.shatter_size = out.independent.size();
  res.residual_size = out.residual.size();
  res.residual_components = component_report(g, out.residual).sizes;
  res.independent = verify_independent(g, res.set);
  res.dominated = verify_domination(g, res.set, 1);
  res.domination_required = false;
  s.finish(g.num_nodes(), g.num_edges());
  res.metrics = std::move(s.metrics());
  return res;
}

}  // namespace sagsim
