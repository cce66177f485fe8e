#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sagsim/algorithms/luby.hpp"
#include "sagsim/algorithms/shatter.hpp"
#include "sagsim/algorithms/sparsify.hpp"
#include "sagsim/compression.hpp"
#include "sagsim/congest.hpp"
#include "sagsim/mpc.hpp"
#include "sagsim/verify.hpp"

namespace sagsim {

enum class Engine { congest, mpc_v1, mpc_v2 };

std::string to_string(Engine e);
Engine parse_engine(const std::string& name);

struct EngineConfig {
  Engine engine = Engine::mpc_v1;
  double epsilon = 0.5;
  MemoryMode memory = MemoryMode::unrestricted;
  std::optional<int> force_ell;
  OverflowPolicy overflow = OverflowPolicy::shrink;
  /// Uncompressed baseline: every sparse round becomes one direct aggregation.
  bool direct_only = false;
  double c_mem = 4.0;
  std::optional<double> budget_override;
};

struct PipelineOptions {
  EngineConfig engine;
  std::uint64_t seed = 1;
  double c = 3.0;
  /// Overrides every sparsification parameter when set (must exceed 3).
  std::optional<double> f;
  double shatter_delta = 1.0;
  int shatter_iterations = 0;        // 0: default from the subgraph's max degree
  int shatter_phase_iterations = 0;  // 0: default from delta and n
};

/// One program execution inside a pipeline.
struct ProgramReport {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t max_degree = 0;
  Round scheduled_rounds = 0;
  Round effective_rounds = 0;  // reference engine: rounds before everyone halted
  std::uint64_t mpc_rounds = 0;
  std::vector<PhaseReport> phases;
  std::optional<CongestionReport> congestion;  // reference engine only
};

struct PipelineMetrics {
  Round congest_rounds = 0;
  RoundMetrics mpc;
  std::vector<ProgramReport> programs;
  std::optional<AuditReport> audit;  // MPC engines only
  std::size_t machines = 0;
};

/// Shared state of one pipeline run: engine, machine size (fixed by the input graph), tapes.
class Session {
 public:
  Session(const Graph& input, const PipelineOptions& opt);

  const PipelineOptions& options() const { return opt_; }
  const MachineConfig& machine() const { return machine_; }
  std::size_t n_global() const { return n_; }
  PipelineMetrics& metrics() { return metrics_; }

  /// Independent tape per pipeline stage, keyed by the global node count.
  RandomTape tape(std::uint64_t salt) const;

  /// Runs prog on g (a subgraph of the input) with the configured engine and records it.
  template <SparseProgram P>
  std::vector<typename P::State> execute(const Graph& g, const P& prog, const RandomTape& tape,
                                         const std::string& name, const CompressOptions* override_opts = nullptr);

  /// Runs the final audit for the MPC engines.
  void finish(std::size_t n, std::size_t m);

 private:
  PipelineOptions opt_;
  MachineConfig machine_;
  std::size_t n_;
  PipelineMetrics metrics_;
};

struct FinishReport {
  std::vector<NodeId> independent;  // ids of the graph passed in
  std::vector<std::size_t> component_sizes;
  std::size_t max_component_words = 0;
  std::size_t diameter_bound = 0;
  std::uint64_t mpc_rounds = 0;
};

/// MIS of g[residual]: components are found by label propagation, each gathered onto one
/// machine and solved greedily by ascending id. Throws CapacityError naming the first
/// component with more than S nodes.
FinishReport finish_off(const Graph& g, std::span<const NodeId> residual, Session& session);

/// Greedy MIS by ascending id; exposed for tests.
std::vector<NodeId> greedy_mis(const Graph& g);

struct StageReport {
  int index = 0;  // i for S_i
  double f = 0.0;
  std::size_t input_size = 0;
  std::size_t input_max_degree = 0;
  std::size_t output_size = 0;
  Verdict dominates;  // S_i dominates S_{i-1} within G[S_{i-1}]
  Verdict degree;     // max degree of G[S_i] <= 2 c f_i ln n
};

struct RulingSetResult {
  std::string algorithm;
  std::vector<NodeId> set;
  int beta = 1;
  std::string schedule;
  std::vector<double> f_schedule;
  std::vector<std::vector<NodeId>> stages;  // S_1..S_{beta-1} in input ids
  std::vector<StageReport> stage_reports;
  std::size_t shatter_size = 0;
  std::size_t residual_size = 0;
  std::vector<std::size_t> residual_components;  // ascending sizes
  Verdict independent;
  Verdict dominated;
  bool independence_required = true;
  bool domination_required = true;
  PipelineMetrics metrics;

  /// Hard verdicts and per-stage checks all pass.
  bool success() const;
};

/// 2^((log2 delta)^(2/3)) for unrestricted memory, 2^((log2 delta)^(1/2)) for input-linear.
double two_ruling_set_f(double delta, MemoryMode mode);

/// f_1..f_{beta-1}. Schedule (i) (unrestricted): f_i = 2^((log2 delta)^(d_i)) with
/// d_{beta-1} = 1/2 + 1/(2^(beta+1)-2) and d_{i-1} = 1/2 + 1/(2^(beta+1)-2) + d_i/2.
/// Schedule (ii) (input-linear): f_i = 2^((log2 delta)^(1 - i/beta)).
std::vector<double> beta_f_schedule(int beta, double delta, MemoryMode mode);

/// Values below 4 are raised to 4 so that the sparsification precondition f > 3 holds.
double clamp_f(double f);

RulingSetResult run_sparsify(const Graph& g, const PipelineOptions& opt);
RulingSetResult run_shatter(const Graph& g, const PipelineOptions& opt);
RulingSetResult mis(const Graph& g, const PipelineOptions& opt);
RulingSetResult luby_mis(const Graph& g, const PipelineOptions& opt);
RulingSetResult two_ruling_set(const Graph& g, const PipelineOptions& opt);
RulingSetResult beta_ruling_set(const Graph& g, int beta, const PipelineOptions& opt);

// ---------------------------------------------------------------------------

template <SparseProgram P>
std::vector<typename P::State> Session::execute(const Graph& g, const P& prog, const RandomTape& tape,
                                                const std::string& name, const CompressOptions* override_opts) {
  ProgramReport rep;
  rep.name = name;
  rep.n = g.num_nodes();
  rep.m = g.num_edges();
  rep.max_degree = g.max_degree();
  rep.scheduled_rounds = prog.total_rounds();
  metrics_.congest_rounds += rep.scheduled_rounds;
  std::vector<typename P::State> states;
  if (opt_.engine.engine == Engine::congest) {
    auto run = run_reference(g, prog, tape);
    rep.effective_rounds = run.trace.effective_rounds();
    rep.congestion = check_state_congested(run.trace, g);
    states = std::move(run.states);
  } else {
    CompressOptions co;
    if (override_opts) {
      co = *override_opts;
    } else {
      co.version = opt_.engine.engine == Engine::mpc_v2 ? PlanVersion::v2 : PlanVersion::v1;
      co.force_ell = opt_.engine.force_ell;
      co.overflow = opt_.engine.overflow;
      co.direct_only = opt_.engine.direct_only;
    }
    auto run = run_compressed(g, prog, machine_, tape, co);
    rep.effective_rounds = run.congest_rounds;
    rep.mpc_rounds = run.metrics.round_count();
    rep.phases = std::move(run.phases);
    metrics_.machines = std::max(metrics_.machines, run.metrics.peak_machines);
    metrics_.mpc.append(run.metrics);
    states = std::move(run.states);
  }
  metrics_.programs.push_back(std::move(rep));
  return states;
}

}  // namespace sagsim
