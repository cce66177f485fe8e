#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/mpc.hpp"
#include "sagsim/random_tape.hpp"
#include "sagsim/sparse_program.hpp"

namespace sagsim {

enum class PlanVersion { v1, v2 };

struct PhasePlan {
  Round start = 0;  // t: the phase simulates rounds t+1 .. t+ell
  int ell = 1;
  double alpha = 2.0;
  double alpha_prime = 0.0;  // alpha * log2(n)^2, v2 only
  int stage = 0;             // v2 only
  bool case_ii = false;      // v2 only
  PlanVersion version = PlanVersion::v1;
};

/// max(1, floor(sqrt(eps/8 * log_alpha n))).
int ell_v1(double alpha, double n, double eps);

struct StagePlan {
  int ell = 1;
  bool case_ii = false;
  double alpha_prime = 0.0;
};

/// Case (i) (Delta^(1/2^i) >= n^(eps/2)) reuses ell_v1; otherwise
/// ell_i = max(1, floor(sqrt(log_{alpha'} Delta^(1/2^(i+1)) / 2))), alpha' = alpha log2^2 n.
StagePlan ell_v2(int stage, double alpha, double delta, double n, double eps);

std::vector<PhasePlan> plan_phases_v1(Round total_rounds, double alpha, double n, double eps);

/// Stage i covers stage_lengths[i-1] consecutive rounds. Throws ConfigError unless
/// 2 * R_i <= R_{i-1} for every i >= 2.
std::vector<PhasePlan> plan_phases_v2(const std::vector<Round>& stage_lengths, double alpha, double delta,
                                      double n, double eps);

/// Marking data for one phase starting after round t.
struct Marking {
  Round t = 0;
  int ell = 1;
  std::vector<double> estimate;      // estimate[u * ell + j] = p~_{t+1+j}(u)
  std::vector<std::uint32_t> mask;   // bit j: marked for round t+1+j
  std::vector<std::uint8_t> frozen;
  std::vector<std::uint8_t> halted;

  bool marked(NodeId u) const { return mask[u] != 0; }
  bool marked_for(NodeId u, int j) const { return (mask[u] >> j) & 1U; }
  double est(NodeId u, int j) const { return estimate[static_cast<std::size_t>(u) * ell + j]; }
};

/// Sampled subgraph around a center: the center plus marked nodes reachable from it by at
/// most ell hops whose intermediate nodes are marked and not frozen.
struct Ball {
  NodeId center = kNoNode;
  int radius = 0;
  std::vector<NodeId> members;   // center first, then BFS order
  std::vector<int> dist;         // hop distance along marked paths
  std::vector<Edge> edges;       // induced edges (u < v, global ids), sorted
  std::size_t words = 0;
  std::vector<std::size_t> words_within;  // words_within[r]: footprint of the radius-r ball
  bool overflow = false;         // exceeded the word cap; members/edges are partial
};

/// Word footprint of one member: id, phase-start state, ell coin values.
inline std::size_t member_words(std::size_t state_words, int ell) {
  return 1 + state_words + static_cast<std::size_t>(ell);
}

/// Builds Ball(center, ell). state_words may be empty (counted as 0). Stops early once the
/// footprint exceeds cap_words.
Ball gather_ball(const Graph& g, const Marking& mk, NodeId center, int ell,
                 const std::vector<std::uint32_t>& state_words, std::size_t cap_words);

struct BallBound {
  double k = 0.0;        // sum over tau of A~_tau * log2 n
  double planned = 0.0;  // sum_{j=0..ell} k^j
  double strict = 0.0;   // k^ell
};

BallBound ball_bound(const std::vector<double>& a_tilde, double n, int ell);

/// A~_tau for tau = t+1..t+ell: max over non-frozen, non-halted v of the sum of
/// neighbors' estimates.
std::vector<double> activity_levels(const Graph& g, const Marking& mk);

/// True iff A~_{tau+1} <= alpha A~_tau for consecutive phase rounds.
bool growth_certificate(const std::vector<double>& a_tilde, double alpha);

template <SparseProgram P>
Marking mark_nodes(const Graph& g, const P& prog, const std::vector<typename P::State>& states,
                   const std::vector<Status>& status, const RandomTape& tape, Round t, int ell) {
  const std::size_t n = g.num_nodes();
  if (ell < 1 || ell > 31) throw ConfigError("phase length must be in [1, 31]");
  Marking mk;
  mk.t = t;
  mk.ell = ell;
  mk.estimate.assign(n * static_cast<std::size_t>(ell), 0.0);
  mk.mask.assign(n, 0);
  mk.frozen.assign(n, 0);
  mk.halted.assign(n, 0);
  const int wb = word_bits(n);
  for (NodeId u = 0; u < n; ++u) {
    if (status[u] == Status::halted) {
      mk.halted[u] = 1;
      mk.frozen[u] = 1;
      continue;
    }
    NodeContext ctx{u, t, g.neighbors(u), n, wb, &tape};
    bool frozen = true;
    for (int j = 0; j < ell; ++j) {
      const Round tau = t + 1 + j;
      const Estimate e = prog.estimate(states[u], ctx, tau);
      if (!(e.p >= 0.0 && e.p <= 1.0)) {
        throw ExecutionError(u, tau, "activation estimate " + std::to_string(e.p) + " outside [0,1]");
      }
      frozen = frozen && e.frozen;
      mk.estimate[static_cast<std::size_t>(u) * ell + j] = e.p;
      if (tape.sample_event(u, prog.coin_round(tau), e.p)) mk.mask[u] |= 1U << j;
    }
    mk.frozen[u] = frozen ? 1 : 0;
  }
  return mk;
}

/// Simulates rounds t+1..t+ell inside the ball and returns the center's state and status.
/// A member at marked distance d is simulated only while its state is still exact
/// (sends through round t+ell-d+1, receives through t+ell-d). Throws ExecutionError if a
/// member sends in a round it was not marked for.
template <SparseProgram P>
std::pair<typename P::State, Status> fast_forward(const Graph& g, const Ball& ball, const P& prog,
                                                  const std::vector<typename P::State>& states,
                                                  const std::vector<Status>& status, const Marking& mk,
                                                  const RandomTape& tape) {
  using State = typename P::State;
  const std::size_t k = ball.members.size();
  const std::size_t n = g.num_nodes();
  const int wb = word_bits(n);
  const int ell = mk.ell;

  // Local adjacency restricted to members.
  std::vector<std::vector<std::uint32_t>> local_adj(k);
  {
    std::vector<std::pair<NodeId, std::uint32_t>> index(k);
    for (std::uint32_t i = 0; i < k; ++i) index[i] = {ball.members[i], i};
    std::sort(index.begin(), index.end());
    auto find = [&](NodeId x) -> std::int64_t {
      auto it = std::lower_bound(index.begin(), index.end(), std::make_pair(x, std::uint32_t{0}));
      return (it != index.end() && it->first == x) ? static_cast<std::int64_t>(it->second) : -1;
    };
    for (const Edge& e : ball.edges) {
      const auto a = static_cast<std::uint32_t>(find(e.first));
      const auto b = static_cast<std::uint32_t>(find(e.second));
      local_adj[a].push_back(b);
      local_adj[b].push_back(a);
    }
    for (auto& l : local_adj) std::sort(l.begin(), l.end(), [&](std::uint32_t x, std::uint32_t y) {
      return ball.members[x] < ball.members[y];
    });
  }

  std::vector<State> st;
  st.reserve(k);
  std::vector<Status> ss(k);
  for (std::size_t i = 0; i < k; ++i) {
    st.push_back(states[ball.members[i]]);
    ss[i] = status[ball.members[i]];
  }
  std::vector<std::optional<Payload>> out(k);
  for (int j = 1; j <= ell; ++j) {
    const Round tau = mk.t + j;
    for (std::size_t i = 0; i < k; ++i) {
      out[i].reset();
      const NodeId u = ball.members[i];
      if (ss[i] == Status::halted || j > ell - ball.dist[i] + 1) continue;
      NodeContext ctx{u, tau, g.neighbors(u), n, wb, &tape};
      out[i] = prog.send(st[i], ctx);
      if (out[i] && !mk.marked_for(u, j - 1)) {
        throw ExecutionError(u, tau, "unsound activation estimate: node sends while unmarked (p~=" +
                                         std::to_string(mk.est(u, j - 1)) + ")");
      }
    }
    const FoldOp op = prog.op(tau);
    for (std::size_t i = 0; i < k; ++i) {
      const NodeId u = ball.members[i];
      if (ss[i] == Status::halted || mk.frozen[u] || j > ell - ball.dist[i]) continue;
      std::optional<Payload> acc;
      for (std::uint32_t x : local_adj[i]) {
        if (out[x]) fold_into(op, acc, *out[x]);
      }
      NodeContext ctx{u, tau, g.neighbors(u), n, wb, &tape};
      ss[i] = prog.receive(st[i], ctx, acc);
    }
  }
  return {std::move(st[0]), ss[0]};
}

enum class OverflowPolicy { shrink, abort };

struct CompressOptions {
  PlanVersion version = PlanVersion::v1;
  std::optional<int> force_ell;
  OverflowPolicy overflow = OverflowPolicy::shrink;
  /// Baseline mode: every round, sparse or not, is one direct aggregation.
  bool direct_only = false;
  /// Planner-chosen phases run uncompressed when gather + commit would take at least as many
  /// MPC rounds as ell direct aggregations. Ignored when force_ell is set.
  bool cost_aware = true;
};

/// Lower bound on the MPC rounds of one compressed phase: the radius-1 gather, ceil(log2 ell)
/// doubling steps and the commit.
inline int min_compressed_phase_rounds(int ell) { return 2 + ceil_log2(static_cast<std::uint64_t>(ell)); }

struct PhaseReport {
  Round start = 0;
  int ell_planned = 1;
  int ell = 1;
  int stage = 0;
  bool case_ii = false;
  bool fallback = false;  // executed as one direct aggregation round
  bool direct = false;    // planner skipped compression (see CompressOptions::cost_aware)
  int overflow_retries = 0;
  std::uint64_t mpc_rounds = 0;
  std::size_t centers = 0;
  std::size_t marked = 0;
  std::size_t max_ball_members = 0;
  std::size_t max_ball_words = 0;
  std::vector<double> a_tilde;
  BallBound bound;
  bool bound_ok = true;
  bool strict_bound_ok = true;
  bool growth_ok = true;
};

template <class S>
struct CompressedRun {
  std::vector<S> states;
  std::vector<Status> status;
  RoundMetrics metrics;
  std::vector<PhaseReport> phases;
  Round congest_rounds = 0;        // rounds of the program schedule covered
  std::uint64_t separable_rounds = 0;
  std::size_t layout_machines = 0;
  std::vector<std::vector<std::uint8_t>> final_states;
};

namespace detail {

struct GatherCost {
  std::uint64_t rounds = 0;
  std::uint64_t ball_words_total = 0;
  std::size_t ball_machines = 0;
};

/// Charges the MPC rounds of the radius-1 push, ball doubling, and commit for one
/// phase whose final balls are `balls`.
GatherCost charge_gather(const Graph& g, const MachineLayout& lay, const Marking& mk,
                         const std::vector<Ball>& balls, const std::vector<std::uint32_t>& state_words,
                         RoundMetrics& metrics, std::uint64_t base_total);

}  // namespace detail

template <SparseProgram P>
CompressedRun<typename P::State> run_compressed(const Graph& g, const P& prog, const MachineConfig& cfg,
                                                const RandomTape& tape, const CompressOptions& opt = {}) {
  using State = typename P::State;
  const std::size_t n = g.num_nodes();
  const int wb = word_bits(n);
  const double nd = static_cast<double>(std::max<std::size_t>(n, 2));
  const double delta = static_cast<double>(std::max<std::size_t>(g.max_degree(), 2));
  const MachineLayout lay = build_layout(g, cfg);
  if (opt.force_ell && *opt.force_ell < 1) throw ConfigError("--force-ell must be >= 1");

  CompressedRun<State> run;
  run.layout_machines = lay.num_machines();
  run.metrics.peak_machines = lay.num_machines();
  run.states.reserve(n);
  run.status.resize(n);
  std::vector<std::uint32_t> sw(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    NodeContext ctx{v, 0, g.neighbors(v), n, wb, &tape};
    Start<State> s = prog.init(ctx);
    run.states.push_back(std::move(s.state));
    run.status[v] = s.status;
  }
  auto refresh_state_words = [&](Round r) {
    std::uint64_t total = 0;
    for (NodeId v = 0; v < n; ++v) {
      NodeContext ctx{v, r, g.neighbors(v), n, wb, &tape};
      sw[v] = static_cast<std::uint32_t>((prog.state_bits(run.states[v], ctx) + wb - 1) / wb);
      total += sw[v];
    }
    return total;
  };
  auto all_halted = [&] {
    return std::all_of(run.status.begin(), run.status.end(), [](Status s) { return s == Status::halted; });
  };

  auto direct_round = [&](Round r, const std::string& label) {
    const std::uint64_t state_total = refresh_state_words(r - 1);
    std::vector<std::optional<Payload>> values(n);
    for (NodeId v = 0; v < n; ++v) {
      if (run.status[v] == Status::halted) continue;
      NodeContext ctx{v, r, g.neighbors(v), n, wb, &tape};
      values[v] = prog.send(run.states[v], ctx);
    }
    const Residency res{lay.max_machine_words(), lay.total_words() + state_total};
    auto folded = aggregate_payloads(lay, g, prog.op(r), values, run.metrics, res, label);
    for (NodeId v = 0; v < n; ++v) {
      if (run.status[v] == Status::halted) continue;
      NodeContext ctx{v, r, g.neighbors(v), n, wb, &tape};
      run.status[v] = prog.receive(run.states[v], ctx, folded[v]);
    }
  };

  const Round R = prog.total_rounds();
  Round r = 1;
  while (r <= R) {
    if (all_halted()) break;
    if (prog.kind(r) == RoundKind::separable) {
      direct_round(r, "separable");
      ++run.separable_rounds;
      ++r;
      continue;
    }
    if (opt.direct_only) {
      direct_round(r, "sparse-direct");
      ++r;
      continue;
    }
    Round seg_end = r;
    while (seg_end + 1 <= R && prog.kind(seg_end + 1) == RoundKind::sparse &&
           prog.stage_of(seg_end + 1) == prog.stage_of(r)) {
      ++seg_end;
    }

    PhaseReport rep;
    rep.start = r - 1;
    rep.stage = prog.stage_of(r);
    int planned;
    if (opt.force_ell) {
      planned = *opt.force_ell;
    } else if (opt.version == PlanVersion::v1) {
      planned = ell_v1(std::max(2.0, prog.alpha()), nd, cfg.epsilon);
    } else {
      const StagePlan sp = ell_v2(std::max(1, rep.stage), std::max(2.0, prog.alpha()), delta, nd, cfg.epsilon);
      planned = sp.ell;
      rep.case_ii = sp.case_ii;
    }
    rep.ell_planned = planned;
    int ell = static_cast<int>(std::min<Round>(planned, seg_end - r + 1));
    const std::uint64_t rounds_before = run.metrics.round_count();

    // A direct round is one aggregation: down the split-node trees, exchange, and back up.
    const int direct_cost = 2 * static_cast<int>(lay.max_depth) + 1;
    if (!opt.force_ell && opt.cost_aware && min_compressed_phase_rounds(ell) >= ell * direct_cost) {
      for (int j = 0; j < ell && !all_halted(); ++j) direct_round(r + j, "sparse-direct");
      rep.ell = ell;
      rep.direct = true;
      rep.mpc_rounds = run.metrics.round_count() - rounds_before;
      run.phases.push_back(std::move(rep));
      r += ell;
      continue;
    }

    while (true) {
      const std::uint64_t state_total = refresh_state_words(r - 1);
      Marking mk = mark_nodes(g, prog, run.states, run.status, tape, r - 1, ell);

      // Frozen nodes are never simulated inside a ball as receivers; check their sends here.
      for (NodeId u = 0; u < n; ++u) {
        if (!mk.frozen[u] || mk.halted[u]) continue;
        for (int j = 0; j < ell; ++j) {
          NodeContext ctx{u, r + j, g.neighbors(u), n, wb, &tape};
          if (prog.send(run.states[u], ctx) && !mk.marked_for(u, j)) {
            throw ExecutionError(u, r + j, "unsound activation estimate: frozen node sends while unmarked");
          }
        }
      }

      std::vector<Ball> balls;
      std::size_t worst_words = 0;
      NodeId worst = kNoNode;
      bool overflow = false;
      for (NodeId v = 0; v < n; ++v) {
        if (mk.frozen[v]) continue;
        Ball b = gather_ball(g, mk, v, ell, sw, cfg.S);
        if (b.words > worst_words) {
          worst_words = b.words;
          worst = v;
        }
        if (b.overflow) {
          overflow = true;
          break;
        }
        balls.push_back(std::move(b));
      }

      if (overflow) {
        const Residency res{lay.max_machine_words(), lay.total_words() + state_total};
        // The failed attempt still paid for the first gather step.
        Traffic none(lay.num_machines());
        charge_step(run.metrics, "wasted", none, cfg.S, res);
        if (opt.overflow == OverflowPolicy::abort) {
          throw CapacityError("phase length too aggressive: ball of center " + std::to_string(worst) +
                              " needs more than " + std::to_string(worst_words) + " words (S=" +
                              std::to_string(cfg.S) + ", ell=" + std::to_string(ell) + ")");
        }
        ++rep.overflow_retries;
        if (ell > 1) {
          --ell;
          continue;
        }
        direct_round(r, "sparse-direct");
        rep.fallback = true;
        rep.ell = 1;
        break;
      }

      rep.ell = ell;
      rep.centers = balls.size();
      for (NodeId u = 0; u < n; ++u) rep.marked += mk.marked(u) ? 1 : 0;
      rep.a_tilde = activity_levels(g, mk);
      rep.bound = ball_bound(rep.a_tilde, nd, ell);
      rep.growth_ok = growth_certificate(rep.a_tilde, prog.alpha());
      for (const Ball& b : balls) {
        rep.max_ball_members = std::max(rep.max_ball_members, b.members.size());
        rep.max_ball_words = std::max(rep.max_ball_words, b.words);
      }
      rep.bound_ok = static_cast<double>(rep.max_ball_members) <= rep.bound.planned * (1 + 1e-12);
      rep.strict_bound_ok = static_cast<double>(rep.max_ball_members) <= rep.bound.strict * (1 + 1e-12);

      const auto cost = detail::charge_gather(g, lay, mk, balls, sw, run.metrics,
                                              lay.total_words() + state_total);
      run.metrics.peak_machines = std::max(run.metrics.peak_machines, lay.num_machines() + cost.ball_machines);

      std::vector<std::pair<State, Status>> next;
      next.reserve(balls.size());
      for (const Ball& b : balls) next.push_back(fast_forward(g, b, prog, run.states, run.status, mk, tape));
      for (std::size_t i = 0; i < balls.size(); ++i) {
        run.states[balls[i].center] = std::move(next[i].first);
        run.status[balls[i].center] = next[i].second;
      }
      break;
    }
    rep.mpc_rounds = run.metrics.round_count() - rounds_before;
    run.phases.push_back(std::move(rep));
    r += run.phases.back().ell;
  }
  run.congest_rounds = R;

  run.final_states.resize(n);
  for (NodeId v = 0; v < n; ++v) prog.encode(run.states[v], run.final_states[v]);
  return run;
}

}  // namespace sagsim
