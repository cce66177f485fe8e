#include "sagsim/compression.hpp"

#include <cmath>

namespace sagsim {

namespace {

// Absorbs representation error in expressions such as sqrt(0.8/8 * 40) before flooring.
constexpr double kFloorSlack = 1e-9;

int floor_sqrt_clamped(double x) {
  if (!(x > 0.0)) return 1;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(x) + kFloorSlack)));
}

}  // namespace

int ell_v1(double alpha, double n, double eps) {
  if (alpha < 2.0) throw ConfigError("sparsity alpha must be >= 2");
  const double log_alpha_n = std::log2(std::max(n, 2.0)) / std::log2(alpha);
  return floor_sqrt_clamped(eps / 8.0 * log_alpha_n);
}

StagePlan ell_v2(int stage, double alpha, double delta, double n, double eps) {
  if (alpha < 2.0) throw ConfigError("sparsity alpha must be >= 2");
  if (stage < 1) throw ConfigError("stage index must be >= 1");
  const double lg_n = std::log2(std::max(n, 2.0));
  const double lg_delta = std::log2(std::max(delta, 1.0));
  StagePlan sp;
  if (lg_delta / std::ldexp(1.0, stage) >= eps / 2.0 * lg_n) {
    sp.ell = ell_v1(alpha, n, eps);
    return sp;
  }
  sp.case_ii = true;
  sp.alpha_prime = alpha * lg_n * lg_n;
  const double log_ap = lg_delta / std::ldexp(1.0, stage + 1) / std::log2(sp.alpha_prime);
  sp.ell = floor_sqrt_clamped(log_ap / 2.0);
  return sp;
}

std::vector<PhasePlan> plan_phases_v1(Round total_rounds, double alpha, double n, double eps) {
  if (total_rounds < 1) throw ConfigError("total rounds must be >= 1");
  const int ell = ell_v1(alpha, n, eps);
  std::vector<PhasePlan> plans;
  for (Round t = 0; t < total_rounds; t += ell) {
    PhasePlan p;
    p.start = t;
    p.ell = static_cast<int>(std::min<Round>(ell, total_rounds - t));
    p.alpha = alpha;
    plans.push_back(p);
  }
  return plans;
}

std::vector<PhasePlan> plan_phases_v2(const std::vector<Round>& stage_lengths, double alpha, double delta,
                                      double n, double eps) {
  for (std::size_t i = 1; i < stage_lengths.size(); ++i) {
    if (2 * stage_lengths[i] > stage_lengths[i - 1]) {
      throw ConfigError("stage " + std::to_string(i + 1) + " has " + std::to_string(stage_lengths[i]) +
                        " rounds, more than half of stage " + std::to_string(i) + " (" +
                        std::to_string(stage_lengths[i - 1]) + ")");
    }
  }
  std::vector<PhasePlan> plans;
  Round t = 0;
  for (std::size_t i = 0; i < stage_lengths.size(); ++i) {
    const int stage = static_cast<int>(i) + 1;
    const StagePlan sp = ell_v2(stage, alpha, delta, n, eps);
    const Round end = t + stage_lengths[i];
    for (; t < end; t += sp.ell) {
      PhasePlan p;
      p.start = t;
      p.ell = static_cast<int>(std::min<Round>(sp.ell, end - t));
      p.alpha = alpha;
      p.alpha_prime = sp.alpha_prime;
      p.stage = stage;
      p.case_ii = sp.case_ii;
      p.version = PlanVersion::v2;
      plans.push_back(p);
    }
  }
  return plans;
}

Ball gather_ball(const Graph& g, const Marking& mk, NodeId center, int ell,
                 const std::vector<std::uint32_t>& state_words, std::size_t cap_words) {
  thread_local std::vector<std::int32_t> seen;  // dist + 1 for visited nodes, 0 otherwise
  if (seen.size() < g.num_nodes()) seen.assign(g.num_nodes(), 0);
  auto sw = [&](NodeId u) -> std::size_t { return state_words.empty() ? 0 : state_words[u]; };

  Ball b;
  b.center = center;
  b.radius = ell;
  b.members.push_back(center);
  b.dist.push_back(0);
  seen[center] = 1;
  b.words = member_words(sw(center), ell);

  auto finish = [&] {
    for (NodeId u : b.members) seen[u] = 0;
  };

  for (std::size_t idx = 0; idx < b.members.size(); ++idx) {
    const NodeId x = b.members[idx];
    const int d = b.dist[idx];
    if (d >= ell || (idx > 0 && mk.frozen[x])) continue;
    for (NodeId y : g.neighbors(x)) {
      if (seen[y] || !mk.marked(y)) continue;
      seen[y] = d + 2;
      b.members.push_back(y);
      b.dist.push_back(d + 1);
      b.words += member_words(sw(y), ell);
      if (b.words > cap_words) {
        b.overflow = true;
        finish();
        return b;
      }
    }
  }

  b.words_within.assign(static_cast<std::size_t>(ell) + 1, 0);
  for (std::size_t i = 0; i < b.members.size(); ++i) {
    b.words_within[b.dist[i]] += member_words(sw(b.members[i]), ell);
  }
  for (std::size_t i = 0; i < b.members.size(); ++i) {
    const NodeId u = b.members[i];
    for (NodeId y : g.neighbors(u)) {
      if (y > u && seen[y]) {
        b.edges.emplace_back(u, y);
        b.words += 2;
        b.words_within[std::max(b.dist[i], seen[y] - 1)] += 2;
      }
    }
  }
  for (std::size_t r = 1; r < b.words_within.size(); ++r) b.words_within[r] += b.words_within[r - 1];
  finish();
  std::sort(b.edges.begin(), b.edges.end());
  if (b.words > cap_words) b.overflow = true;
  return b;
}

BallBound ball_bound(const std::vector<double>& a_tilde, double n, int ell) {
  BallBound bb;
  double sum = 0.0;
  for (double a : a_tilde) sum += a;
  bb.k = sum * std::log2(std::max(n, 2.0));
  bb.strict = std::pow(bb.k, ell);
  double term = 1.0;
  for (int j = 0; j <= ell; ++j) {
    bb.planned += term;
    term *= bb.k;
  }
  return bb;
}

std::vector<double> activity_levels(const Graph& g, const Marking& mk) {
  std::vector<double> a(static_cast<std::size_t>(mk.ell), 0.0);
  std::vector<double> acc(static_cast<std::size_t>(mk.ell));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (mk.frozen[v] || mk.halted[v]) continue;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (NodeId u : g.neighbors(v)) {
      if (mk.halted[u]) continue;
      for (int j = 0; j < mk.ell; ++j) acc[j] += mk.est(u, j);
    }
    for (int j = 0; j < mk.ell; ++j) a[j] = std::max(a[j], acc[j]);
  }
  return a;
}

bool growth_certificate(const std::vector<double>& a_tilde, double alpha) {
  for (std::size_t j = 1; j < a_tilde.size(); ++j) {
    if (a_tilde[j] > alpha * a_tilde[j - 1] * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

namespace detail {

GatherCost charge_gather(const Graph& g, const MachineLayout& lay, const Marking& mk,
                         const std::vector<Ball>& balls, const std::vector<std::uint32_t>& state_words,
                         RoundMetrics& metrics, std::uint64_t base_total) {
  GatherCost cost;
  const std::size_t n = g.num_nodes();
  const std::size_t M = lay.num_machines();
  const std::size_t S = lay.S;
  const int ell = mk.ell;
  const std::uint64_t before = metrics.round_count();

  std::uint64_t ball_total = 0, ball_max = 0;
  for (const Ball& b : balls) {
    ball_total += b.words;
    ball_max = std::max<std::uint64_t>(ball_max, b.words);
  }
  cost.ball_words_total = ball_total;
  cost.ball_machines = balls.size();
  const Residency ball_res{std::max<std::uint64_t>(lay.max_machine_words(), ball_max), base_total + ball_total};

  std::vector<std::int64_t> ball_of(n, -1);
  for (std::size_t i = 0; i < balls.size(); ++i) ball_of[balls[i].center] = static_cast<std::int64_t>(i);
  auto words_at = [&](NodeId u, int r) -> std::uint64_t {
    const std::int64_t bi = ball_of[u];
    if (bi < 0) return member_words(state_words[u], ell);
    const Ball& b = balls[static_cast<std::size_t>(bi)];
    return b.words_within[static_cast<std::size_t>(std::min(r, b.radius))];
  };
  auto ball_machine = [&](std::size_t i) { return static_cast<std::uint32_t>(M + i); };
  auto source_machine = [&](NodeId u) {
    const std::int64_t bi = ball_of[u];
    return bi < 0 ? lay.host(u) : ball_machine(static_cast<std::size_t>(bi));
  };

  // Radius-1 balls: the center's record plus a push from every marked neighbor. Marks are
  // learned from these pushes, so no separate announcement is needed.
  std::size_t helpers = 0;
  {
    Traffic t(M + balls.size());
    std::uint64_t rec = 0;
    for (std::size_t i = 0; i < balls.size(); ++i) {
      const Ball& b = balls[i];
      for (std::size_t k = 0; k < b.members.size(); ++k) {
        if (b.dist[k] > 1) continue;
        const std::uint64_t w = member_words(state_words[b.members[k]], ell);
        t.add(lay.host(b.members[k]), ball_machine(i), w);
        rec = std::max(rec, w);
      }
    }
    helpers = std::max(helpers, charge_fanout_step(metrics, "gather", t, S, rec, ball_res).helpers);
  }
  // Doubling: S(v, a + c) is the union of S(u, c) over u in S(v, a). Members at distance
  // <= a - c add nothing beyond S(v, a) and stay silent.
  for (int a = 1; a < ell;) {
    const int c = std::min(a, ell - a);
    Traffic t(M + balls.size());
    std::uint64_t rec = 0;
    for (std::size_t i = 0; i < balls.size(); ++i) {
      const Ball& b = balls[i];
      for (std::size_t k = 1; k < b.members.size(); ++k) {
        if (b.dist[k] > a || b.dist[k] <= a - c) continue;
        const std::uint64_t w = words_at(b.members[k], c);
        t.add(source_machine(b.members[k]), ball_machine(i), w);
        rec = std::max(rec, w);
      }
    }
    helpers = std::max(helpers, charge_fanout_step(metrics, "double", t, S, rec, ball_res).helpers);
    a += c;
  }
  // Commit the centers' new states to their home machines.
  {
    Traffic t(M + balls.size());
    for (std::size_t i = 0; i < balls.size(); ++i) {
      t.add(ball_machine(i), lay.host(balls[i].center), std::max<std::uint32_t>(1, state_words[balls[i].center]));
    }
    charge_step(metrics, "commit", t, S, ball_res);
  }
  cost.ball_machines += helpers;
  cost.rounds = metrics.round_count() - before;
  return cost;
}

}  // namespace detail
}  // namespace sagsim
