#include "sagsim/algorithms/shatter.hpp"

#include <algorithm>
#include <cmath>

namespace sagsim {

namespace {

constexpr int kFixedShift = 40;  // p is summed as a 2^-40 fixed-point value
constexpr int kMaxK = 120;

Word fixed_p(int k) { return k > kFixedShift ? 0 : Word{1} << (kFixedShift - k); }

}  // namespace

int default_shatter_iterations(std::size_t max_degree) {
  return static_cast<int>(std::ceil(4.0 * std::log2(static_cast<double>(max_degree) + 2.0)));
}

int default_shatter_phase_iterations(double delta, std::size_t n) {
  const double lg = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  return std::max(1, static_cast<int>(std::floor(std::sqrt(delta * lg) / 10.0)));
}

ShatterProgram::ShatterProgram(const Graph& g, const ShatterParams& p) : g_(&g) {
  if (!(p.delta > 0.0)) throw ConfigError("shatter requires delta > 0");
  const std::size_t n = g.num_nodes();
  const int T = p.iterations > 0 ? p.iterations : default_shatter_iterations(g.max_degree());
  const int L = p.phase_iterations > 0 ? p.phase_iterations : default_shatter_phase_iterations(p.delta, n);
  const double lg_n = std::log2(static_cast<double>(std::max<std::size_t>(p.n_for_log ? p.n_for_log : n, 2)));
  super_heavy_ = std::exp2(std::sqrt(lg_n) / 5.0);

  struct StageSpec {
    int iterations;
    double threshold;
  };
  std::vector<StageSpec> stages;
  const double delta = static_cast<double>(std::max<std::size_t>(g.max_degree(), 1));
  if (!p.degree_ordered || delta <= 2.0) {
    stages.push_back({T, -1.0});
  } else {
    // Buckets (Delta^(1/2^s), Delta^(1/2^(s-1))]; stage lengths halve and the last stage
    // admits everyone.
    const int K = std::max(1, static_cast<int>(std::ceil(std::log2(std::log2(delta)))));
    const int base = std::max(T, 1 << (K + 1));
    for (int s = 1; s <= K; ++s) {
      const double thr = s < K ? std::pow(delta, std::ldexp(1.0, -s)) : -1.0;
      stages.push_back({std::max(1, base >> (s - 1)), thr});
    }
  }

  info_.push_back(RoundInfo{});
  for (std::size_t s = 0; s < stages.size(); ++s) {
    for (int done = 0; done < stages[s].iterations;) {
      Phase ph;
      ph.first_round = static_cast<Round>(info_.size());
      ph.iterations = std::min(L, stages[s].iterations - done);
      ph.stage = static_cast<int>(s) + 1;
      ph.threshold = stages[s].threshold;
      const int idx = static_cast<int>(phases_.size());
      info_.push_back(RoundInfo{RoundType::pre, idx, 0});
      for (int j = 0; j < ph.iterations; ++j) {
        info_.push_back(RoundInfo{RoundType::beep, idx, j});
        info_.push_back(RoundInfo{RoundType::announce, idx, j});
      }
      phases_.push_back(ph);
      done += ph.iterations;
      total_iterations_ += ph.iterations;
    }
  }
}

std::vector<Round> ShatterProgram::stage_lengths() const {
  std::vector<Round> out;
  for (const Phase& ph : phases_) {
    if (static_cast<int>(out.size()) < ph.stage) out.push_back(0);
    out[static_cast<std::size_t>(ph.stage) - 1] += 2 * ph.iterations;
  }
  return out;
}

bool ShatterProgram::participates(NodeId v, int phase) const {
  const double thr = phases_[static_cast<std::size_t>(phase)].threshold;
  return thr < 0.0 || static_cast<double>(g_->degree(v)) > thr;
}

Start<ShatterProgram::State> ShatterProgram::init(const NodeContext& ctx) const {
  State s;
  s.id = ctx.id;
  s.mode = participates(ctx.id, 0) ? Mode::live : Mode::idle;
  return {s, Status::active};
}

std::optional<Payload> ShatterProgram::send(const State& s, const NodeContext& ctx) const {
  const RoundInfo& ri = info(ctx.round);
  switch (ri.type) {
    case RoundType::pre: {
      const int prev = ri.phase > 0 ? phases_[static_cast<std::size_t>(ri.phase) - 1].iterations : 0;
      switch (s.mode) {
        case Mode::live: return Payload::of(0, fixed_p(s.k));
        case Mode::super_heavy: return Payload::of(0, fixed_p(s.k + prev));
        case Mode::joined_pending: return Payload::of(1, 0);
        default: return std::nullopt;
      }
    }
    case RoundType::beep: {
      const double coin = ctx.coin(coin_round(ctx.round));
      if (s.mode == Mode::live && coin_fires(coin, std::ldexp(1.0, -s.k))) return Payload::of(1);
      if (s.mode == Mode::super_heavy && coin_fires(coin, std::ldexp(1.0, -(s.k + ri.iter)))) return Payload::of(1);
      return std::nullopt;
    }
    case RoundType::announce:
      if (s.mode == Mode::joining) return Payload::of(1);
      return std::nullopt;
  }
  return std::nullopt;
}

Status ShatterProgram::receive(State& s, const NodeContext& ctx, const std::optional<Payload>& folded) const {
  const RoundInfo& ri = info(ctx.round);
  switch (ri.type) {
    case RoundType::pre: {
      if (s.mode == Mode::joined_pending) {
        s.mode = Mode::in_i;
        return Status::halted;
      }
      if (s.mode == Mode::super_heavy) {
        const int prev = ri.phase > 0 ? phases_[static_cast<std::size_t>(ri.phase) - 1].iterations : 0;
        s.k = static_cast<std::uint8_t>(std::min(kMaxK, s.k + prev));
        s.mode = Mode::live;
      }
      if (folded && folded->w[0] >= 1) {
        s.mode = Mode::removed;
        return Status::halted;
      }
      if (s.mode == Mode::idle && participates(s.id, ri.phase)) s.mode = Mode::live;
      if (s.mode == Mode::live) {
        const double d = folded ? std::ldexp(static_cast<double>(folded->w[1]), -kFixedShift) : 0.0;
        if (d >= super_heavy_) s.mode = Mode::super_heavy;
      }
      return Status::active;
    }
    case RoundType::beep: {
      if (s.mode != Mode::live) return Status::send_only;
      const bool beeped = coin_fires(ctx.coin(coin_round(ctx.round)), std::ldexp(1.0, -s.k));
      if (beeped && !folded) {
        s.mode = Mode::joining;
      } else if (folded) {
        s.k = static_cast<std::uint8_t>(std::min(kMaxK, s.k + 1));
      } else {
        s.k = static_cast<std::uint8_t>(std::max(1, s.k - 1));
      }
      return Status::active;
    }
    case RoundType::announce:
      if (s.mode == Mode::joining) {
        s.mode = Mode::joined_pending;
        return Status::active;
      }
      if (s.mode == Mode::live && folded) {
        s.mode = Mode::removed;
        return Status::halted;
      }
      return s.mode == Mode::live ? Status::active : Status::send_only;
  }
  return Status::active;
}

Estimate ShatterProgram::estimate(const State& s, const NodeContext& ctx, Round tau) const {
  const Round t = ctx.round;
  const RoundInfo& ri = info(tau);
  switch (s.mode) {
    case Mode::live: {
      if (ri.type == RoundType::pre) return {0.0, false};
      // Beep rounds strictly after the next one, up to tau's beep round.
      const Round beep = ri.type == RoundType::beep ? tau : tau - 1;
      if (beep <= t) return {0.0, false};  // announce of an iteration whose beep has passed
      Round first_beep = t + 1;
      if (info(first_beep).type != RoundType::beep) ++first_beep;
      const auto doublings = static_cast<int>((beep - first_beep) / 2);
      return {std::min(0.5, std::ldexp(1.0, doublings - s.k)), false};
    }
    case Mode::super_heavy:
      if (ri.type != RoundType::beep) return {0.0, true};
      return {std::ldexp(1.0, -(s.k + ri.iter)), true};
    case Mode::joining:
      return {ri.type == RoundType::announce && tau == t + 1 ? 1.0 : 0.0, false};
    default:
      return {0.0, true};
  }
}

std::size_t ShatterProgram::state_bits(const State&, const NodeContext& ctx) const {
  return static_cast<std::size_t>(ctx.word_bits) + 7 + 3;  // id, k < 128, mode
}

void ShatterProgram::encode(const State& s, std::vector<std::uint8_t>& out) const {
  put_u64(out, s.id);
  put_u8(out, s.k);
  put_u8(out, static_cast<std::uint8_t>(s.mode));
}

ShatterOutput shatter_output(const Graph& g, const std::vector<ShatterProgram::State>& states) {
  ShatterOutput out;
  std::vector<bool> covered(g.num_nodes(), false);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!ShatterProgram::in_independent_set(states[v])) continue;
    out.independent.push_back(v);
    covered[v] = true;
    for (NodeId u : g.neighbors(v)) covered[u] = true;
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!covered[v]) out.residual.push_back(v);
  }
  return out;
}

}  // namespace sagsim
