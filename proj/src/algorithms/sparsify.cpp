#include "sagsim/algorithms/sparsify.hpp"

#include <algorithm>
#include <cmath>

namespace sagsim {

double sparsify_probability(int iteration, double f, double c, double ln_n, double delta) {
  const double q = std::pow(f, iteration) * c * ln_n / std::max(delta, 1.0);
  return std::clamp(q, 0.0, 1.0);
}

int sparsify_iterations(double f, double delta) {
  if (f <= 1.0) throw ConfigError("sparsification factor f must exceed 1");
  int k = 1;
  double fk = f;
  while (fk < delta * (1.0 - 1e-12)) {
    fk *= f;
    ++k;
  }
  return k;
}

SparsifyProgram::SparsifyProgram(const Graph& g, const SparsifyParams& p)
    : f_(p.f),
      c_(p.c),
      delta_(static_cast<double>(g.max_degree())),
      ln_n_(std::log(static_cast<double>(std::max<std::size_t>(p.n_for_log ? p.n_for_log : g.num_nodes(), 2)))) {
  if (!(f_ > 3.0)) throw ConfigError("sparsify requires f > 3");
  if (!(c_ > 0.0)) throw ConfigError("sparsify requires c > 0");
  iterations_ = sparsify_iterations(f_, std::max(delta_, 1.0));
  q_.assign(static_cast<std::size_t>(iterations_) + 1, 0.0);
  stage_.assign(static_cast<std::size_t>(iterations_) + 1, 1);
  int last_stage = 1;
  for (int i = 1; i <= iterations_; ++i) {
    q_[i] = sparsify_probability(i, f_, c_, ln_n_, delta_);
    const double thr = heavy_threshold(i);
    int s = 1;
    // Smallest s whose degree bucket floor Delta^(1/2^s) lies below this iteration's threshold.
    while (s < 64 && !(std::pow(std::max(delta_, 1.0), std::ldexp(1.0, -s)) < thr)) ++s;
    stage_[i] = thr > 1.0 ? std::max(s, last_stage) : 0;
    if (stage_[i] > 0) last_stage = stage_[i];
  }
  for (int i = 1; i <= iterations_; ++i) {
    if (stage_[i] == 0) stage_[i] = last_stage + 1;
  }
}

double SparsifyProgram::heavy_threshold(int iteration) const {
  if (iteration >= iterations_) return 0.0;
  return delta_ / std::pow(f_, iteration);
}

int SparsifyProgram::stage_of(Round r) const {
  return stage_[static_cast<std::size_t>(std::clamp(iteration_of(r), 1, iterations_))];
}

double SparsifyProgram::stage_threshold(Round r) const {
  const int i = std::clamp(iteration_of(r), 1, iterations_);
  const double thr = heavy_threshold(i);
  if (thr <= 1.0) return -1.0;
  return std::pow(std::max(delta_, 1.0), std::ldexp(1.0, -stage_[static_cast<std::size_t>(i)]));
}

Start<SparsifyProgram::State> SparsifyProgram::init(const NodeContext& ctx) const {
  State s;
  s.id = ctx.id;
  return {s, Status::active};
}

std::optional<Payload> SparsifyProgram::send(const State& s, const NodeContext& ctx) const {
  const Round r = ctx.round;
  const int i = iteration_of(r);
  switch (r % 3) {
    case 1: return Payload::of(1);
    case 2:
      if (s.heavy) return Payload::of(1);
      return std::nullopt;
    default:
      if (s.eligible && coin_fires(ctx.coin(coin_round(r)), q_[static_cast<std::size_t>(i)])) return Payload::of(1);
      return std::nullopt;
  }
}

Status SparsifyProgram::receive(State& s, const NodeContext& ctx, const std::optional<Payload>& folded) const {
  const Round r = ctx.round;
  const int i = iteration_of(r);
  switch (r % 3) {
    case 1:
      s.active_degree = folded ? static_cast<std::uint32_t>(folded->w[0]) : 0;
      if (i == 1 && ctx.degree() == 0) {
        s.in_u = true;
        return Status::halted;
      }
      s.heavy = static_cast<double>(s.active_degree) >= heavy_threshold(i);
      return Status::active;
    case 2:
      s.eligible = s.heavy || folded.has_value();
      return Status::active;
    default: {
      const bool joins = s.eligible && coin_fires(ctx.coin(coin_round(r)), q_[static_cast<std::size_t>(i)]);
      s.heavy = false;
      s.eligible = false;
      if (joins) {
        s.in_u = true;
        return Status::halted;
      }
      if (folded) {
        s.deactivated = true;
        return Status::halted;
      }
      return Status::active;
    }
  }
}

Estimate SparsifyProgram::estimate(const State& s, const NodeContext& ctx, Round tau) const {
  if (s.in_u || s.deactivated || kind(tau) != RoundKind::sparse) return {0.0, false};
  if (tau == ctx.round + 1) return {s.eligible ? q_[static_cast<std::size_t>(iteration_of(tau))] : 0.0, false};
  return {q_[static_cast<std::size_t>(std::clamp(iteration_of(tau), 1, iterations_))], false};
}

std::size_t SparsifyProgram::state_bits(const State&, const NodeContext& ctx) const {
  // id, active degree (< n), four flags.
  return 2 * static_cast<std::size_t>(ctx.word_bits) + 4;
}

void SparsifyProgram::encode(const State& s, std::vector<std::uint8_t>& out) const {
  put_u64(out, s.id);
  put_u64(out, s.active_degree);
  put_u8(out, static_cast<std::uint8_t>((s.in_u ? 1 : 0) | (s.heavy ? 2 : 0) | (s.eligible ? 4 : 0) |
                                        (s.deactivated ? 8 : 0)));
}

}  // namespace sagsim
