#include "sagsim/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sagsim {

std::string to_string(MemoryMode m) {
  return m == MemoryMode::unrestricted ? "unrestricted" : "input-linear";
}

MemoryMode parse_memory_mode(const std::string& name) {
  if (name == "unrestricted") return MemoryMode::unrestricted;
  if (name == "input-linear" || name == "input_linear") return MemoryMode::input_linear;
  throw ConfigError("unknown memory mode '" + name + "' (expected unrestricted|input-linear)");
}

MachineConfig MachineConfig::make(std::size_t n, double epsilon, MemoryMode mode) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
  MachineConfig cfg;
  cfg.epsilon = epsilon;
  cfg.memory_mode = mode;
  const double raw = std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), epsilon);
  // Guard against 16.000000001 style rounding before taking the ceiling.
  cfg.S = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  if (cfg.S < 2) {
    throw ConfigError("machine capacity S = ceil(n^eps) = " + std::to_string(cfg.S) +
                      " is below 2 words; increase n or epsilon");
  }
  return cfg;
}

double MachineConfig::total_budget(std::size_t n, std::size_t m) const {
  if (budget_override) return *budget_override;
  const double lg = std::max(1.0, std::log2(static_cast<double>(std::max<std::size_t>(n, 2))));
  const double base = memory_mode == MemoryMode::unrestricted
                          ? static_cast<double>(m) + std::pow(static_cast<double>(n), 1.0 + epsilon)
                          : static_cast<double>(std::max<std::size_t>(m, n));
  return c_mem * base * lg * lg;
}

std::size_t MachineLayout::total_words() const {
  return std::accumulate(machine_words.begin(), machine_words.end(), std::size_t{0});
}

std::size_t MachineLayout::max_machine_words() const {
  return machine_words.empty() ? 0 : *std::max_element(machine_words.begin(), machine_words.end());
}

std::uint32_t MachineLayout::tree_depth(NodeId v) const {
  std::uint32_t d = 0;
  for (std::size_t i = copy_start[v]; i < copy_start[v + 1]; ++i) d = std::max(d, copies[i].depth);
  return d;
}

namespace {

/// Leftmost-fit over a fixed pool of machines via a max segment tree of free space.
class FirstFit {
 public:
  FirstFit(std::size_t pool, std::size_t cap) : size_(1) {
    while (size_ < pool) size_ <<= 1;
    tree_.assign(2 * size_, cap);
  }
  std::size_t place_leftmost(std::size_t w) {
    std::size_t i = 1;
    while (i < size_) i = tree_[2 * i] >= w ? 2 * i : 2 * i + 1;
    const std::size_t leaf = i - size_;
    tree_[i] -= w;
    for (i >>= 1; i >= 1; i >>= 1) tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
    return leaf;
  }

 private:
  std::size_t size_;
  std::vector<std::size_t> tree_;
};

}  // namespace

MachineLayout build_layout(const Graph& g, const MachineConfig& cfg) {
  if (cfg.S < 2) throw ConfigError("machine capacity S must be at least 2 words");
  const std::size_t n = g.num_nodes();
  const std::size_t S = cfg.S;
  MachineLayout lay;
  lay.S = S;
  lay.n = n;
  lay.copy_start.assign(n + 1, 0);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t d = g.degree(v);
    lay.copy_start[v + 1] = lay.copy_start[v] + static_cast<std::uint32_t>(d <= S ? 1 : (d + S - 1) / S);
  }
  lay.copies.resize(lay.copy_start[n]);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t d = g.degree(v);
    const std::size_t k = lay.num_copies(v);
    for (std::size_t i = 0; i < k; ++i) {
      NodeCopy& c = lay.copies[lay.copy_start[v] + i];
      c.first = static_cast<std::uint32_t>(i * S);
      c.count = static_cast<std::uint32_t>(std::min(S, d - std::min(d, i * S)));
      c.depth = i == 0 ? 0 : lay.copies[lay.copy_start[v] + (i - 1) / S].depth + 1;
      lay.max_depth = std::max(lay.max_depth, c.depth);
    }
  }

  lay.landing_copy.resize(2 * g.num_edges());
  for (NodeId u = 0; u < n; ++u) {
    const auto nu = g.neighbors(u);
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const auto nw = g.neighbors(nu[j]);
      const auto pos = static_cast<std::size_t>(std::lower_bound(nw.begin(), nw.end(), u) - nw.begin());
      lay.landing_copy[g.offset(u) + j] = lay.copy_start[nu[j]] + static_cast<std::uint32_t>(pos / S);
    }
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });

  FirstFit ff(std::max<std::size_t>(lay.copies.size(), 1), S);
  std::size_t machines = 0;
  std::vector<std::size_t> words(lay.copies.size(), 0);
  for (NodeId v : order) {
    for (std::size_t i = lay.copy_start[v]; i < lay.copy_start[v + 1]; ++i) {
      const std::size_t w = std::max<std::size_t>(1, lay.copies[i].count);
      const std::size_t m = ff.place_leftmost(w);
      lay.copies[i].machine = static_cast<std::uint32_t>(m);
      words[m] += w;
      machines = std::max(machines, m + 1);
    }
  }
  words.resize(machines);
  lay.machine_words = std::move(words);

  const double budget = cfg.total_budget(n, g.num_edges());
  if (!cfg.budget_override && static_cast<double>(lay.total_words()) > budget) {
    throw ConfigError("graph needs " + std::to_string(lay.total_words()) +
                      " words but the total memory budget is " + std::to_string(budget));
  }
  return lay;
}

std::uint64_t RoundMetrics::max_sent() const {
  std::uint64_t x = 0;
  for (const auto& r : rounds) x = std::max(x, r.max_sent);
  return x;
}
std::uint64_t RoundMetrics::max_recv() const {
  std::uint64_t x = 0;
  for (const auto& r : rounds) x = std::max(x, r.max_recv);
  return x;
}
std::uint64_t RoundMetrics::peak_machine_words() const {
  std::uint64_t x = 0;
  for (const auto& r : rounds) x = std::max(x, r.max_resident);
  return x;
}
std::uint64_t RoundMetrics::peak_total_words() const {
  std::uint64_t x = 0;
  for (const auto& r : rounds) x = std::max(x, r.total_resident);
  return x;
}
void RoundMetrics::append(const RoundMetrics& other) {
  rounds.insert(rounds.end(), other.rounds.begin(), other.rounds.end());
  peak_machines = std::max(peak_machines, other.peak_machines);
}

std::uint64_t charge_step(RoundMetrics& metrics, const std::string& label, const Traffic& t,
                          std::size_t S, const Residency& res) {
  std::uint64_t ms = 0, mr = 0;
  for (auto x : t.sent) ms = std::max(ms, x);
  for (auto x : t.recv) mr = std::max(mr, x);
  const std::uint64_t load = std::max(ms, mr);
  const std::uint64_t rounds = std::max<std::uint64_t>(1, (load + S - 1) / S);
  for (std::uint64_t i = 0; i < rounds; ++i) {
    metrics.rounds.push_back(MpcRound{label, (ms + rounds - 1) / rounds, (mr + rounds - 1) / rounds,
                                      res.max_machine, res.total});
  }
  return rounds;
}

FanoutCharge charge_fanout_step(RoundMetrics& metrics, const std::string& label, const Traffic& t, std::size_t S,
                                std::uint64_t record_words, const Residency& res) {
  std::uint64_t ms = 0, mr = 0;
  for (auto x : t.sent) ms = std::max(ms, x);
  for (auto x : t.recv) mr = std::max(mr, x);
  const std::uint64_t naive = std::max<std::uint64_t>(1, (std::max(ms, mr) + S - 1) / S);
  if (ms <= S || record_words == 0 || record_words > S) return {charge_step(metrics, label, t, S, res), 0};

  const std::uint64_t fan = std::max<std::uint64_t>(2, S / record_words);
  const std::uint64_t spread = (ms + S - 1) / S;  // helpers needed by the busiest sender
  std::uint64_t depth = 0;
  for (std::uint64_t reach = 1; reach < spread; reach *= fan) ++depth;
  const std::uint64_t deliver = std::max<std::uint64_t>(1, (mr + S - 1) / S);
  if (depth + deliver >= naive) return {charge_step(metrics, label, t, S, res), 0};

  FanoutCharge out;
  std::uint64_t extra = 0;
  for (auto x : t.sent) {
    if (x <= S) continue;
    out.helpers += static_cast<std::size_t>((x + S - 1) / S - 1);
    extra += x - S;
  }
  const Residency grown{res.max_machine, res.total + extra};
  for (std::uint64_t i = 0; i < depth; ++i) {
    metrics.rounds.push_back(MpcRound{label + ":replicate", S, S, grown.max_machine, grown.total});
  }
  for (std::uint64_t i = 0; i < deliver; ++i) {
    metrics.rounds.push_back(MpcRound{label, (ms + spread - 1) / spread, (mr + deliver - 1) / deliver,
                                      grown.max_machine, grown.total});
  }
  out.rounds = depth + deliver;
  return out;
}

Word fold_identity(FoldOp op) {
  switch (op) {
    case FoldOp::min:
    case FoldOp::bit_and: return std::numeric_limits<Word>::max();
    default: return 0;
  }
}

std::vector<std::optional<Payload>> aggregate_payloads(const MachineLayout& lay, const Graph& g,
                                                       FoldOp op,
                                                       const std::vector<std::optional<Payload>>& values,
                                                       RoundMetrics& metrics, const Residency& res,
                                                       const std::string& label) {
  const std::size_t n = g.num_nodes();
  if (values.size() != n) throw ConfigError("aggregate: one value slot per node required");
  const std::size_t M = lay.num_machines();
  const std::size_t S = lay.S;
  auto words_of = [&](NodeId v) -> std::uint64_t { return values[v] ? values[v]->size : 0; };

  // Down-broadcast: every copy learns its node's value, one tree level per step.
  for (std::uint32_t level = 1; level <= lay.max_depth; ++level) {
    Traffic t(M);
    for (NodeId v = 0; v < n; ++v) {
      if (!values[v]) continue;
      for (std::size_t i = 1; i < lay.num_copies(v); ++i) {
        const NodeCopy& c = lay.copy(v, i);
        if (c.depth == level) t.add(lay.copy(v, (i - 1) / S).machine, c.machine, words_of(v));
      }
    }
    charge_step(metrics, label + ":down", t, S, res);
  }

  // Exchange across every edge, then fold locally per copy.
  std::vector<std::optional<Payload>> partial(lay.copies.size());
  Traffic t(M);
  for (NodeId u = 0; u < n; ++u) {
    if (!values[u]) continue;
    const std::size_t deg = g.degree(u);
    const std::size_t base = g.offset(u);
    for (std::size_t j = 0; j < deg; ++j) {
      const std::size_t src = lay.copy_start[u] + j / S;
      const std::size_t dst = lay.landing_copy[base + j];
      t.add(lay.copies[src].machine, lay.copies[dst].machine, words_of(u));
      fold_into(op, partial[dst], *values[u]);
    }
  }
  charge_step(metrics, label + ":exchange", t, S, res);

  // Convergecast to the root copies, deepest level first.
  for (std::uint32_t level = lay.max_depth; level >= 1; --level) {
    Traffic up(M);
    for (NodeId v = 0; v < n; ++v) {
      for (std::size_t i = lay.num_copies(v); i-- > 1;) {
        const NodeCopy& c = lay.copy(v, i);
        if (c.depth != level) continue;
        const std::size_t ci = lay.copy_start[v] + i;
        const std::size_t pi = lay.copy_start[v] + (i - 1) / S;
        if (partial[ci]) {
          up.add(c.machine, lay.copies[pi].machine, partial[ci]->size);
          fold_into(op, partial[pi], *partial[ci]);
        }
      }
    }
    charge_step(metrics, label + ":up", up, S, res);
  }

  std::vector<std::optional<Payload>> out(n);
  for (NodeId v = 0; v < n; ++v) out[v] = partial[lay.copy_start[v]];
  return out;
}

std::vector<Word> aggregate_separable(const MachineLayout& layout, const Graph& g, FoldOp op,
                                      const std::vector<Word>& values, RoundMetrics& metrics) {
  std::vector<std::optional<Payload>> in(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) in[i] = Payload::of(values[i]);
  const Residency res{layout.max_machine_words(), layout.total_words()};
  auto folded = aggregate_payloads(layout, g, op, in, metrics, res);
  std::vector<Word> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = folded[i] ? folded[i]->w[0] : fold_identity(op);
  metrics.peak_machines = std::max(metrics.peak_machines, layout.num_machines());
  return out;
}

std::vector<MachineMessage> exchange(std::size_t num_machines, std::size_t S,
                                     std::vector<MachineMessage> messages, RoundMetrics& metrics,
                                     const Residency& res) {
  std::stable_sort(messages.begin(), messages.end(),
                   [](const MachineMessage& a, const MachineMessage& b) { return a.from < b.from; });
  std::vector<Traffic> rounds;
  for (const MachineMessage& m : messages) {
    if (m.from >= num_machines || m.to >= num_machines) {
      throw ConfigError("exchange: machine id out of range");
    }
    const std::size_t len = m.words.size();
    if (len > S) {
      throw CapacityError("undeliverable message of " + std::to_string(len) + " words from machine " +
                          std::to_string(m.from) + " exceeds S=" + std::to_string(S));
    }
    std::size_t r = 0;
    while (r < rounds.size() && (rounds[r].sent[m.from] + len > S || rounds[r].recv[m.to] + len > S)) ++r;
    if (r == rounds.size()) rounds.emplace_back(num_machines);
    rounds[r].add(m.from, m.to, len);
  }
  if (rounds.empty()) rounds.emplace_back(num_machines);
  for (const Traffic& t : rounds) charge_step(metrics, "exchange", t, S, res);
  metrics.peak_machines = std::max(metrics.peak_machines, num_machines);
  return messages;
}

AuditReport audit(const RoundMetrics& metrics, const MachineConfig& cfg, std::size_t n, std::size_t m) {
  AuditReport rep;
  rep.budget_words = cfg.total_budget(n, m);
  rep.peak_total_words = metrics.peak_total_words();
  for (std::size_t i = 0; i < metrics.rounds.size(); ++i) {
    const MpcRound& r = metrics.rounds[i];
    std::string why;
    if (r.max_sent > cfg.S) why = "machine sent " + std::to_string(r.max_sent) + " words";
    else if (r.max_recv > cfg.S) why = "machine received " + std::to_string(r.max_recv) + " words";
    else if (r.max_resident > cfg.S) why = "machine holds " + std::to_string(r.max_resident) + " words";
    else if (static_cast<double>(r.total_resident) > rep.budget_words)
      why = "total memory " + std::to_string(r.total_resident) + " words exceeds budget";
    if (!why.empty()) {
      rep.pass = false;
      rep.first_bad_round = static_cast<std::int64_t>(i + 1);
      rep.reason = why + " in round " + std::to_string(i + 1) + " (" + r.label + ")";
      break;
    }
  }
  const double limit = cfg.machine_count_factor *
                       std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), 1.0 - cfg.epsilon);
  rep.machine_count_warning = static_cast<double>(metrics.peak_machines) > limit;
  return rep;
}

}  // namespace sagsim
