#include "sagsim/congest.hpp"

#include <algorithm>

namespace sagsim {

std::string to_string(Status s) {
  switch (s) {
    case Status::active: return "active";
    case Status::send_only: return "send_only";
    case Status::halted: return "halted";
  }
  return "?";
}

namespace {

struct Hasher {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  void add(std::uint64_t x) { h = splitmix64(h ^ x); }
};

}  // namespace

std::uint64_t ExecutionTrace::digest() const {
  Hasher d;
  d.add(initial_status.size());
  for (Status s : initial_status) d.add(static_cast<std::uint64_t>(s));
  for (auto b : initial_state_bits) d.add(b);
  for (const RoundRecord& r : rounds) {
    d.add(static_cast<std::uint64_t>(r.round));
    for (Status s : r.status) d.add(static_cast<std::uint64_t>(s));
    for (auto b : r.state_bits) d.add(b);
    d.add(r.messages);
    d.add(r.max_message_words);
  }
  for (const auto& st : final_states) {
    d.add(st.size());
    for (auto byte : st) d.add(byte);
  }
  return d.h;
}

std::uint64_t congestion_budget(std::size_t degree, std::size_t n, int kappa) {
  const auto kw = static_cast<std::uint64_t>(kappa) * static_cast<std::uint64_t>(word_bits(n));
  return static_cast<std::uint64_t>(degree) * kw + kw;
}

CongestionReport check_state_congested(const ExecutionTrace& trace, const Graph& g, int kappa) {
  CongestionReport rep;
  const std::size_t n = g.num_nodes();
  auto scan = [&](const std::vector<std::uint32_t>& bits, Round round) {
    for (NodeId v = 0; v < std::min(n, bits.size()); ++v) {
      const std::uint64_t budget = congestion_budget(g.degree(v), n, kappa);
      const double ratio = static_cast<double>(bits[v]) / static_cast<double>(budget);
      if (ratio > rep.worst_ratio || rep.worst_node == kNoNode) {
        rep.worst_ratio = ratio;
        rep.worst_node = v;
        rep.worst_round = round;
        rep.worst_bits = bits[v];
        rep.worst_budget = budget;
      }
      if (bits[v] > budget) rep.pass = false;
    }
  };
  scan(trace.initial_state_bits, 0);
  for (const RoundRecord& r : trace.rounds) scan(r.state_bits, r.round);
  return rep;
}

namespace detail {

void check_order(const std::vector<NodeId>& order, std::size_t n) {
  if (order.size() != n) throw ConfigError("processing order must list every node exactly once");
  std::vector<bool> seen(n, false);
  for (NodeId v : order) {
    if (v >= n || seen[v]) throw ConfigError("processing order must be a permutation of 0..n-1");
    seen[v] = true;
  }
}

}  // namespace detail
}  // namespace sagsim
