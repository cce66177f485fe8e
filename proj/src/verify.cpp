#include "sagsim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace sagsim {

namespace {

std::vector<bool> membership(const Graph& g, std::span<const NodeId> s) {
  std::vector<bool> in(g.num_nodes(), false);
  for (NodeId v : s) {
    if (v >= g.num_nodes()) throw ConfigError("node " + std::to_string(v) + " is not in the graph");
    in[v] = true;
  }
  return in;
}

}  // namespace

double sparsify_degree_bound(double f, double c, double n) { return 2.0 * c * f * std::log(n); }

Verdict verify_independent(const Graph& g, std::span<const NodeId> s) {
  Verdict v;
  v.check = "independent";
  const auto in = membership(g, s);
  for (NodeId a = 0; a < g.num_nodes(); ++a) {
    if (!in[a]) continue;
    for (NodeId b : g.neighbors(a)) {
      if (b > a && in[b]) {
        v.pass = false;
        v.witness = {a, b};
        v.detail = "edge (" + std::to_string(a) + "," + std::to_string(b) + ") inside the set";
        return v;
      }
    }
  }
  return v;
}

Verdict verify_domination(const Graph& g, std::span<const NodeId> s, int beta) {
  if (beta < 1) throw ConfigError("domination radius beta must be >= 1");
  Verdict v;
  v.check = "dominated";
  v.bound = beta;
  const std::size_t n = g.num_nodes();
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(n, kInf);
  std::deque<NodeId> q;
  for (NodeId x : s) {
    if (x >= n) throw ConfigError("node " + std::to_string(x) + " is not in the graph");
    if (dist[x] != 0) {
      dist[x] = 0;
      q.push_back(x);
    }
  }
  // Full BFS so the witness can be the farthest unreached node.
  while (!q.empty()) {
    const NodeId x = q.front();
    q.pop_front();
    for (NodeId y : g.neighbors(x)) {
      if (dist[y] == kInf) {
        dist[y] = dist[x] + 1;
        q.push_back(y);
      }
    }
  }
  NodeId worst = kNoNode;
  for (NodeId x = 0; x < n; ++x) {
    if (dist[x] > beta && (worst == kNoNode || dist[x] > dist[worst])) worst = x;
  }
  int measured = 0;
  for (int d : dist) measured = std::max(measured, d);
  v.measured = measured == kInf ? std::numeric_limits<double>::infinity() : measured;
  if (worst != kNoNode) {
    v.pass = false;
    v.witness = {worst};
    v.detail = "node " + std::to_string(worst) + " is " +
               (dist[worst] == kInf ? std::string("unreachable") : std::to_string(dist[worst]) + " hops") +
               " from the set";
  }
  return v;
}

Verdict verify_degree_bound(const Graph& g, std::span<const NodeId> u, double f, double c, double n) {
  Verdict v;
  v.check = "degree_bound";
  v.bound = sparsify_degree_bound(f, c, n);
  const auto in = membership(g, u);
  NodeId arg = kNoNode;
  std::size_t best = 0;
  for (NodeId x : u) {
    std::size_t d = 0;
    for (NodeId y : g.neighbors(x)) d += in[y] ? 1 : 0;
    if (arg == kNoNode || d > best) {
      best = d;
      arg = x;
    }
  }
  v.measured = static_cast<double>(best);
  if (v.measured > v.bound) {
    v.pass = false;
    v.witness = {arg};
    v.detail = "node " + std::to_string(arg) + " has " + std::to_string(best) + " neighbors in the set";
  }
  return v;
}

Verdict verify_maximal_independent(const Graph& g, std::span<const NodeId> s) {
  Verdict v = verify_independent(g, s);
  v.check = "maximal_independent";
  if (!v.pass) return v;
  Verdict d = verify_domination(g, s, 1);
  if (!d.pass) {
    v.pass = false;
    v.witness = d.witness;
    v.detail = "node " + std::to_string(d.witness[0]) + " could be added";
  }
  return v;
}

ComponentReport component_report(const Graph& g, std::span<const NodeId> s) {
  ComponentReport rep;
  const auto in = membership(g, s);
  std::vector<bool> seen(g.num_nodes(), false);
  std::vector<NodeId> stack;
  for (NodeId root = 0; root < g.num_nodes(); ++root) {
    if (!in[root] || seen[root]) continue;
    std::size_t size = 0;
    seen[root] = true;
    stack.push_back(root);
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId y : g.neighbors(x)) {
        if (in[y] && !seen[y]) {
          seen[y] = true;
          stack.push_back(y);
        }
      }
    }
    rep.sizes.push_back(size);
    rep.set_size += size;
  }
  std::sort(rep.sizes.begin(), rep.sizes.end());
  return rep;
}

}  // namespace sagsim
