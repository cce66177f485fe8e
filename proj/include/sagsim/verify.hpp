#pragma once

#include <span>
#include <string>
#include <vector>

#include "sagsim/graph.hpp"

namespace sagsim {

/// Outcome of one oracle. A failing verdict always names a witness.
struct Verdict {
  std::string check;
  bool pass = true;
  std::vector<NodeId> witness;  // offending edge (2 ids), node (1 id), or component members
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// No edge of g has both endpoints in s. Witness: the lexicographically first such edge.
Verdict verify_independent(const Graph& g, std::span<const NodeId> s);

/// Every node lies within beta hops of s. Witness: an unreached node farthest from s
/// (unreachable nodes count as infinitely far; ties broken by smallest id).
Verdict verify_domination(const Graph& g, std::span<const NodeId> s, int beta);

/// max over v in u of |N(v) cap u| <= 2 c f ln n (natural log).
Verdict verify_degree_bound(const Graph& g, std::span<const NodeId> u, double f, double c, double n);

/// Independent, and every node outside s has a neighbor in s.
Verdict verify_maximal_independent(const Graph& g, std::span<const NodeId> s);

struct ComponentReport {
  std::vector<std::size_t> sizes;  // ascending
  std::size_t set_size = 0;
  std::size_t max_size() const { return sizes.empty() ? 0 : sizes.back(); }
};

/// Connected component sizes of g[s].
ComponentReport component_report(const Graph& g, std::span<const NodeId> s);

/// 2 c f ln n.
double sparsify_degree_bound(double f, double c, double n);

}  // namespace sagsim
