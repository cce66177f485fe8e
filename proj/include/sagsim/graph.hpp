#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sagsim/types.hpp"

namespace sagsim {

using Edge = std::pair<NodeId, NodeId>;

/// Static undirected simple graph in compressed adjacency form.
///
/// Node ids are dense (0..n-1). Every adjacency list is strictly increasing and the
/// relation is symmetric; construction rejects self-loops and duplicate edges.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an undirected edge list (either orientation accepted).
  /// Throws ConfigError on self-loops, out-of-range ids, or duplicate edges.
  static Graph from_edges(std::size_t n, std::vector<Edge> edges);

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return adjacency_.size() / 2; }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], degree(v)};
  }
  /// Position of v's list inside the concatenated adjacency array.
  std::size_t offset(NodeId v) const { return offsets_[v]; }
  std::size_t max_degree() const noexcept { return max_degree_; }
  bool has_edge(NodeId u, NodeId v) const;

  /// All edges (u, v) with u < v, sorted lexicographically.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::size_t max_degree_ = 0;
};

struct GraphStats {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t max_degree = 0;
  std::vector<std::size_t> degree_histogram;  // index = degree
  std::size_t components = 0;
};

GraphStats graph_stats(const Graph& g);

enum class GraphModel { gnp, random_regular, path, cycle, clique, star, disjoint_cliques };

GraphModel parse_graph_model(const std::string& name);
std::string to_string(GraphModel model);

struct GenParams {
  std::size_t n = 0;
  double p = 0.0;      // gnp edge probability
  std::size_t d = 0;   // random_regular degree
  std::size_t k = 0;   // disjoint_cliques clique size
};

/// Seed-deterministic generator. star: node 0 is the center. disjoint_cliques: n/k
/// cliques of k consecutive ids.
Graph gen_graph(GraphModel model, const GenParams& params, std::uint64_t seed);

/// Edge-list text format: "n m" header then m lines "u v" with u < v.
Graph read_graph(std::istream& in);
void write_graph(const Graph& g, std::ostream& out);
Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& g, const std::filesystem::path& path);

struct InducedSubgraph {
  Graph graph;
  std::vector<NodeId> to_parent;  // new id -> original id (ascending)
  std::vector<NodeId> to_child;   // original id -> new id, kNoNode if absent
};

/// G[S]. Members of `nodes` may repeat or be unordered; new ids follow ascending original id.
InducedSubgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

}  // namespace sagsim
