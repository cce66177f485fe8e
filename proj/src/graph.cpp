#include "sagsim/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sagsim/random_tape.hpp"

namespace sagsim {

Graph Graph::from_edges(std::size_t n, std::vector<Edge> edges) {
  if (n >= kNoNode) throw ConfigError("node count exceeds id range");
  for (auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ConfigError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") references a node outside 0.." + std::to_string(n) + "-1");
    }
    if (u == v) throw ConfigError("self-loop at node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto it = std::adjacent_find(edges.begin(), edges.end()); it != edges.end()) {
    throw ConfigError("duplicate edge (" + std::to_string(it->first) + "," +
                      std::to_string(it->second) + ")");
  }

  Graph g;
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adjacency_.resize(2 * edges.size());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted with u < v, so every list receives its smaller neighbors first,
  // in ascending order, followed by its larger ones: lists come out sorted.
  for (const auto& [u, v] : edges) {
    g.adjacency_[fill[u]++] = v;
    g.adjacency_[fill[v]++] = u;
  }
  for (std::size_t v = 0; v < n; ++v) g.max_degree_ = std::max(g.max_degree_, deg[v]);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

GraphStats graph_stats(const Graph& g) {
  GraphStats s;
  s.n = g.num_nodes();
  s.m = g.num_edges();
  s.max_degree = g.max_degree();
  s.degree_histogram.assign(s.max_degree + 1, 0);
  if (s.n == 0) s.degree_histogram.clear();
  for (NodeId v = 0; v < s.n; ++v) ++s.degree_histogram[g.degree(v)];

  std::vector<char> seen(s.n, 0);
  std::vector<NodeId> stack;
  for (NodeId root = 0; root < s.n; ++root) {
    if (seen[root]) continue;
    ++s.components;
    seen[root] = 1;
    stack.push_back(root);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return s;
}

GraphModel parse_graph_model(const std::string& name) {
  if (name == "gnp") return GraphModel::gnp;
  if (name == "random_regular" || name == "regular") return GraphModel::random_regular;
  if (name == "path") return GraphModel::path;
  if (name == "cycle") return GraphModel::cycle;
  if (name == "clique") return GraphModel::clique;
  if (name == "star") return GraphModel::star;
  if (name == "disjoint_cliques") return GraphModel::disjoint_cliques;
  throw ConfigError("unknown graph model '" + name + "'");
}

std::string to_string(GraphModel model) {
  switch (model) {
    case GraphModel::gnp: return "gnp";
    case GraphModel::random_regular: return "random_regular";
    case GraphModel::path: return "path";
    case GraphModel::cycle: return "cycle";
    case GraphModel::clique: return "clique";
    case GraphModel::star: return "star";
    case GraphModel::disjoint_cliques: return "disjoint_cliques";
  }
  return "?";
}

namespace {

std::vector<Edge> gnp_edges(std::size_t n, double p, SeededStream& rng) {
  std::vector<Edge> edges;
  if (n < 2 || p <= 0.0) return edges;
  if (p >= 1.0) {
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return edges;
  }
  // Geometric skipping over the pairs (v, w), w < v.
  const double log_q = std::log1p(-p);
  std::int64_t v = 1;
  std::int64_t w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double r = rng.real();
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) edges.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
  }
  return edges;
}

// Pairing model with incremental rejection; restarts when the remaining points
// cannot be matched.
std::vector<Edge> regular_edges(std::size_t n, std::size_t d, SeededStream& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<NodeId> points;
    points.reserve(n * d);
    for (NodeId v = 0; v < n; ++v)
      for (std::size_t i = 0; i < d; ++i) points.push_back(v);
    std::vector<std::vector<NodeId>> adj(n);
    std::vector<Edge> edges;
    edges.reserve(n * d / 2);
    auto adjacent = [&](NodeId a, NodeId b) {
      const auto& la = adj[a];
      return std::find(la.begin(), la.end(), b) != la.end();
    };
    bool stuck = false;
    while (!points.empty()) {
      bool placed = false;
      for (int tries = 0; tries < 64 && !placed; ++tries) {
        const std::size_t i = rng.below(points.size());
        std::size_t j = rng.below(points.size() - 1);
        if (j >= i) ++j;
        const NodeId a = points[i];
        const NodeId b = points[j];
        if (a == b || adjacent(a, b)) continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
        edges.emplace_back(a, b);
        const std::size_t hi = std::max(i, j);
        const std::size_t lo = std::min(i, j);
        points[hi] = points.back();
        points.pop_back();
        points[lo] = points.back();
        points.pop_back();
        placed = true;
      }
      if (!placed) {
        stuck = true;
        break;
      }
    }
    if (!stuck) return edges;
  }
  throw ConfigError("random_regular: failed to sample a simple " + std::to_string(d) +
                    "-regular graph on " + std::to_string(n) + " nodes");
}

}  // namespace

Graph gen_graph(GraphModel model, const GenParams& params, std::uint64_t seed) {
  const std::size_t n = params.n;
  SeededStream rng(seed);
  std::vector<Edge> edges;
  switch (model) {
    case GraphModel::gnp:
      if (n < 1) throw ConfigError("gnp requires n >= 1");
      if (!(params.p >= 0.0 && params.p <= 1.0)) throw ConfigError("gnp requires 0 <= p <= 1");
      edges = gnp_edges(n, params.p, rng);
      break;
    case GraphModel::random_regular:
      if (n < 1) throw ConfigError("random_regular requires n >= 1");
      if ((n * params.d) % 2 != 0) throw ConfigError("random_regular requires n*d even");
      if (params.d >= n && params.d > 0) throw ConfigError("random_regular requires d < n");
      edges = regular_edges(n, params.d, rng);
      break;
    case GraphModel::path:
      for (NodeId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
      break;
    case GraphModel::cycle:
      if (n < 3) throw ConfigError("cycle requires n >= 3");
      for (NodeId v = 0; v < n; ++v) edges.emplace_back(v, static_cast<NodeId>((v + 1) % n));
      break;
    case GraphModel::clique:
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
      break;
    case GraphModel::star:
      if (n < 1) throw ConfigError("star requires n >= 1");
      for (NodeId v = 1; v < n; ++v) edges.emplace_back(0, v);
      break;
    case GraphModel::disjoint_cliques:
      if (params.k < 1 || n % params.k != 0)
        throw ConfigError("disjoint_cliques requires k >= 1 dividing n");
      for (std::size_t base = 0; base < n; base += params.k)
        for (std::size_t a = 0; a < params.k; ++a)
          for (std::size_t b = a + 1; b < params.k; ++b)
            edges.emplace_back(static_cast<NodeId>(base + a), static_cast<NodeId>(base + b));
      break;
  }
  return Graph::from_edges(n, std::move(edges));
}

namespace {

bool parse_two(const std::string& line, std::uint64_t& a, std::uint64_t& b) {
  const char* p = line.data();
  const char* end = p + line.size();
  auto r1 = std::from_chars(p, end, a);
  if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != ' ') return false;
  auto r2 = std::from_chars(r1.ptr + 1, end, b);
  return r2.ec == std::errc{} && r2.ptr == end;
}

}  // namespace

Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header line \"n m\"");
  std::uint64_t n = 0, m = 0;
  if (!parse_two(line, n, m)) throw ParseError(1, "malformed header, expected \"n m\"");
  if (n >= kNoNode) throw ParseError(1, "node count too large");

  std::vector<Edge> edges;
  edges.reserve(m);
  std::vector<Edge> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (edges.size() == m) throw ParseError(lineno, "more edge lines than declared m");
    std::uint64_t u = 0, v = 0;
    if (!parse_two(line, u, v)) throw ParseError(lineno, "malformed edge line, expected \"u v\"");
    if (u >= n || v >= n) throw ParseError(lineno, "node id out of range");
    if (u == v) throw ParseError(lineno, "self-loop at node " + std::to_string(u));
    edges.emplace_back(static_cast<NodeId>(std::min(u, v)), static_cast<NodeId>(std::max(u, v)));
  }
  if (edges.size() != m) throw ParseError(lineno, "fewer edge lines than declared m");

  // Duplicates are reported at the line of the second occurrence.
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
  std::size_t dup_line = 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (edges[order[i]] == edges[order[i - 1]]) {
      std::size_t l = std::max(order[i], order[i - 1]) + 2;
      if (dup_line == 0 || l < dup_line) dup_line = l;
    }
  }
  if (dup_line != 0) throw ParseError(dup_line, "duplicate edge");
  return Graph::from_edges(n, std::move(edges));
}

void write_graph(const Graph& g, std::ostream& out) {
  std::string buf;
  buf.reserve(16 * (g.num_edges() + 1));
  buf += std::to_string(g.num_nodes()) + ' ' + std::to_string(g.num_edges()) + '\n';
  for (const auto& [u, v] : g.edges()) {
    buf += std::to_string(u);
    buf += ' ';
    buf += std::to_string(v);
    buf += '\n';
  }
  out << buf;
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path.string());
  return read_graph(in);
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write graph file " + path.string());
  write_graph(g, out);
}

InducedSubgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  InducedSubgraph sub;
  sub.to_child.assign(g.num_nodes(), kNoNode);
  for (NodeId v : nodes) {
    if (v >= g.num_nodes()) throw ConfigError("induced_subgraph: node outside graph");
    sub.to_child[v] = 0;
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (sub.to_child[v] != kNoNode) {
      sub.to_child[v] = static_cast<NodeId>(sub.to_parent.size());
      sub.to_parent.push_back(v);
    }
  }
  std::vector<Edge> edges;
  for (NodeId u : sub.to_parent) {
    for (NodeId w : g.neighbors(u)) {
      if (u < w && sub.to_child[w] != kNoNode) edges.emplace_back(sub.to_child[u], sub.to_child[w]);
    }
  }
  sub.graph = Graph::from_edges(sub.to_parent.size(), std::move(edges));
  return sub;
}

}  // namespace sagsim
