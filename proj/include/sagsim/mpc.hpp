#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/message.hpp"
#include "sagsim/types.hpp"

namespace sagsim {

enum class MemoryMode { unrestricted, input_linear };

std::string to_string(MemoryMode m);
MemoryMode parse_memory_mode(const std::string& name);

struct MachineConfig {
  double epsilon = 0.5;
  std::size_t S = 0;  // words per machine
  MemoryMode memory_mode = MemoryMode::unrestricted;
  double c_mem = 4.0;
  /// Replaces the computed total-memory budget when set (used to force audit failures).
  std::optional<double> budget_override;
  /// Machine-count warning threshold factor C in C * n^(1-eps).
  double machine_count_factor = 8.0;

  /// S = ceil(n^eps). Throws ConfigError if eps is outside (0,1) or S < 2.
  static MachineConfig make(std::size_t n, double epsilon, MemoryMode mode = MemoryMode::unrestricted);

  /// Total-memory budget in words for an (n, m) instance.
  double total_budget(std::size_t n, std::size_t m) const;
};

/// One piece of a node's adjacency list resident on one machine. The copies of a node
/// form an implicit S-ary heap: copy i has parent (i-1)/S and holds adjacency entries
/// [i*S, (i+1)*S). Copy 0 is the root and owns the node's state.
struct NodeCopy {
  std::uint32_t machine = 0;
  std::uint32_t first = 0;  // first adjacency index held
  std::uint32_t count = 0;  // adjacency entries held (>= 1 word footprint even if 0)
  std::uint32_t depth = 0;
};

struct MachineLayout {
  std::size_t S = 0;
  std::size_t n = 0;
  std::vector<std::size_t> machine_words;   // resident graph words per machine
  std::vector<NodeCopy> copies;
  std::vector<std::uint32_t> copy_start;    // node -> first copy index (size n+1)
  /// For adjacency slot (u, j) in CSR order: the copy of neighbor w = N(u)[j] whose chunk
  /// contains u. This is where u's value lands during an exchange.
  std::vector<std::uint32_t> landing_copy;
  std::uint32_t max_depth = 0;

  std::size_t num_machines() const { return machine_words.size(); }
  std::size_t num_copies(NodeId v) const { return copy_start[v + 1] - copy_start[v]; }
  const NodeCopy& copy(NodeId v, std::size_t i) const { return copies[copy_start[v] + i]; }
  std::uint32_t host(NodeId v) const { return copies[copy_start[v]].machine; }
  std::size_t total_words() const;
  std::size_t max_machine_words() const;
  /// Depth of node v's aggregation tree (0 when unsplit).
  std::uint32_t tree_depth(NodeId v) const;
};

/// First-fit by descending degree; nodes with deg > S are split into ceil(deg/S) copies.
MachineLayout build_layout(const Graph& g, const MachineConfig& cfg);

/// One simulated MPC round.
struct MpcRound {
  std::string label;
  std::uint64_t max_sent = 0;
  std::uint64_t max_recv = 0;
  std::uint64_t max_resident = 0;
  std::uint64_t total_resident = 0;
};

struct RoundMetrics {
  std::vector<MpcRound> rounds;
  std::size_t peak_machines = 0;

  std::uint64_t round_count() const { return rounds.size(); }
  std::uint64_t max_sent() const;
  std::uint64_t max_recv() const;
  std::uint64_t peak_machine_words() const;
  std::uint64_t peak_total_words() const;
  void append(const RoundMetrics& other);
};

/// Per-machine traffic of one logical communication step. A step whose heaviest machine
/// moves L words is charged max(1, ceil(L/S)) rounds (delivery is split, never over cap).
struct Traffic {
  std::vector<std::uint64_t> sent;
  std::vector<std::uint64_t> recv;
  explicit Traffic(std::size_t machines = 0) : sent(machines, 0), recv(machines, 0) {}
  void add(std::uint32_t from, std::uint32_t to, std::uint64_t words) {
    sent[from] += words;
    recv[to] += words;
  }
};

struct Residency {
  std::uint64_t max_machine = 0;
  std::uint64_t total = 0;
};

/// Charges one communication step; returns the number of rounds it took.
std::uint64_t charge_step(RoundMetrics& metrics, const std::string& label, const Traffic& t,
                          std::size_t S, const Residency& res);

/// Charges a step whose senders may replicate records through helper machines. A sender
/// above S words first copies its records down a tree with fan-out max(2, floor(S / record_words))
/// until every helper holds at most S words, then all helpers deliver in parallel. Falls back
/// to sequential delivery (charge_step) when that is no slower.
struct FanoutCharge {
  std::uint64_t rounds = 0;
  std::size_t helpers = 0;  // extra machines used by the replication trees
};
FanoutCharge charge_fanout_step(RoundMetrics& metrics, const std::string& label, const Traffic& t, std::size_t S,
                                std::uint64_t record_words, const Residency& res);

/// Fold of neighbor payloads for every node: result[v] = op over {values[u] : u ~ v,
/// values[u] present}; absent when no neighbor contributes. Runs down-broadcast over the
/// aggregation trees, one exchange, and a convergecast: at most 2*depth + O(1) steps.
std::vector<std::optional<Payload>> aggregate_payloads(const MachineLayout& layout, const Graph& g,
                                                       FoldOp op,
                                                       const std::vector<std::optional<Payload>>& values,
                                                       RoundMetrics& metrics, const Residency& res,
                                                       const std::string& label = "aggregate");

/// One word per node; isolated nodes receive the identity of op.
std::vector<Word> aggregate_separable(const MachineLayout& layout, const Graph& g, FoldOp op,
                                      const std::vector<Word>& values, RoundMetrics& metrics);

Word fold_identity(FoldOp op);

struct MachineMessage {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::vector<Word> words;
};

/// Delivers indivisible messages between machines. Messages are taken in (sender, sequence)
/// order and packed greedily into rounds so that no machine sends or receives more than
/// S words per round. Always consumes at least one round. Throws CapacityError for a
/// single message longer than S.
std::vector<MachineMessage> exchange(std::size_t num_machines, std::size_t S,
                                     std::vector<MachineMessage> messages, RoundMetrics& metrics,
                                     const Residency& res = {});

struct AuditReport {
  bool pass = true;
  std::int64_t first_bad_round = -1;  // 1-based, -1 if none
  std::string reason;
  std::uint64_t peak_total_words = 0;
  double budget_words = 0.0;
  bool machine_count_warning = false;
};

AuditReport audit(const RoundMetrics& metrics, const MachineConfig& cfg, std::size_t n, std::size_t m);

}  // namespace sagsim
