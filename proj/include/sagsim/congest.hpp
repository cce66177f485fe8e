#pragma once

#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/message.hpp"
#include "sagsim/random_tape.hpp"
#include "sagsim/types.hpp"

namespace sagsim {

/// active: updates state. send_only: may send, never changes state this round.
/// halted: absorbing; neither sends nor changes state.
enum class Status : std::uint8_t { active, send_only, halted };

std::string to_string(Status s);

struct NodeContext {
  NodeId id = 0;
  Round round = 0;  // 0 during init
  std::span<const NodeId> neighbors;
  std::size_t n = 0;
  int word_bits = 1;
  const RandomTape* tape = nullptr;

  std::size_t degree() const noexcept { return neighbors.size(); }
  /// R_r(id). Programs read randomness only through this call.
  double coin(Round r) const { return tape->round_real(id, r); }
};

template <class S>
struct Start {
  S state;
  Status status = Status::active;
};

class Outbox {
 public:
  explicit Outbox(std::vector<Message>& sink, NodeId self) : sink_(sink), self_(self) {}
  void send(NodeId to, const Payload& p) { sink_.push_back(Message{self_, to, p}); }
  void broadcast(const Payload& p) { sink_.push_back(Message{self_, kAllNeighbors, p}); }

 private:
  std::vector<Message>& sink_;
  NodeId self_;
};

/// Messages delivered to one node in one round, ordered by sender id.
class Inbox {
 public:
  Inbox(std::span<const std::uint32_t> refs, const std::vector<Message>& table)
      : refs_(refs), table_(&table) {}

  std::size_t size() const noexcept { return refs_.size(); }
  bool empty() const noexcept { return refs_.empty(); }
  const Message& operator[](std::size_t i) const { return (*table_)[refs_[i]]; }

  class iterator {
   public:
    using value_type = Message;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const Inbox* box, std::size_t i) : box_(box), i_(i) {}
    const Message& operator*() const { return (*box_)[i_]; }
    const Message* operator->() const { return &(*box_)[i_]; }
    iterator& operator++() { ++i_; return *this; }
    iterator operator++(int) { auto t = *this; ++i_; return t; }
    bool operator==(const iterator& o) const { return i_ == o.i_; }

   private:
    const Inbox* box_ = nullptr;
    std::size_t i_ = 0;
  };
  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  std::span<const std::uint32_t> refs_;
  const std::vector<Message>* table_;
};

/// Each round every non-halted node first sends (from its round-(r-1) state), then
/// all messages are delivered simultaneously, then every non-halted node receives.
template <class P>
concept NodeProgram = requires(const P& p, typename P::State& s, const typename P::State& cs,
                               const NodeContext& ctx, Outbox& out, const Inbox& in,
                               std::vector<std::uint8_t>& bytes) {
  { p.init(ctx) } -> std::same_as<Start<typename P::State>>;
  p.send(cs, ctx, out);
  { p.receive(s, ctx, in) } -> std::same_as<Status>;
  { p.state_bits(cs, ctx) } -> std::convertible_to<std::size_t>;
  p.encode(cs, bytes);
};

struct CongestOptions {
  int message_words = 2;  // W
  /// Processing order inside a round; empty means 0..n-1. Must not affect results.
  std::vector<NodeId> order;
  bool audit_send_only = true;
};

struct RoundRecord {
  Round round = 0;
  std::vector<Status> status;            // after the round
  std::vector<std::uint32_t> state_bits; // after the round
  std::uint64_t messages = 0;            // point-to-point deliveries
  std::uint32_t max_message_words = 0;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct ExecutionTrace {
  std::vector<Status> initial_status;
  std::vector<std::uint32_t> initial_state_bits;
  std::vector<RoundRecord> rounds;  // rounds[i].round == i + 1
  std::vector<std::vector<std::uint8_t>> final_states;

  Round effective_rounds() const { return static_cast<Round>(rounds.size()); }
  /// 64-bit digest over every field, for cheap determinism comparisons.
  std::uint64_t digest() const;

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

template <class S>
struct CongestRun {
  std::vector<S> states;
  std::vector<Status> status;
  ExecutionTrace trace;
};

struct CongestionReport {
  bool pass = true;
  NodeId worst_node = kNoNode;
  Round worst_round = 0;
  std::uint64_t worst_bits = 0;
  std::uint64_t worst_budget = 0;
  double worst_ratio = 0.0;  // bits / budget
};

/// Budget deg(v)*kappa*w + kappa*w bits, w = ceil(log2 n).
std::uint64_t congestion_budget(std::size_t degree, std::size_t n, int kappa);

CongestionReport check_state_congested(const ExecutionTrace& trace, const Graph& g, int kappa = 8);

namespace detail {
void check_order(const std::vector<NodeId>& order, std::size_t n);
}

template <NodeProgram P>
CongestRun<typename P::State> run_congest(const Graph& g, const P& prog, const RandomTape& tape,
                                          Round max_rounds, const CongestOptions& opt = {}) {
  using State = typename P::State;
  if (max_rounds < 0) throw ConfigError("max_rounds must be >= 0");
  if (opt.message_words < 1 || opt.message_words > kMaxPayloadWords) {
    throw ConfigError("message word budget must be in [1, " + std::to_string(kMaxPayloadWords) + "]");
  }
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> order = opt.order;
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), NodeId{0});
  }
  detail::check_order(order, n);

  const int wb = word_bits(n);
  auto ctx_for = [&](NodeId v, Round r) {
    return NodeContext{v, r, g.neighbors(v), n, wb, &tape};
  };

  CongestRun<State> run;
  run.states.reserve(n);
  run.status.resize(n);
  ExecutionTrace& tr = run.trace;
  tr.initial_status.resize(n);
  tr.initial_state_bits.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    auto ctx = ctx_for(v, 0);
    Start<State> s = prog.init(ctx);
    run.states.push_back(std::move(s.state));
    run.status[v] = s.status;
    tr.initial_status[v] = s.status;
    tr.initial_state_bits[v] = static_cast<std::uint32_t>(prog.state_bits(run.states[v], ctx));
  }

  std::vector<std::vector<Message>> outboxes(n);
  std::vector<Message> table;
  std::vector<std::size_t> inbox_start(n + 1);
  std::vector<std::uint32_t> refs;
  std::vector<std::uint8_t> before, after;

  for (Round r = 1; r <= max_rounds; ++r) {
    bool any_live = false;
    for (Status s : run.status) any_live = any_live || s != Status::halted;
    if (!any_live) break;

    for (NodeId v : order) {
      outboxes[v].clear();
      if (run.status[v] == Status::halted) continue;
      Outbox out(outboxes[v], v);
      prog.send(run.states[v], ctx_for(v, r), out);
      for (const Message& m : outboxes[v]) {
        if (m.payload.size > opt.message_words) {
          throw ExecutionError(v, r, "payload of " + std::to_string(m.payload.size) +
                                         " words exceeds budget W=" + std::to_string(opt.message_words));
        }
        if (m.to != kAllNeighbors && !g.has_edge(v, m.to)) {
          throw ExecutionError(v, r, "message addressed to non-neighbor " + std::to_string(m.to));
        }
      }
    }

    // Deliver in sender-id order so inboxes are sorted by sender.
    RoundRecord rec;
    rec.round = r;
    table.clear();
    std::fill(inbox_start.begin(), inbox_start.end(), 0);
    for (NodeId v = 0; v < n; ++v) {
      for (const Message& m : outboxes[v]) {
        table.push_back(m);
        rec.max_message_words = std::max<std::uint32_t>(rec.max_message_words, m.payload.size);
        if (m.to == kAllNeighbors) {
          for (NodeId u : g.neighbors(v)) ++inbox_start[u + 1];
          rec.messages += g.degree(v);
        } else {
          ++inbox_start[m.to + 1];
          ++rec.messages;
        }
      }
    }
    std::partial_sum(inbox_start.begin(), inbox_start.end(), inbox_start.begin());
    refs.assign(inbox_start[n], 0);
    {
      std::vector<std::size_t> fill(inbox_start.begin(), inbox_start.end() - 1);
      for (std::uint32_t i = 0; i < table.size(); ++i) {
        const Message& m = table[i];
        if (m.to == kAllNeighbors) {
          for (NodeId u : g.neighbors(m.from)) refs[fill[u]++] = i;
        } else {
          refs[fill[m.to]++] = i;
        }
      }
    }

    for (NodeId v : order) {
      if (run.status[v] == Status::halted) continue;
      auto ctx = ctx_for(v, r);
      Inbox in(std::span<const std::uint32_t>(refs.data() + inbox_start[v],
                                              inbox_start[v + 1] - inbox_start[v]),
               table);
      if (opt.audit_send_only) {
        before.clear();
        prog.encode(run.states[v], before);
      }
      Status st = prog.receive(run.states[v], ctx, in);
      if (st == Status::send_only && opt.audit_send_only) {
        after.clear();
        prog.encode(run.states[v], after);
        if (before != after) throw ExecutionError(v, r, "send-only node changed its state");
      }
      run.status[v] = st;
    }

    rec.status = run.status;
    rec.state_bits.resize(n);
    for (NodeId v = 0; v < n; ++v) {
      rec.state_bits[v] = static_cast<std::uint32_t>(prog.state_bits(run.states[v], ctx_for(v, r)));
    }
    tr.rounds.push_back(std::move(rec));
  }

  tr.final_states.resize(n);
  for (NodeId v = 0; v < n; ++v) prog.encode(run.states[v], tr.final_states[v]);
  return run;
}

}  // namespace sagsim
