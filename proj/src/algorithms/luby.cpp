#include "sagsim/algorithms/luby.hpp"

namespace sagsim {

LubyProgram::LubyProgram(const Graph& g, const RandomTape& tape, int max_iterations)
    : iterations_(max_iterations > 0 ? max_iterations : 8 * word_bits(g.num_nodes()) + 16),
      id_bits_(word_bits(g.num_nodes())) {
  if (tape.precision_bits() + id_bits_ > 64) {
    throw ConfigError("Luby keys need precision_bits + ceil(log2 n) <= 64");
  }
}

Word LubyProgram::key(const NodeContext& ctx) const {
  return (ctx.tape->round_index(ctx.id, coin_round(ctx.round)) << id_bits_) | ctx.id;
}

Start<LubyProgram::State> LubyProgram::init(const NodeContext& ctx) const {
  State s;
  s.id = ctx.id;
  return {s, Status::active};
}

std::optional<Payload> LubyProgram::send(const State& s, const NodeContext& ctx) const {
  if (ctx.round % 2 == 1) return Payload::of(key(ctx));
  if (s.winner) return Payload::of(1);
  return std::nullopt;
}

Status LubyProgram::receive(State& s, const NodeContext& ctx, const std::optional<Payload>& folded) const {
  if (ctx.round % 2 == 1) {
    s.winner = !folded || key(ctx) < folded->w[0];
    return Status::active;
  }
  if (s.winner) {
    s.in_mis = true;
    return Status::halted;
  }
  if (folded) {
    s.removed = true;
    return Status::halted;
  }
  return Status::active;
}

Estimate LubyProgram::estimate(const State&, const NodeContext&, Round) const { return {1.0, false}; }

std::size_t LubyProgram::state_bits(const State&, const NodeContext& ctx) const {
  return static_cast<std::size_t>(ctx.word_bits) + 3;
}

void LubyProgram::encode(const State& s, std::vector<std::uint8_t>& out) const {
  put_u64(out, s.id);
  put_u8(out, static_cast<std::uint8_t>((s.winner ? 1 : 0) | (s.in_mis ? 2 : 0) | (s.removed ? 4 : 0)));
}

}  // namespace sagsim
