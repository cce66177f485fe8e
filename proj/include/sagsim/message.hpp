#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sagsim/types.hpp"

namespace sagsim {

/// Up to kMaxPayloadWords words; the CONGEST engine rejects anything above its
/// configured budget W (default 2).
inline constexpr int kMaxPayloadWords = 3;

struct Payload {
  std::array<Word, kMaxPayloadWords> w{};
  std::uint8_t size = 0;

  static Payload of(Word a) { return Payload{{a, 0, 0}, 1}; }
  static Payload of(Word a, Word b) { return Payload{{a, b, 0}, 2}; }

  friend bool operator==(const Payload& a, const Payload& b) {
    return a.size == b.size && std::equal(a.w.begin(), a.w.begin() + a.size, b.w.begin());
  }
};

/// Addressee meaning "every neighbor of the sender".
inline constexpr NodeId kAllNeighbors = kNoNode;

struct Message {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  Payload payload;
};

/// Separable set functions f with f(A) = f(f(B), f(A \ B)), applied word-wise.
enum class FoldOp : std::uint8_t { sum, max, min, bit_or, bit_and };

std::string to_string(FoldOp op);
FoldOp parse_fold_op(const std::string& name);

inline Word fold_word(FoldOp op, Word a, Word b) {
  switch (op) {
    case FoldOp::sum: return a + b;
    case FoldOp::max: return a > b ? a : b;
    case FoldOp::min: return a < b ? a : b;
    case FoldOp::bit_or: return a | b;
    case FoldOp::bit_and: return a & b;
  }
  return a;
}

inline Payload fold_payload(FoldOp op, const Payload& a, const Payload& b) {
  Payload out = a;
  out.size = std::max(a.size, b.size);
  for (int i = 0; i < out.size; ++i) {
    if (i >= a.size) {
      out.w[i] = b.w[i];
    } else if (i < b.size) {
      out.w[i] = fold_word(op, a.w[i], b.w[i]);
    }
  }
  return out;
}

/// Folds an optional accumulator with one more contribution.
inline void fold_into(FoldOp op, std::optional<Payload>& acc, const Payload& x) {
  if (acc) {
    *acc = fold_payload(op, *acc, x);
  } else {
    acc = x;
  }
}

}  // namespace sagsim
