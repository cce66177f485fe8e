#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sagsim {

using NodeId = std::uint32_t;
using Word = std::uint64_t;
using Round = std::int64_t;

inline constexpr NodeId kNoNode = ~NodeId{0};

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (bad model params, impossible machine budget, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed graph file. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A node program broke the execution model (non-neighbor message, oversized payload,
/// unsound activation estimate, ...). Identifies the node and round.
class ExecutionError : public Error {
 public:
  ExecutionError(NodeId node, Round round, const std::string& what)
      : Error("node " + std::to_string(node) + ", round " + std::to_string(round) + ": " + what),
        node_(node),
        round_(round) {}
  NodeId node() const noexcept { return node_; }
  Round round() const noexcept { return round_; }

 private:
  NodeId node_;
  Round round_;
};

/// A machine would have to hold or move more than S words at once.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// ceil(log2(x)) for x >= 1; 0 for x <= 1.
inline int ceil_log2(std::uint64_t x) {
  int r = 0;
  std::uint64_t v = 1;
  while (v < x) {
    v <<= 1;
    ++r;
  }
  return r;
}

/// Bits per machine word for an n-node instance: ceil(log2 n), at least 1.
inline int word_bits(std::uint64_t n) { return ceil_log2(n) < 1 ? 1 : ceil_log2(n); }

}  // namespace sagsim
