#include "sagsim/message.hpp"

namespace sagsim {

std::string to_string(FoldOp op) {
  switch (op) {
    case FoldOp::sum: return "sum";
    case FoldOp::max: return "max";
    case FoldOp::min: return "min";
    case FoldOp::bit_or: return "or";
    case FoldOp::bit_and: return "and";
  }
  return "?";
}

FoldOp parse_fold_op(const std::string& name) {
  if (name == "sum") return FoldOp::sum;
  if (name == "max") return FoldOp::max;
  if (name == "min") return FoldOp::min;
  if (name == "or") return FoldOp::bit_or;
  if (name == "and") return FoldOp::bit_and;
  throw ConfigError("not a separable function: '" + name + "' (expected sum|max|min|or|and)");
}

}  // namespace sagsim
