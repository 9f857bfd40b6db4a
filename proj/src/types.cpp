#include "silicon/types.hpp"

namespace silicon {

std::string_view condition_name(ConditionId condition) {
  switch (condition) {
    case ConditionId::kReplicate:
      return "replicate";
    case ConditionId::kReformulated:
      return "reformulated";
    case ConditionId::kReverseCoded:
      return "reverse_coded";
    case ConditionId::kPriming:
      return "priming";
    case ConditionId::kPreamble:
      return "preamble";
  }
  throw Error("unknown condition");
}

ConditionId condition_from_int(int value) {
  if (value < 0 || value > 4) {
    throw Error("condition must be in [0, 4], got " + std::to_string(value));
  }
  return static_cast<ConditionId>(value);
}

}  // namespace silicon
