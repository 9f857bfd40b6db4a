#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "silicon/errors.hpp"

namespace silicon {

/// The five prompt conditions. Values match the on-disk and report encoding.
enum class ConditionId : int {
  kReplicate = 0,
  kReformulated = 1,
  kReverseCoded = 2,
  kPriming = 3,
  kPreamble = 4,
};

inline constexpr std::array<ConditionId, 5> kAllConditions = {
    ConditionId::kReplicate,   ConditionId::kReformulated,
    ConditionId::kReverseCoded, ConditionId::kPriming,
    ConditionId::kPreamble,
};

std::string_view condition_name(ConditionId condition);
ConditionId condition_from_int(int value);

/// Tally of records excluded from a distribution, by failure kind.
struct FailureTally {
  long refusal = 0;
  long out_of_range = 0;
  long malformed = 0;
  long transport_failed = 0;

  long total() const { return refusal + out_of_range + malformed + transport_failed; }
};

/// Probability vector over a question's option indices 1..n.
struct Distribution {
  std::string question_id;
  std::vector<double> probabilities;
  long sample_count = 0;

  int support_size() const { return static_cast<int>(probabilities.size()); }
};

}  // namespace silicon
