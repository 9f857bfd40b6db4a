#pragma once

#include <optional>
#include <string>
#include <vector>

#include "silicon/codebook.hpp"
#include "silicon/types.hpp"

namespace silicon {

enum class ResponseStatus {
  kParsed,
  kRefusal,
  kOutOfRange,
  kMalformed,
  kTransportFailed,
};

std::string_view response_status_name(ResponseStatus status);
ResponseStatus response_status_from_name(std::string_view name);

enum class TransportStatus {
  kOk,
  kTimeout,
  kRateLimited,
  kServerError,
  kExhausted,
};

std::string_view transport_status_name(TransportStatus status);
TransportStatus transport_status_from_name(std::string_view name);

struct ResponseRecord {
  long respondent_index = 0;
  std::string question_id;
  ConditionId condition = ConditionId::kReplicate;
  std::string raw_text;
  ResponseStatus status = ResponseStatus::kMalformed;
  std::optional<int> option_index;  // present iff status == kParsed; post-remap
  TransportStatus transport_status = TransportStatus::kOk;
  int attempt_count = 1;
};

struct ParseOutcome {
  ResponseStatus status = ResponseStatus::kMalformed;
  std::optional<int> option_index;  // present iff status == kParsed
};

/// Refusal texts recognized by prefix match (leading whitespace ignored,
/// ASCII case-insensitive).
std::vector<std::string> default_refusal_prefixes();

/// Grammar: after trimming, a single digit optionally followed by "." or ")".
/// A digit in [1, n_options] parses; a digit outside is OutOfRange; text
/// starting with a refusal prefix is Refusal; anything else is Malformed.
ParseOutcome parse_answer(const std::string& raw_text, int n_options,
                          const std::vector<std::string>& refusal_prefixes =
                              default_refusal_prefixes());

/// Applies the reverse-coded numeric inversion to Parsed condition-2 records;
/// all other records pass through unchanged.
ResponseRecord finalize_record(ResponseRecord record, const Question& question);

/// Normalized counts of Parsed option indices over the question's full option
/// list (zero entries permitted). Excluded records are tallied by kind.
Distribution aggregate(const std::vector<ResponseRecord>& records,
                       const Question& question, FailureTally* tally = nullptr);

void write_records(const std::vector<ResponseRecord>& records, const std::string& path);
std::vector<ResponseRecord> read_records(const std::string& path);

/// {question_id, probabilities, sample_count, failure_tally} as one JSON text.
std::string distribution_to_json_text(const Distribution& distribution,
                                      const FailureTally& tally);

std::string record_to_json_line(const ResponseRecord& record);
ResponseRecord record_from_json_line(const std::string& line);

}  // namespace silicon
