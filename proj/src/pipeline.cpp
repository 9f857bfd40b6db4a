#include "silicon/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "silicon/prompt.hpp"

namespace silicon {

using nlohmann::json;

std::string_view response_status_name(ResponseStatus status) {
  switch (status) {
    case ResponseStatus::kParsed:
      return "parsed";
    case ResponseStatus::kRefusal:
      return "refusal";
    case ResponseStatus::kOutOfRange:
      return "out_of_range";
    case ResponseStatus::kMalformed:
      return "malformed";
    case ResponseStatus::kTransportFailed:
      return "transport_failed";
  }
  throw Error("unknown response status");
}

ResponseStatus response_status_from_name(std::string_view name) {
  for (ResponseStatus status :
       {ResponseStatus::kParsed, ResponseStatus::kRefusal, ResponseStatus::kOutOfRange,
        ResponseStatus::kMalformed, ResponseStatus::kTransportFailed}) {
    if (response_status_name(status) == name) {
      return status;
    }
  }
  throw Error("unknown response status: " + std::string(name));
}

std::string_view transport_status_name(TransportStatus status) {
  switch (status) {
    case TransportStatus::kOk:
      return "ok";
    case TransportStatus::kTimeout:
      return "timeout";
    case TransportStatus::kRateLimited:
      return "rate_limited";
    case TransportStatus::kServerError:
      return "server_error";
    case TransportStatus::kExhausted:
      return "exhausted";
  }
  throw Error("unknown transport status");
}

TransportStatus transport_status_from_name(std::string_view name) {
  for (TransportStatus status :
       {TransportStatus::kOk, TransportStatus::kTimeout, TransportStatus::kRateLimited,
        TransportStatus::kServerError, TransportStatus::kExhausted}) {
    if (transport_status_name(status) == name) {
      return status;
    }
  }
  throw Error("unknown transport status: " + std::string(name));
}

namespace {

std::string_view trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) {
    return {};
  }
  const auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

bool iprefix(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) {
    return false;
  }
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> default_refusal_prefixes() {
  return {
      "I don't have enough information",
      "I don’t have enough information",
      "I cannot answer",
      "I can't answer",
  };
}

ParseOutcome parse_answer(const std::string& raw_text, int n_options,
                          const std::vector<std::string>& refusal_prefixes) {
  if (n_options < 2 || n_options > 9) {
    throw Error("parse_answer: n_options must be in [2, 9]");
  }
  const std::string_view text = trim(raw_text);

  if (!text.empty() && std::isdigit(static_cast<unsigned char>(text[0]))) {
    const bool lone_digit = text.size() == 1;
    const bool punctuated =
        text.size() == 2 && (text[1] == '.' || text[1] == ')');
    if (lone_digit || punctuated) {
      const int digit = text[0] - '0';
      if (digit >= 1 && digit <= n_options) {
        return {ResponseStatus::kParsed, digit};
      }
      return {ResponseStatus::kOutOfRange, std::nullopt};
    }
  }

  for (const auto& prefix : refusal_prefixes) {
    if (iprefix(text, prefix)) {
      return {ResponseStatus::kRefusal, std::nullopt};
    }
  }
  return {ResponseStatus::kMalformed, std::nullopt};
}

ResponseRecord finalize_record(ResponseRecord record, const Question& question) {
  if (record.condition == ConditionId::kReverseCoded &&
      record.status == ResponseStatus::kParsed) {
    record.option_index =
        remap_reverse_coded(*record.option_index, question.option_count());
  }
  return record;
}

Distribution aggregate(const std::vector<ResponseRecord>& records,
                       const Question& question, FailureTally* tally) {
  FailureTally local;
  const int n = question.option_count();
  std::vector<long> counts(static_cast<std::size_t>(n), 0);
  long parsed = 0;

  for (const auto& record : records) {
    if (!record.question_id.empty() && record.question_id != question.id) {
      throw QuestionMismatchError("aggregate: record for question " +
                                  record.question_id + " mixed into " + question.id);
    }
    switch (record.status) {
      case ResponseStatus::kParsed: {
        const int option = record.option_index.value();
        if (option < 1 || option > n) {
          throw OutOfRangeError("aggregate: parsed option " + std::to_string(option) +
                                " outside [1, " + std::to_string(n) + "]");
        }
        ++counts[static_cast<std::size_t>(option - 1)];
        ++parsed;
        break;
      }
      case ResponseStatus::kRefusal:
        ++local.refusal;
        break;
      case ResponseStatus::kOutOfRange:
        ++local.out_of_range;
        break;
      case ResponseStatus::kMalformed:
        ++local.malformed;
        break;
      case ResponseStatus::kTransportFailed:
        ++local.transport_failed;
        break;
    }
  }
  if (tally != nullptr) {
    *tally = local;
  }
  if (parsed == 0) {
    throw NoParsedResponsesError("aggregate: no parsed responses for question " +
                                 question.id);
  }

  Distribution distribution;
  distribution.question_id = question.id;
  distribution.sample_count = parsed;
  distribution.probabilities.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    distribution.probabilities[static_cast<std::size_t>(k)] =
        static_cast<double>(counts[static_cast<std::size_t>(k)]) /
        static_cast<double>(parsed);
  }
  return distribution;
}

std::string distribution_to_json_text(const Distribution& distribution,
                                      const FailureTally& tally) {
  json node;
  node["question_id"] = distribution.question_id;
  node["probabilities"] = distribution.probabilities;
  node["sample_count"] = distribution.sample_count;
  node["failure_tally"] = {{"refusal", tally.refusal},
                           {"out_of_range", tally.out_of_range},
                           {"malformed", tally.malformed},
                           {"transport_failed", tally.transport_failed}};
  return node.dump();
}

std::string record_to_json_line(const ResponseRecord& record) {
  json line;
  line["respondent_index"] = record.respondent_index;
  line["question_id"] = record.question_id;
  line["condition"] = static_cast<int>(record.condition);
  line["raw_text"] = record.raw_text;
  line["status"] = response_status_name(record.status);
  if (record.option_index) {
    line["option_index"] = *record.option_index;
  }
  line["transport_status"] = transport_status_name(record.transport_status);
  line["attempt_count"] = record.attempt_count;
  return line.dump();
}

ResponseRecord record_from_json_line(const std::string& text) {
  const json node = json::parse(text);
  ResponseRecord record;
  record.respondent_index = node.at("respondent_index").get<long>();
  record.question_id = node.at("question_id").get<std::string>();
  record.condition = condition_from_int(node.at("condition").get<int>());
  record.raw_text = node.at("raw_text").get<std::string>();
  record.status = response_status_from_name(node.at("status").get<std::string>());
  if (node.contains("option_index")) {
    record.option_index = node.at("option_index").get<int>();
  }
  record.transport_status =
      transport_status_from_name(node.at("transport_status").get<std::string>());
  record.attempt_count = node.at("attempt_count").get<int>();
  if ((record.status == ResponseStatus::kParsed) != record.option_index.has_value()) {
    throw Error("response record: option_index must be present iff status is parsed");
  }
  return record;
}

void write_records(const std::vector<ResponseRecord>& records, const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write records file: " + path);
  }
  for (const auto& record : records) {
    out << record_to_json_line(record) << '\n';
  }
}

std::vector<ResponseRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open records file: " + path);
  }
  std::vector<ResponseRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      records.push_back(record_from_json_line(line));
    }
  }
  return records;
}

}  // namespace silicon
