#include "silicon/codebook.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace silicon {

using nlohmann::json;

const char* const kDefaultPrimingText =
    "You value logic, objectivity, and internal consistency. When responding, "
    "you prioritize reasoning over emotion, and aim to base your answers on "
    "evidence, structure, and rational analysis. Your goal is to provide "
    "clear, well-reasoned, and intellectually honest answers that reflect "
    "careful thought. The best answer is that which reflects your reasoning "
    "process.";

const char* const kDefaultPreambleText =
    "In this study, we are exploring how people naturally respond to various "
    "questions. To ensure meaningful results, it is important that responses "
    "reflect your genuine thoughts and feelings. There are no correct or "
    "desirable answers, and your responses will not be evaluated or judged. "
    "Please answer honestly and without concern for how your answers might be "
    "perceived. Your sincerity helps us better understand authentic human "
    "responses.";

int DemographicVariable::max_level_code() const {
  int max_code = 0;
  for (const auto& level : levels) {
    max_code = std::max(max_code, level.code);
  }
  return max_code;
}

const CategoryLevel* DemographicVariable::find_level(int code) const {
  for (const auto& level : levels) {
    if (level.code == code) {
      return &level;
    }
  }
  return nullptr;
}

const std::vector<std::string>& Question::options_for(ConditionId condition) const {
  if (condition == ConditionId::kReformulated && options_reformulated) {
    return *options_reformulated;
  }
  if (condition == ConditionId::kReverseCoded && options_reverse_coded) {
    return *options_reverse_coded;
  }
  return options;
}

const DemographicVariable* Codebook::find_variable(const std::string& code) const {
  for (const auto& variable : variables) {
    if (variable.code == code) {
      return &variable;
    }
  }
  return nullptr;
}

const Question* Codebook::find_question(const std::string& id) const {
  for (const auto& question : questions) {
    if (question.id == id) {
      return &question;
    }
  }
  return nullptr;
}

namespace {

[[noreturn]] void schema_fail(const std::string& context, const std::string& what) {
  throw SchemaError("codebook: " + context + ": " + what);
}

std::string require_string(const json& node, const char* key, const std::string& context) {
  if (!node.contains(key) || !node.at(key).is_string()) {
    schema_fail(context, std::string("missing string field '") + key + "'");
  }
  auto value = node.at(key).get<std::string>();
  if (value.empty()) {
    schema_fail(context, std::string("field '") + key + "' is empty");
  }
  return value;
}

std::vector<std::string> string_array(const json& node, const std::string& context) {
  if (!node.is_array()) {
    schema_fail(context, "expected an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : node) {
    if (!item.is_string()) {
      schema_fail(context, "expected an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

DemographicVariable parse_variable(const json& node) {
  DemographicVariable variable;
  variable.code = require_string(node, "code", "variable");
  const std::string context = "variable " + variable.code;
  variable.name = require_string(node, "name", context);
  variable.numeric = node.value("numeric", false);

  if (variable.numeric) {
    if (!node.contains("range") || !node.at("range").is_array() ||
        node.at("range").size() != 2) {
      schema_fail(context, "numeric variable needs \"range\": [min, max]");
    }
    variable.numeric_min = node.at("range")[0].get<int>();
    variable.numeric_max = node.at("range")[1].get<int>();
    if (variable.numeric_min < 1 || variable.numeric_max < variable.numeric_min) {
      schema_fail(context, "invalid numeric range");
    }
    variable.first_person_template = require_string(node, "first_person", context);
    variable.third_person_template = require_string(node, "third_person", context);
    if (variable.first_person_template.find("{}") == std::string::npos ||
        variable.third_person_template.find("{}") == std::string::npos) {
      schema_fail(context, "numeric templates must contain a {} slot");
    }
    return variable;
  }

  if (!node.contains("levels") || !node.at("levels").is_array() ||
      node.at("levels").empty()) {
    schema_fail(context, "missing non-empty \"levels\"");
  }
  std::set<int> seen_codes;
  for (const auto& level_node : node.at("levels")) {
    CategoryLevel level;
    if (!level_node.contains("code") || !level_node.at("code").is_number_integer()) {
      schema_fail(context, "level missing integer \"code\"");
    }
    level.code = level_node.at("code").get<int>();
    level.label = require_string(level_node, "label", context);
    if (level.code < 1) {
      schema_fail(context, "level codes must be >= 1");
    }
    if (!seen_codes.insert(level.code).second) {
      schema_fail(context, "duplicate level code " + std::to_string(level.code));
    }
    variable.levels.push_back(std::move(level));
  }

  variable.first_person = string_array(node.at("first_person"), context + " first_person");
  variable.third_person = string_array(node.at("third_person"), context + " third_person");
  if (variable.first_person.size() != variable.levels.size() ||
      variable.third_person.size() != variable.levels.size()) {
    schema_fail(context, "sentence arrays must have one entry per level");
  }
  for (std::size_t i = 0; i < variable.levels.size(); ++i) {
    if (variable.first_person[i].empty() || variable.third_person[i].empty()) {
      schema_fail(context, "sentence for level " +
                               std::to_string(variable.levels[i].code) + " is empty");
    }
  }
  return variable;
}

Question parse_question(const json& node) {
  Question question;
  question.id = require_string(node, "id", "question");
  const std::string context = "question " + question.id;
  question.topic = require_string(node, "topic", context);
  question.options = string_array(node.at("options"), context + " options");
  question.text_replicate = require_string(node, "text_replicate", context);
  question.text_reformulated = require_string(node, "text_reformulated", context);
  if (node.contains("text_reverse_coded") && !node.at("text_reverse_coded").is_null()) {
    question.text_reverse_coded = node.at("text_reverse_coded").get<std::string>();
  }
  question.reverse_applicable = node.value("reverse_applicable", false);

  if (node.contains("options_reformulated")) {
    question.options_reformulated =
        string_array(node.at("options_reformulated"), context + " options_reformulated");
  }
  if (node.contains("options_reverse_coded")) {
    question.options_reverse_coded =
        string_array(node.at("options_reverse_coded"), context + " options_reverse_coded");
  }
  return question;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) {
    if (!field.empty() && field.back() == '\r') {
      field.pop_back();
    }
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

int parse_cell(const std::string& field, const std::string& column, long line_number) {
  std::string trimmed = field;
  const auto begin = trimmed.find_first_not_of(" \t");
  const auto end = trimmed.find_last_not_of(" \t");
  if (begin == std::string::npos) {
    // Empty cell: recorded as a sentinel, dropped at distribution time.
    return -999999;
  }
  trimmed = trimmed.substr(begin, end - begin + 1);
  try {
    std::size_t consumed = 0;
    const int value = std::stoi(trimmed, &consumed);
    if (consumed != trimmed.size()) {
      throw std::invalid_argument(trimmed);
    }
    return value;
  } catch (const std::exception&) {
    throw IoError("human data: line " + std::to_string(line_number) + ", column " +
                  column + ": not an integer: '" + field + "'");
  }
}

}  // namespace

void validate_codebook(const Codebook& codebook) {
  if (codebook.variables.empty()) {
    throw SchemaError("codebook: no variables");
  }
  if (codebook.questions.empty()) {
    throw SchemaError("codebook: no questions");
  }

  std::set<std::string> variable_codes;
  int numeric_count = 0;
  for (const auto& variable : codebook.variables) {
    if (!variable_codes.insert(variable.code).second) {
      throw SchemaError("codebook: duplicate variable code " + variable.code);
    }
    if (variable.numeric) {
      ++numeric_count;
    }
  }
  if (numeric_count > 1) {
    throw SchemaError("codebook: at most one numeric variable is supported");
  }

  std::set<std::string> question_ids;
  for (const auto& question : codebook.questions) {
    const std::string context = "question " + question.id;
    if (!question_ids.insert(question.id).second) {
      throw SchemaError("codebook: duplicate question id " + question.id);
    }
    const int n = question.option_count();
    if (n < 2 || n > 9) {
      throw SchemaError("codebook: " + context + ": option count " +
                        std::to_string(n) + " outside [2, 9]");
    }
    if (question.reverse_applicable != question.text_reverse_coded.has_value()) {
      throw SchemaError("codebook: " + context +
                        ": reverse_applicable must match presence of "
                        "text_reverse_coded");
    }
    for (const auto* variant : {&question.options_reformulated,
                                &question.options_reverse_coded}) {
      if (*variant && static_cast<int>((*variant)->size()) != n) {
        throw SchemaError("codebook: " + context +
                          ": option variant count differs from canonical options");
      }
    }
    if (question.options_reverse_coded && !question.reverse_applicable) {
      throw SchemaError("codebook: " + context +
                        ": options_reverse_coded without a reverse variant");
    }
    for (const auto& label : question.options) {
      if (label.empty()) {
        throw SchemaError("codebook: " + context + ": empty option label");
      }
    }
  }
}

Codebook load_codebook(const std::string& path) {
  std::ifstream input(path);
  if (!input) {
    throw IoError("cannot open codebook file: " + path);
  }
  json doc;
  try {
    input >> doc;
  } catch (const json::exception& ex) {
    throw SchemaError("codebook: " + path + ": " + ex.what());
  }

  Codebook codebook;
  if (!doc.contains("variables") || !doc.contains("questions")) {
    throw SchemaError("codebook: top-level \"variables\" and \"questions\" required");
  }
  for (const auto& node : doc.at("variables")) {
    codebook.variables.push_back(parse_variable(node));
  }
  for (const auto& node : doc.at("questions")) {
    codebook.questions.push_back(parse_question(node));
  }
  codebook.priming_text = doc.value("priming_text", std::string(kDefaultPrimingText));
  codebook.preamble_text = doc.value("preamble_text", std::string(kDefaultPreambleText));
  if (codebook.priming_text.empty() || codebook.preamble_text.empty()) {
    throw SchemaError("codebook: priming_text and preamble_text must be non-empty");
  }

  validate_codebook(codebook);
  return codebook;
}

HumanDataset load_human_responses(const std::string& path, const Codebook& codebook,
                                  const std::string& wave_label) {
  std::ifstream input(path);
  if (!input) {
    throw IoError("cannot open human data file: " + path);
  }

  std::string header_line;
  if (!std::getline(input, header_line) || is_blank(header_line)) {
    throw IoError("human data: " + path + ": empty file");
  }
  const std::vector<std::string> header = split_csv_line(header_line);

  std::vector<std::string> wanted;
  for (const auto& variable : codebook.variables) {
    wanted.push_back(variable.code);
  }
  for (const auto& question : codebook.questions) {
    wanted.push_back(question.id);
  }

  std::map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column_index[header[i]] = i;
  }
  for (const auto& code : wanted) {
    if (!column_index.count(code)) {
      throw MissingColumnError("human data: " + path + ": missing column " + code);
    }
  }

  HumanDataset dataset;
  dataset.wave_label = wave_label;
  for (const auto& code : wanted) {
    dataset.columns[code] = {};
  }

  std::string line;
  long line_number = 1;
  while (std::getline(input, line)) {
    ++line_number;
    if (is_blank(line)) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw IoError("human data: line " + std::to_string(line_number) +
                    ": expected " + std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    }
    for (const auto& code : wanted) {
      dataset.columns[code].push_back(
          parse_cell(fields[column_index[code]], code, line_number));
    }
    ++dataset.row_count;
  }
  return dataset;
}

MarginalSet empirical_marginals(const HumanDataset& data, const Codebook& codebook) {
  if (data.row_count == 0) {
    throw AllMissingError("empirical_marginals: dataset has no rows");
  }

  MarginalSet marginals;
  for (const auto& variable : codebook.variables) {
    const auto& column = data.columns.at(variable.code);
    Marginal marginal;
    marginal.numeric = variable.numeric;

    std::map<int, long> counts;
    long valid = 0;
    const int low = variable.numeric ? variable.numeric_min : 1;
    const int high = variable.numeric ? variable.numeric_max : variable.max_level_code();
    for (int raw : column) {
      if (raw < low || raw > high) {
        continue;  // sentinel non-response code
      }
      if (!variable.numeric && variable.find_level(raw) == nullptr) {
        continue;
      }
      ++counts[raw];
      ++valid;
    }
    if (valid == 0) {
      throw AllMissingError("empirical_marginals: variable " + variable.code +
                            " has no valid values");
    }
    for (const auto& [value, count] : counts) {
      marginal.values.push_back(value);
      marginal.probabilities.push_back(static_cast<double>(count) /
                                       static_cast<double>(valid));
    }
    marginals.by_variable[variable.code] = std::move(marginal);
  }
  return marginals;
}

Distribution human_distribution(const HumanDataset& data, const Question& question) {
  const auto it = data.columns.find(question.id);
  if (it == data.columns.end()) {
    throw MissingColumnError("human_distribution: question " + question.id +
                             " not present in dataset");
  }
  const int n = question.option_count();
  std::vector<long> counts(static_cast<std::size_t>(n), 0);
  long valid = 0;
  for (int raw : it->second) {
    if (raw < 1 || raw > n) {
      continue;
    }
    ++counts[static_cast<std::size_t>(raw - 1)];
    ++valid;
  }
  if (valid == 0) {
    throw AllMissingError("human_distribution: question " + question.id +
                          " has no valid responses");
  }

  Distribution distribution;
  distribution.question_id = question.id;
  distribution.sample_count = valid;
  distribution.probabilities.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    distribution.probabilities[static_cast<std::size_t>(k)] =
        static_cast<double>(counts[static_cast<std::size_t>(k)]) /
        static_cast<double>(valid);
  }
  return distribution;
}

}  // namespace silicon
