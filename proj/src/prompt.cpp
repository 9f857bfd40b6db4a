#include "silicon/prompt.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace silicon {

const char* const kSingleNumberInstruction =
    "When answering, respond ONLY with a single number that corresponds to "
    "the option you choose. Do not include any additional text, punctuation "
    "or explanation.";

namespace {

constexpr std::array<const char*, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

std::string substitute_slot(const std::string& tmpl, const std::string& value) {
  const auto pos = tmpl.find("{}");
  if (pos == std::string::npos) {
    return tmpl;
  }
  return tmpl.substr(0, pos) + value + tmpl.substr(pos + 2);
}

bool third_person(ConditionId condition) {
  return condition == ConditionId::kReformulated;
}

}  // namespace

std::string SurveyDate::to_english() const {
  if (month < 1 || month > 12) {
    throw Error("survey date: month out of range");
  }
  return std::string(kMonthNames[static_cast<std::size_t>(month - 1)]) + " " +
         std::to_string(day) + ", " + std::to_string(year);
}

std::string SurveyDate::to_iso() const {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", year, month, day);
  return buffer;
}

SurveyDate SurveyDate::from_iso(const std::string& text) {
  SurveyDate date;
  if (std::sscanf(text.c_str(), "%d-%d-%d", &date.year, &date.month, &date.day) != 3 ||
      date.month < 1 || date.month > 12 || date.day < 1 || date.day > 31) {
    throw Error("survey date: expected YYYY-MM-DD, got '" + text + "'");
  }
  return date;
}

std::string render_system_prompt(const RespondentProfile& profile,
                                 const Codebook& codebook, ConditionId condition,
                                 const SurveyDate& survey_date) {
  std::ostringstream out;
  out << "Today is " << survey_date.to_english() << ".";

  const bool third = third_person(condition);
  for (const auto& variable : codebook.variables) {
    const auto it = profile.assignments.find(variable.code);
    if (it == profile.assignments.end()) {
      throw MissingAssignmentError("render_system_prompt: profile " +
                                   std::to_string(profile.index) +
                                   " has no assignment for " + variable.code);
    }
    const int value = it->second;

    std::string sentence;
    if (variable.numeric) {
      const std::string& tmpl =
          third ? variable.third_person_template : variable.first_person_template;
      sentence = substitute_slot(tmpl, std::to_string(value));
    } else {
      const CategoryLevel* level = variable.find_level(value);
      if (level == nullptr) {
        throw MissingAssignmentError("render_system_prompt: variable " + variable.code +
                                     " has no level " + std::to_string(value));
      }
      const std::size_t position =
          static_cast<std::size_t>(level - variable.levels.data());
      sentence = third ? variable.third_person[position] : variable.first_person[position];
    }
    out << ' ' << sentence;
  }

  if (condition == ConditionId::kPriming) {
    out << ' ' << codebook.priming_text;
  }
  return out.str();
}

std::string render_user_prompt(const Question& question, const Codebook& codebook,
                               ConditionId condition) {
  const std::string* stem = nullptr;
  switch (condition) {
    case ConditionId::kReplicate:
    case ConditionId::kPriming:
    case ConditionId::kPreamble:
      stem = &question.text_replicate;
      break;
    case ConditionId::kReformulated:
      stem = &question.text_reformulated;
      break;
    case ConditionId::kReverseCoded:
      if (!question.reverse_applicable || !question.text_reverse_coded) {
        throw ReverseNotApplicableError("render_user_prompt: question " + question.id +
                                        " has no reverse-coded variant");
      }
      stem = &*question.text_reverse_coded;
      break;
  }

  std::ostringstream out;
  if (condition == ConditionId::kPreamble) {
    out << codebook.preamble_text << "\n\n";
  }
  out << "Question: " << *stem << " Answer choices:";
  const auto& options = question.options_for(condition);
  for (std::size_t k = 0; k < options.size(); ++k) {
    out << ' ' << (k + 1) << ". " << options[k];
  }
  out << ' ' << kSingleNumberInstruction << " My answer is";
  return out.str();
}

PromptBundle render_bundle(const RespondentProfile& profile, const Question& question,
                           const Codebook& codebook, ConditionId condition,
                           const SurveyDate& survey_date) {
  PromptBundle bundle;
  bundle.respondent_index = profile.index;
  bundle.question_id = question.id;
  bundle.condition = condition;
  bundle.system_text = render_system_prompt(profile, codebook, condition, survey_date);
  bundle.user_text = render_user_prompt(question, codebook, condition);
  return bundle;
}

void write_bundles(const std::vector<PromptBundle>& bundles, const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write bundles file: " + path);
  }
  for (const auto& bundle : bundles) {
    nlohmann::json line;
    line["respondent_index"] = bundle.respondent_index;
    line["question_id"] = bundle.question_id;
    line["condition"] = static_cast<int>(bundle.condition);
    line["system_text"] = bundle.system_text;
    line["user_text"] = bundle.user_text;
    out << line.dump() << '\n';
  }
}

std::vector<PromptBundle> read_bundles(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open bundles file: " + path);
  }
  std::vector<PromptBundle> bundles;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const nlohmann::json node = nlohmann::json::parse(line);
    PromptBundle bundle;
    bundle.respondent_index = node.at("respondent_index").get<long>();
    bundle.question_id = node.at("question_id").get<std::string>();
    bundle.condition = condition_from_int(node.at("condition").get<int>());
    bundle.system_text = node.at("system_text").get<std::string>();
    bundle.user_text = node.at("user_text").get<std::string>();
    bundles.push_back(std::move(bundle));
  }
  return bundles;
}

int remap_reverse_coded(int option_index, int n_options) {
  if (option_index < 1 || option_index > n_options) {
    throw OutOfRangeError("remap_reverse_coded: option " + std::to_string(option_index) +
                          " outside [1, " + std::to_string(n_options) + "]");
  }
  return n_options + 1 - option_index;
}

}  // namespace silicon
