#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silicon/types.hpp"

namespace silicon {

struct CategoryLevel {
  int code = 0;        // >= 1
  std::string label;   // non-empty
};

/// One demographic variable with per-level prompt sentences.
///
/// Categorical variables carry one first-person and one third-person sentence
/// per level (irregular conjugation rules out label templating). The single
/// numeric variable (age) instead carries one template per person with a `{}`
/// slot for the integer value.
struct DemographicVariable {
  std::string code;  // e.g. "V201549x"
  std::string name;
  bool numeric = false;

  // Categorical variables.
  std::vector<CategoryLevel> levels;
  std::vector<std::string> first_person;  // aligned with levels
  std::vector<std::string> third_person;

  // Numeric variable.
  int numeric_min = 0;
  int numeric_max = 0;
  std::string first_person_template;  // contains "{}"
  std::string third_person_template;

  int max_level_code() const;
  const CategoryLevel* find_level(int code) const;
};

struct Question {
  std::string id;     // e.g. "V202371"
  std::string topic;  // e.g. "Climate Change"
  std::vector<std::string> options;  // canonical (replicate) labels, 2..9
  std::string text_replicate;
  std::string text_reformulated;
  std::optional<std::string> text_reverse_coded;
  bool reverse_applicable = false;

  // A.9-style variants may reword option labels; counts always match.
  std::optional<std::vector<std::string>> options_reformulated;
  std::optional<std::vector<std::string>> options_reverse_coded;

  int option_count() const { return static_cast<int>(options.size()); }
  const std::vector<std::string>& options_for(ConditionId condition) const;
};

struct Codebook {
  std::vector<DemographicVariable> variables;
  std::vector<Question> questions;
  std::string priming_text;
  std::string preamble_text;

  const DemographicVariable* find_variable(const std::string& code) const;
  const Question* find_question(const std::string& id) const;
};

/// Column-major survey rows; raw values preserved, including sentinel
/// non-response codes (filtering happens only at distribution time).
struct HumanDataset {
  std::string wave_label;
  long row_count = 0;
  std::map<std::string, std::vector<int>> columns;
};

/// Empirical marginal for one variable: probabilities over ascending level
/// codes, or over ascending observed integer ages for the numeric variable.
struct Marginal {
  bool numeric = false;
  std::vector<int> values;  // level codes or ages, ascending
  std::vector<double> probabilities;
};

struct MarginalSet {
  std::map<std::string, Marginal> by_variable;
};

Codebook load_codebook(const std::string& path);
HumanDataset load_human_responses(const std::string& path, const Codebook& codebook,
                                  const std::string& wave_label = "");

MarginalSet empirical_marginals(const HumanDataset& data, const Codebook& codebook);
Distribution human_distribution(const HumanDataset& data, const Question& question);

void validate_codebook(const Codebook& codebook);

extern const char* const kDefaultPrimingText;
extern const char* const kDefaultPreambleText;

}  // namespace silicon
