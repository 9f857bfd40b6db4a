#pragma once

#include <string>

#include "silicon/codebook.hpp"
#include "silicon/sampler.hpp"
#include "silicon/types.hpp"

namespace silicon {

struct SurveyDate {
  int year = 2020;
  int month = 11;  // 1..12
  int day = 3;

  /// "November 3, 2020"
  std::string to_english() const;
  /// "2020-11-03"
  std::string to_iso() const;
  static SurveyDate from_iso(const std::string& text);
};

/// Fully rendered prompts for one (respondent, question, condition) triple.
struct PromptBundle {
  long respondent_index = 0;
  std::string question_id;
  ConditionId condition = ConditionId::kReplicate;
  std::string system_text;
  std::string user_text;
};

/// Trailing instruction appended to every user prompt, verbatim.
extern const char* const kSingleNumberInstruction;

/// Survey-date sentence, then one sentence per demographic variable in
/// codebook order. First person for conditions {0,2,3,4}, third person for
/// condition 1. The Priming condition appends the codebook priming paragraph.
std::string render_system_prompt(const RespondentProfile& profile,
                                 const Codebook& codebook, ConditionId condition,
                                 const SurveyDate& survey_date);

/// Question stem for the condition (replicate for {0,3,4}, reformulated for 1,
/// reverse-coded for 2), numbered answer choices, and the single-number
/// instruction. The Preamble condition prepends the codebook preamble
/// paragraph. Always ends with "My answer is".
std::string render_user_prompt(const Question& question, const Codebook& codebook,
                               ConditionId condition);

PromptBundle render_bundle(const RespondentProfile& profile, const Question& question,
                           const Codebook& codebook, ConditionId condition,
                           const SurveyDate& survey_date);

/// Audit export: one JSON object per line. The key fields match the
/// MockTable fixture schema, so a dump can seed a table-driven replay.
void write_bundles(const std::vector<PromptBundle>& bundles, const std::string& path);
std::vector<PromptBundle> read_bundles(const std::string& path);

/// Numeric inversion for reverse-coded answers: k -> n + 1 - k.
int remap_reverse_coded(int option_index, int n_options);

}  // namespace silicon
