#pragma once

#include <optional>
#include <string>
#include <vector>

#include "silicon/stats.hpp"

namespace silicon {

/// Everything needed to render one (question, condition) evaluation cell.
struct EvalCell {
  std::string question_id;
  std::string topic;
  ConditionId condition = ConditionId::kReplicate;
  DivergenceEstimate estimate;
  std::optional<DeltaReport> delta_vs_replicate;
  std::vector<double> human_probabilities;
  std::vector<double> silicon_probabilities;
  FailureTally failures;
};

/// Stacked-bar SVG comparing the human distribution against each condition's
/// silicon distribution for one question.
std::string render_question_chart(const std::string& topic,
                                  const std::vector<std::string>& option_labels,
                                  const std::vector<EvalCell>& cells);

/// Markdown tables: JSD point estimates with CIs and deltas with a
/// significance marker column ("*" = non-overlapping CIs).
std::string render_delta_tables(const std::string& wave_label, double temperature,
                                const std::vector<EvalCell>& cells);

}  // namespace silicon
