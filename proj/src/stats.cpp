#include "silicon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "silicon/hash.hpp"

namespace silicon {

void BootstrapConfig::validate() const {
  if (replicates < 1) {
    throw Error("bootstrap: replicates must be >= 1");
  }
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw Error("bootstrap: confidence_level must be in (0, 1)");
  }
}

double kl_divergence(std::span<const double> p, std::span<const double> m) {
  if (p.size() != m.size()) {
    throw SupportViolationError("kl_divergence: support sizes differ");
  }
  double sum = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) {
      continue;
    }
    if (m[x] <= 0.0) {
      throw SupportViolationError("kl_divergence: p(x) > 0 where m(x) = 0 at index " +
                                  std::to_string(x));
    }
    sum += p[x] * std::log2(p[x] / m[x]);
  }
  return sum;
}

double kl_divergence(const Distribution& p, const Distribution& m) {
  return kl_divergence(std::span<const double>(p.probabilities),
                       std::span<const double>(m.probabilities));
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw SupportViolationError("js_divergence: support sizes differ");
  }
  std::vector<double> mixture(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) {
    mixture[x] = 0.5 * (p[x] + q[x]);
  }
  return 0.5 * kl_divergence(p, mixture) + 0.5 * kl_divergence(q, mixture);
}

double js_divergence(const Distribution& p, const Distribution& q) {
  return js_divergence(std::span<const double>(p.probabilities),
                       std::span<const double>(q.probabilities));
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error("sorted_quantile: empty sample");
  }
  if (sorted.size() == 1) {
    return sorted[0];
  }
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const auto upper = std::min(lower + 1, sorted.size() - 1);
  const double fraction = position - static_cast<double>(lower);
  return sorted[lower] * (1.0 - fraction) + sorted[upper] * fraction;
}

DivergenceEstimate bootstrap_jsd(const Distribution& human,
                                 const std::vector<ResponseRecord>& silicon_records,
                                 const Question& question, const BootstrapConfig& config,
                                 std::string_view salt) {
  config.validate();
  const int n = question.option_count();
  if (human.support_size() != n) {
    throw SupportViolationError("bootstrap_jsd: human support differs from question " +
                                question.id);
  }

  std::vector<int> options;
  options.reserve(silicon_records.size());
  ConditionId condition = ConditionId::kReplicate;
  bool condition_seen = false;
  for (const auto& record : silicon_records) {
    if (!condition_seen) {
      condition = record.condition;
      condition_seen = true;
    }
    if (record.status == ResponseStatus::kParsed) {
      options.push_back(*record.option_index);
    }
  }
  if (options.empty()) {
    throw NoParsedResponsesError("bootstrap_jsd: no parsed silicon records for " +
                                 question.id);
  }

  const Distribution silicon = aggregate(silicon_records, question);

  DivergenceEstimate estimate;
  estimate.question_id = question.id;
  estimate.condition = condition;
  estimate.point = js_divergence(human, silicon);
  estimate.replicate_count = config.replicates;
  estimate.sample_count = static_cast<long>(options.size());

  const std::uint64_t cell_seed =
      SeedChain(config.seed)
          .mix(question.id)
          .mix(static_cast<std::uint64_t>(condition))
          .mix(salt)
          .value();

  const std::size_t count = options.size();
  std::vector<double> replicate_values(static_cast<std::size_t>(config.replicates));
  std::vector<double> probabilities(static_cast<std::size_t>(n));
  std::vector<long> counts(static_cast<std::size_t>(n));

  for (int j = 0; j < config.replicates; ++j) {
    SplitMix64 rng(SeedChain(cell_seed).mix(static_cast<std::uint64_t>(j)).value());
    std::fill(counts.begin(), counts.end(), 0L);
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t pick = rng.next_below(count);
      ++counts[static_cast<std::size_t>(options[pick] - 1)];
    }
    for (int k = 0; k < n; ++k) {
      probabilities[static_cast<std::size_t>(k)] =
          static_cast<double>(counts[static_cast<std::size_t>(k)]) /
          static_cast<double>(count);
    }
    replicate_values[static_cast<std::size_t>(j)] =
        js_divergence(std::span<const double>(human.probabilities),
                      std::span<const double>(probabilities));
  }

  std::sort(replicate_values.begin(), replicate_values.end());
  const double alpha = 1.0 - config.confidence_level;
  estimate.ci_low = sorted_quantile(replicate_values, alpha / 2.0);
  estimate.ci_high = sorted_quantile(replicate_values, 1.0 - alpha / 2.0);
  return estimate;
}

DeltaReport delta(const DivergenceEstimate& candidate,
                  const DivergenceEstimate& baseline) {
  if (candidate.question_id != baseline.question_id) {
    throw QuestionMismatchError("delta: comparing " + candidate.question_id +
                                " against " + baseline.question_id);
  }
  DeltaReport report;
  report.question_id = candidate.question_id;
  report.condition = candidate.condition;
  report.delta = candidate.point - baseline.point;
  report.significant = candidate.ci_high < baseline.ci_low ||
                       baseline.ci_high < candidate.ci_low;
  return report;
}

namespace {

std::optional<Distribution> distribution_from_raw(const std::vector<int>& raw_values,
                                                  const Question& question) {
  const int n = question.option_count();
  std::vector<long> counts(static_cast<std::size_t>(n), 0);
  long valid = 0;
  for (int value : raw_values) {
    if (value < 1 || value > n) {
      continue;
    }
    ++counts[static_cast<std::size_t>(value - 1)];
    ++valid;
  }
  if (valid == 0) {
    return std::nullopt;
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

}  // namespace

std::vector<StratumReport> stratify(const std::vector<ResponseRecord>& records,
                                    const std::vector<RespondentProfile>& profiles,
                                    const HumanDataset& human, const std::string& axis,
                                    const Question& question,
                                    const BootstrapConfig& config,
                                    const Codebook* codebook) {
  config.validate();
  const DemographicVariable* variable =
      codebook != nullptr ? codebook->find_variable(axis) : nullptr;
  if (codebook != nullptr) {
    if (variable == nullptr) {
      throw MissingColumnError("stratify: axis " + axis + " not in codebook");
    }
    if (variable->numeric) {
      throw Error("stratify: numeric axis " + axis + " is not stratifiable");
    }
  }
  const auto axis_column = human.columns.find(axis);
  if (axis_column == human.columns.end()) {
    throw MissingColumnError("stratify: axis " + axis + " not in human dataset");
  }

  std::map<long, int> level_by_respondent;
  std::set<int> level_codes;
  for (const auto& profile : profiles) {
    const auto it = profile.assignments.find(axis);
    if (it == profile.assignments.end()) {
      throw MissingAssignmentError("stratify: profile " + std::to_string(profile.index) +
                                   " has no assignment for axis " + axis);
    }
    level_by_respondent[profile.index] = it->second;
    level_codes.insert(it->second);
  }
  if (variable != nullptr) {
    for (const auto& level : variable->levels) {
      level_codes.insert(level.code);
    }
  }

  const auto question_column = human.columns.find(question.id);
  if (question_column == human.columns.end()) {
    throw MissingColumnError("stratify: question " + question.id +
                             " not in human dataset");
  }

  std::set<ConditionId> conditions;
  for (const auto& record : records) {
    conditions.insert(record.condition);
  }

  std::vector<StratumReport> reports;
  long total_human = 0;

  for (int level_code : level_codes) {
    StratumReport report;
    report.axis = axis;
    report.level_code = level_code;
    const CategoryLevel* level =
        variable != nullptr ? variable->find_level(level_code) : nullptr;
    report.stratum =
        level != nullptr ? level->label : "level " + std::to_string(level_code);

    std::vector<int> human_answers;
    for (std::size_t row = 0; row < axis_column->second.size(); ++row) {
      if (axis_column->second[row] == level_code) {
        human_answers.push_back(question_column->second[row]);
      }
    }
    report.human_count = static_cast<long>(human_answers.size());
    total_human += report.human_count;

    const auto human_distribution = distribution_from_raw(human_answers, question);
    if (!human_distribution) {
      report.empty = true;
      reports.push_back(std::move(report));
      continue;
    }

    std::map<ConditionId, std::vector<ResponseRecord>> by_condition;
    for (const auto& record : records) {
      const auto it = level_by_respondent.find(record.respondent_index);
      if (it != level_by_respondent.end() && it->second == level_code) {
        by_condition[record.condition].push_back(record);
      }
    }

    const std::string salt = axis + ":" + std::to_string(level_code);
    std::optional<DivergenceEstimate> baseline;
    bool any_estimate = false;
    for (ConditionId condition : conditions) {
      StratumCell cell;
      cell.condition = condition;
      const auto records_it = by_condition.find(condition);
      if (records_it != by_condition.end()) {
        try {
          cell.estimate =
              bootstrap_jsd(*human_distribution, records_it->second, question, config, salt);
          any_estimate = true;
          if (condition == ConditionId::kReplicate) {
            baseline = cell.estimate;
          }
        } catch (const NoParsedResponsesError&) {
          // Empty stratum for this condition; reported, not fatal.
        }
      }
      report.cells.push_back(std::move(cell));
    }
    if (baseline) {
      for (auto& cell : report.cells) {
        if (cell.estimate && cell.condition != ConditionId::kReplicate) {
          cell.delta = delta(*cell.estimate, *baseline);
        }
      }
    }
    report.empty = !any_estimate;
    reports.push_back(std::move(report));
  }

  // Aggregated rows: mean of level deltas per condition, unweighted and
  // weighted by human level frequency.
  for (bool weighted : {false, true}) {
    StratumReport aggregate_row;
    aggregate_row.axis = axis;
    aggregate_row.stratum = "aggregated";
    aggregate_row.aggregated = true;
    aggregate_row.weighted = weighted;
    aggregate_row.human_count = total_human;

    bool any_delta = false;
    for (ConditionId condition : conditions) {
      if (condition == ConditionId::kReplicate) {
        continue;
      }
      double weight_total = 0.0;
      double delta_total = 0.0;
      long contributing = 0;
      for (const auto& report : reports) {
        if (report.aggregated) {
          continue;
        }
        for (const auto& cell : report.cells) {
          if (cell.condition == condition && cell.delta) {
            const double weight =
                weighted ? static_cast<double>(report.human_count) : 1.0;
            weight_total += weight;
            delta_total += weight * cell.delta->delta;
            ++contributing;
          }
        }
      }
      if (contributing == 0 || weight_total <= 0.0) {
        continue;
      }
      StratumCell cell;
      cell.condition = condition;
      DeltaReport mean_delta;
      mean_delta.question_id = question.id;
      mean_delta.condition = condition;
      mean_delta.delta = delta_total / weight_total;
      mean_delta.significant = false;  // significance is per-stratum only
      cell.delta = mean_delta;
      aggregate_row.cells.push_back(std::move(cell));
      any_delta = true;
    }
    aggregate_row.empty = !any_delta;
    reports.push_back(std::move(aggregate_row));
  }

  return reports;
}

}  // namespace silicon
