#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "silicon/pipeline.hpp"
#include "silicon/sampler.hpp"

namespace silicon {

struct BootstrapConfig {
  int replicates = 2000;
  double confidence_level = 0.95;  // in (0, 1)
  std::uint64_t seed = 0;

  void validate() const;
};

struct DivergenceEstimate {
  std::string question_id;
  ConditionId condition = ConditionId::kReplicate;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int replicate_count = 0;
  long sample_count = 0;  // parsed silicon records behind the estimate
};

struct DeltaReport {
  std::string question_id;
  ConditionId condition = ConditionId::kReplicate;  // candidate condition
  double delta = 0.0;
  bool significant = false;  // true iff the two CIs do not overlap
};

struct StratumCell {
  ConditionId condition = ConditionId::kReplicate;
  std::optional<DivergenceEstimate> estimate;  // absent for aggregated rows
  std::optional<DeltaReport> delta;            // vs the stratum's Replicate
};

struct StratumReport {
  std::string axis;     // variable code
  std::string stratum;  // level label, or "aggregated"
  int level_code = 0;   // 0 for aggregated rows
  bool aggregated = false;
  bool weighted = false;  // aggregated mean weighted by human level frequency
  bool empty = false;     // no usable human or silicon data in this stratum
  long human_count = 0;
  std::vector<StratumCell> cells;
};

/// Base-2 KL divergence sum_x p(x) log2(p(x)/m(x)), with 0 log(0/.) = 0.
double kl_divergence(std::span<const double> p, std::span<const double> m);
double kl_divergence(const Distribution& p, const Distribution& m);

/// Base-2 Jensen-Shannon divergence; symmetric, in [0, 1], 0 iff p = q.
double js_divergence(std::span<const double> p, std::span<const double> q);
double js_divergence(const Distribution& p, const Distribution& q);

/// Linearly interpolated empirical quantile of a sorted sample.
double sorted_quantile(std::span<const double> sorted, double q);

/// Percentile-bootstrap JSD. The human distribution stays fixed; only the
/// parsed silicon records are resampled with replacement, replicate count
/// times, each replicate seeded from (seed, question, condition, salt, j).
DivergenceEstimate bootstrap_jsd(const Distribution& human,
                                 const std::vector<ResponseRecord>& silicon_records,
                                 const Question& question, const BootstrapConfig& config,
                                 std::string_view salt = {});

/// delta = candidate.point - baseline.point; significant iff CIs are disjoint.
DeltaReport delta(const DivergenceEstimate& candidate, const DivergenceEstimate& baseline);

/// Per-level estimates and deltas along one categorical axis, plus two
/// aggregated rows (unweighted and human-frequency-weighted mean of level
/// deltas). `records` spans every condition present for the question; empty
/// strata are reported, never fatal. When a codebook is supplied, it provides
/// level labels and rejects numeric axes.
std::vector<StratumReport> stratify(const std::vector<ResponseRecord>& records,
                                    const std::vector<RespondentProfile>& profiles,
                                    const HumanDataset& human, const std::string& axis,
                                    const Question& question,
                                    const BootstrapConfig& config,
                                    const Codebook* codebook = nullptr);

}  // namespace silicon
