#pragma once

#include <optional>
#include <string>
#include <vector>

#include "silicon/backend.hpp"
#include "silicon/sampler.hpp"
#include "silicon/stats.hpp"

namespace silicon {

struct WaveConfig {
  std::string label;       // e.g. "2020"
  std::string human_data;  // CSV path
  SurveyDate survey_date;  // defaults to 2020-11-03
};

struct RunConfig {
  std::string codebook_path;
  std::vector<WaveConfig> waves;
  std::vector<std::string> question_ids;  // empty = all codebook questions
  std::vector<ConditionId> conditions = {kAllConditions.begin(), kAllConditions.end()};
  SampleSpec sample{.population_size = 5441, .master_seed = 0};
  BackendConfig backend;
  BootstrapConfig bootstrap;
  std::vector<double> temperatures;  // empty = {backend.temperature}
  std::vector<std::string> stratify_axes;
  std::vector<std::string> refusal_prefixes = default_refusal_prefixes();
  double max_failure_fraction = 0.25;
  std::string output_dir = "out";

  std::vector<double> effective_temperatures() const;
  void validate() const;
};

RunConfig load_run_config(const std::string& path);

/// Content hash over every config field; changes iff any field changes.
std::string config_digest(const RunConfig& config);

/// Per-run metadata persisted at <output_dir>/manifest.json. Timestamps are
/// informational and excluded from the digest.
class RunManifest {
 public:
  static RunManifest load_or_create(const std::string& output_dir,
                                    const std::string& digest);

  void record_stage(const std::string& stage, const std::string& key, long count);
  void set_stage_flag(const std::string& stage, const std::string& key, bool value);
  void save() const;

  const std::string& digest() const { return digest_; }

 private:
  RunManifest() = default;

  std::string path_;
  std::string digest_;
  std::string json_text_;  // current document
};

}  // namespace silicon
