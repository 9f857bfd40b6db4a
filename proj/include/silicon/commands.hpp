#pragma once

#include <optional>
#include <string>

#include "silicon/run_config.hpp"

namespace silicon {

struct RunStageSummary {
  bool complete = true;         // false when a call budget stopped the run early
  long records_written = 0;
  long failed_records = 0;      // records without a Parsed status
  long skipped_cells = 0;       // ineligible (question, condition) pairs

  double failed_fraction() const {
    return records_written == 0
               ? 0.0
               : static_cast<double>(failed_records) / records_written;
  }
};

void cmd_ingest(const RunConfig& config);
void cmd_sample(const RunConfig& config);
RunStageSummary cmd_run(const RunConfig& config,
                        std::optional<long long> budget = std::nullopt);
void cmd_eval(const RunConfig& config);
void cmd_report(const RunConfig& config);

// Artifact locations under config.output_dir, shared by stages and tests.
std::string wave_dir(const RunConfig& config, const WaveConfig& wave);
std::string temperature_tag(double temperature);
std::string records_path(const RunConfig& config, const WaveConfig& wave,
                         double temperature, const std::string& question_id,
                         ConditionId condition);
std::string skipped_path(const RunConfig& config, const WaveConfig& wave,
                         double temperature);
std::string estimates_csv_path(const RunConfig& config, const WaveConfig& wave,
                               double temperature);
std::string estimates_jsonl_path(const RunConfig& config, const WaveConfig& wave,
                                 double temperature);
std::string strata_csv_path(const RunConfig& config, const WaveConfig& wave,
                            double temperature);

}  // namespace silicon
