#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "silicon/pipeline.hpp"
#include "silicon/prompt.hpp"

namespace silicon {

enum class BackendKind {
  kHttpChat,
  kMockTable,
  kMockCategorical,
};

std::string_view backend_kind_name(BackendKind kind);
BackendKind backend_kind_from_name(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::kMockCategorical;
  std::string endpoint;  // HttpChat only, full URL
  std::string model_name = "mock";
  double temperature = 0.0;  // in [0, 2]
  int max_tokens = 2;
  int max_in_flight = 4;  // >= 1
  int retry_limit = 3;
  std::chrono::milliseconds retry_backoff_base{250};
  std::chrono::milliseconds request_timeout{30000};
  std::string api_key_env = "OPENAI_API_KEY";  // empty = no auth header

  // Mock backends.
  std::string mock_table_path;
  std::uint64_t mock_seed = 0;
  // "question_id:condition" -> probability vector; absent keys fall back to
  // the uniform distribution over the question's options.
  std::map<std::string, std::vector<double>> mock_distributions;

  void validate() const;
};

struct GenerationResult {
  std::string raw_text;
  std::chrono::milliseconds latency{0};
  int attempt_count = 1;
  TransportStatus transport_status = TransportStatus::kOk;
};

/// Stateless response source: one isolated call per bundle, no conversation
/// history is ever reused. Implementations must be safe for concurrent use.
class ResponseBackend {
 public:
  virtual ~ResponseBackend() = default;
  virtual GenerationResult generate(const PromptBundle& bundle) const = 0;
};

/// The codebook is required for MockCategorical (option counts); other kinds
/// ignore it.
std::unique_ptr<ResponseBackend> make_backend(const BackendConfig& config,
                                              const Codebook* codebook = nullptr);

/// Append-only progress store, one JSON line per completed record, keyed by
/// (run id, question, condition, respondent index). Torn trailing lines from
/// an interrupted writer are ignored on load.
class CheckpointStore {
 public:
  explicit CheckpointStore(std::string path);

  std::map<long, ResponseRecord> load(const std::string& run_id,
                                      const std::string& question_id,
                                      ConditionId condition);
  void append(const std::string& run_id, const ResponseRecord& record);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
  std::ofstream out_;  // opened lazily in append mode, kept open
};

struct RunSurveyOptions {
  CheckpointStore* checkpoint = nullptr;
  std::string run_id;
  // Remaining new-call budget shared across cells; nullptr = unlimited. When
  // it runs out the survey stops cleanly and can be resumed later.
  std::atomic<long long>* budget = nullptr;
  // Overrides default_refusal_prefixes() when set.
  const std::vector<std::string>* refusal_prefixes = nullptr;
};

struct SurveyRunResult {
  std::vector<ResponseRecord> records;  // ordered by respondent index
  bool complete = false;
  long new_calls = 0;
  long restored = 0;
};

/// Queries the backend once per respondent with at most max_in_flight
/// concurrent requests. Per-respondent failures become TransportFailed
/// records and never abort the run. Records are parsed, reverse-remapped, and
/// returned in respondent order regardless of completion order.
SurveyRunResult run_survey(const std::vector<RespondentProfile>& population,
                           const Question& question, ConditionId condition,
                           const Codebook& codebook, const SurveyDate& survey_date,
                           const ResponseBackend& backend, const BackendConfig& config,
                           const RunSurveyOptions& options = {});

}  // namespace silicon
