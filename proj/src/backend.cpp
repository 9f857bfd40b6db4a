#include "silicon/backend.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "silicon/hash.hpp"

namespace silicon {

using nlohmann::json;

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kHttpChat:
      return "http_chat";
    case BackendKind::kMockTable:
      return "mock_table";
    case BackendKind::kMockCategorical:
      return "mock_categorical";
  }
  throw Error("unknown backend kind");
}

BackendKind backend_kind_from_name(std::string_view name) {
  for (BackendKind kind : {BackendKind::kHttpChat, BackendKind::kMockTable,
                           BackendKind::kMockCategorical}) {
    if (backend_kind_name(kind) == name) {
      return kind;
    }
  }
  throw ConfigError("unknown backend kind: " + std::string(name));
}

void BackendConfig::validate() const {
  if (temperature < 0.0 || temperature > 2.0) {
    throw ConfigError("backend: temperature must be in [0, 2]");
  }
  if (max_in_flight < 1) {
    throw ConfigError("backend: max_in_flight must be >= 1");
  }
  if (max_tokens < 1) {
    throw ConfigError("backend: max_tokens must be >= 1");
  }
  if (retry_limit < 0) {
    throw ConfigError("backend: retry_limit must be >= 0");
  }
  if (kind == BackendKind::kHttpChat && endpoint.empty()) {
    throw ConfigError("backend: http_chat requires an endpoint URL");
  }
  if (kind == BackendKind::kMockTable && mock_table_path.empty()) {
    throw ConfigError("backend: mock_table requires mock_table_path");
  }
}

namespace {

std::string mock_distribution_key(const std::string& question_id, ConditionId condition) {
  return question_id + ":" + std::to_string(static_cast<int>(condition));
}

class MockCategoricalBackend : public ResponseBackend {
 public:
  MockCategoricalBackend(const BackendConfig& config, const Codebook& codebook)
      : seed_(config.mock_seed), distributions_(config.mock_distributions) {
    for (const auto& question : codebook.questions) {
      option_counts_[question.id] = question.option_count();
    }
    for (const auto& [key, probabilities] : distributions_) {
      double total = 0.0;
      for (double p : probabilities) {
        if (p < 0.0) {
          throw ConfigError("mock_categorical: negative probability for " + key);
        }
        total += p;
      }
      if (!(total > 0.0)) {
        throw ConfigError("mock_categorical: all-zero distribution for " + key);
      }
    }
  }

  GenerationResult generate(const PromptBundle& bundle) const override {
    const auto count_it = option_counts_.find(bundle.question_id);
    if (count_it == option_counts_.end()) {
      throw ConfigError("mock_categorical: unknown question " + bundle.question_id);
    }
    const int n = count_it->second;

    const auto dist_it =
        distributions_.find(mock_distribution_key(bundle.question_id, bundle.condition));
    std::vector<double> probabilities;
    if (dist_it != distributions_.end()) {
      probabilities = dist_it->second;
      if (static_cast<int>(probabilities.size()) != n) {
        throw ConfigError("mock_categorical: distribution size mismatch for " +
                          bundle.question_id);
      }
    } else {
      probabilities.assign(static_cast<std::size_t>(n), 1.0 / n);
    }

    const std::uint64_t sub_seed =
        SeedChain(seed_)
            .mix(static_cast<std::uint64_t>(bundle.respondent_index))
            .mix(bundle.question_id)
            .mix(static_cast<std::uint64_t>(bundle.condition))
            .value();
    SplitMix64 rng(sub_seed);
    double total = 0.0;
    for (double p : probabilities) {
      total += p;
    }
    const double u = rng.next_double() * total;
    double cumulative = 0.0;
    int drawn = n;
    for (int k = 0; k < n; ++k) {
      cumulative += probabilities[static_cast<std::size_t>(k)];
      if (u < cumulative && probabilities[static_cast<std::size_t>(k)] > 0.0) {
        drawn = k + 1;
        break;
      }
    }
    if (drawn > n) {
      for (int k = n; k >= 1; --k) {
        if (probabilities[static_cast<std::size_t>(k - 1)] > 0.0) {
          drawn = k;
          break;
        }
      }
    }

    GenerationResult result;
    result.raw_text = std::to_string(drawn);
    return result;
  }

 private:
  std::uint64_t seed_;
  std::map<std::string, std::vector<double>> distributions_;
  std::map<std::string, int> option_counts_;
};

class MockTableBackend : public ResponseBackend {
 public:
  explicit MockTableBackend(const BackendConfig& config) {
    std::ifstream in(config.mock_table_path);
    if (!in) {
      throw ConfigError("mock_table: cannot open fixture " + config.mock_table_path);
    }
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) {
        continue;
      }
      json node;
      try {
        node = json::parse(line);
      } catch (const json::exception& ex) {
        throw ConfigError("mock_table: fixture line " + std::to_string(line_number) +
                          ": " + ex.what());
      }
      const std::string key = entry_key(node.at("question_id").get<std::string>(),
                                        node.at("condition").get<int>(),
                                        node.at("respondent_index").get<long>());
      table_[key] = node.at("text").get<std::string>();
    }
  }

  GenerationResult generate(const PromptBundle& bundle) const override {
    const auto it = table_.find(entry_key(bundle.question_id,
                                          static_cast<int>(bundle.condition),
                                          bundle.respondent_index));
    if (it == table_.end()) {
      throw ConfigError("mock_table: no fixture entry for question " +
                        bundle.question_id + " condition " +
                        std::to_string(static_cast<int>(bundle.condition)) +
                        " respondent " + std::to_string(bundle.respondent_index));
    }
    GenerationResult result;
    result.raw_text = it->second;
    return result;
  }

 private:
  static std::string entry_key(const std::string& question_id, int condition,
                               long respondent) {
    return question_id + ":" + std::to_string(condition) + ":" +
           std::to_string(respondent);
  }

  std::map<std::string, std::string> table_;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("http_chat: endpoint must be a full URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpChatBackend : public ResponseBackend {
 public:
  explicit HttpChatBackend(const BackendConfig& config) : config_(config) {
    if (!config.api_key_env.empty()) {
      const char* key = std::getenv(config.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw ConfigError("http_chat: environment variable " + config.api_key_env +
                          " is not set");
      }
      api_key_ = key;
    }
    url_ = split_url(config.endpoint);
  }

  GenerationResult generate(const PromptBundle& bundle) const override {
    json body;
    body["model"] = config_.model_name;
    body["messages"] = json::array({
        json{{"role", "system"}, {"content", bundle.system_text}},
        json{{"role", "user"}, {"content", bundle.user_text}},
    });
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_tokens;
    const std::string payload = body.dump();

    GenerationResult result;
    const auto start = std::chrono::steady_clock::now();

    for (int attempt = 0; attempt <= config_.retry_limit; ++attempt) {
      result.attempt_count = attempt + 1;
      if (attempt > 0) {
        std::this_thread::sleep_for(config_.retry_backoff_base * (1LL << (attempt - 1)));
      }

      httplib::Client client(url_.origin);
      const auto timeout =
          std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
      client.set_connection_timeout(timeout.count(),
                                    (config_.request_timeout.count() % 1000) * 1000);
      client.set_read_timeout(timeout.count(),
                              (config_.request_timeout.count() % 1000) * 1000);
      httplib::Headers headers;
      if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
      }

      auto response = client.Post(url_.path, headers, payload, "application/json");
      if (!response) {
        result.transport_status = classify_transport_error(response.error());
        continue;
      }
      if (response->status == 429) {
        result.transport_status = TransportStatus::kRateLimited;
        continue;
      }
      if (response->status == 408) {
        result.transport_status = TransportStatus::kTimeout;
        continue;
      }
      if (response->status >= 500) {
        result.transport_status = TransportStatus::kServerError;
        continue;
      }
      if (response->status >= 400) {
        // Not retryable; surfaces as a permanent per-respondent failure.
        result.transport_status = TransportStatus::kExhausted;
        result.raw_text.clear();
        result.latency = elapsed_since(start);
        return result;
      }

      result.raw_text = extract_content(response->body);
      result.transport_status = TransportStatus::kOk;
      result.latency = elapsed_since(start);
      return result;
    }

    result.transport_status = TransportStatus::kExhausted;
    result.latency = elapsed_since(start);
    return result;
  }

 private:
  static std::chrono::milliseconds elapsed_since(
      std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
  }

  static TransportStatus classify_transport_error(httplib::Error error) {
    switch (error) {
      case httplib::Error::ConnectionTimeout:
      case httplib::Error::Read:
      case httplib::Error::Write:
        return TransportStatus::kTimeout;
      default:
        return TransportStatus::kServerError;
    }
  }

  static std::string extract_content(const std::string& body) {
    try {
      const json node = json::parse(body);
      return node.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("http_chat: malformed completion response: ") +
                        ex.what());
    }
  }

  BackendConfig config_;
  std::string api_key_;
  ParsedUrl url_;
};

}  // namespace

std::unique_ptr<ResponseBackend> make_backend(const BackendConfig& config,
                                              const Codebook* codebook) {
  config.validate();
  switch (config.kind) {
    case BackendKind::kHttpChat:
      return std::make_unique<HttpChatBackend>(config);
    case BackendKind::kMockTable:
      return std::make_unique<MockTableBackend>(config);
    case BackendKind::kMockCategorical:
      if (codebook == nullptr) {
        throw ConfigError("mock_categorical: codebook required");
      }
      return std::make_unique<MockCategoricalBackend>(config, *codebook);
  }
  throw ConfigError("unknown backend kind");
}

CheckpointStore::CheckpointStore(std::string path) : path_(std::move(path)) {}

std::map<long, ResponseRecord> CheckpointStore::load(const std::string& run_id,
                                                     const std::string& question_id,
                                                     ConditionId condition) {
  std::map<long, ResponseRecord> restored;
  std::ifstream in(path_);
  if (!in) {
    return restored;  // nothing checkpointed yet
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    try {
      const json node = json::parse(line);
      if (node.at("run_id").get<std::string>() != run_id) {
        continue;
      }
      ResponseRecord record = record_from_json_line(node.at("record").dump());
      if (record.question_id != question_id || record.condition != condition) {
        continue;
      }
      restored[record.respondent_index] = std::move(record);
    } catch (const std::exception&) {
      // Torn or stale line; skip.
      continue;
    }
  }
  return restored;
}

void CheckpointStore::append(const std::string& run_id, const ResponseRecord& record) {
  std::lock_guard<std::mutex> guard(mutex_);
  if (!out_.is_open()) {
    out_.open(path_, std::ios::app);
    if (!out_) {
      throw IoError("cannot append to checkpoint file: " + path_);
    }
  }
  json line;
  line["run_id"] = run_id;
  line["record"] = json::parse(record_to_json_line(record));
  out_ << line.dump() << '\n';
  out_.flush();
}

SurveyRunResult run_survey(const std::vector<RespondentProfile>& population,
                           const Question& question, ConditionId condition,
                           const Codebook& codebook, const SurveyDate& survey_date,
                           const ResponseBackend& backend, const BackendConfig& config,
                           const RunSurveyOptions& options) {
  if (population.empty()) {
    throw ConfigError("run_survey: population is empty");
  }
  if (condition == ConditionId::kReverseCoded && !question.reverse_applicable) {
    throw ReverseNotApplicableError("run_survey: question " + question.id +
                                    " is not reverse-eligible");
  }
  config.validate();

  const long count = static_cast<long>(population.size());
  std::vector<std::optional<ResponseRecord>> slots(population.size());

  std::map<long, ResponseRecord> restored;
  if (options.checkpoint != nullptr) {
    restored = options.checkpoint->load(options.run_id, question.id, condition);
  }
  for (auto& [index, record] : restored) {
    if (index >= 0 && index < count) {
      slots[static_cast<std::size_t>(index)] = record;
    }
  }

  std::atomic<long> next_index{0};
  std::atomic<long> new_calls{0};
  std::mutex append_mutex;
  const std::vector<std::string> refusal_prefixes = options.refusal_prefixes != nullptr
                                                        ? *options.refusal_prefixes
                                                        : default_refusal_prefixes();

  const auto worker = [&]() {
    while (true) {
      const long i = next_index.fetch_add(1);
      if (i >= count) {
        return;
      }
      if (slots[static_cast<std::size_t>(i)].has_value()) {
        continue;  // restored from checkpoint
      }
      if (options.budget != nullptr && options.budget->fetch_sub(1) <= 0) {
        return;  // budget exhausted; remaining respondents stay pending
      }

      const RespondentProfile& profile = population[static_cast<std::size_t>(i)];
      ResponseRecord record;
      record.respondent_index = profile.index;
      record.question_id = question.id;
      record.condition = condition;
      try {
        const PromptBundle bundle =
            render_bundle(profile, question, codebook, condition, survey_date);
        const GenerationResult generation = backend.generate(bundle);
        record.raw_text = generation.raw_text;
        record.attempt_count = generation.attempt_count;
        record.transport_status = generation.transport_status;
        if (generation.transport_status == TransportStatus::kOk) {
          const ParseOutcome outcome =
              parse_answer(generation.raw_text, question.option_count(), refusal_prefixes);
          record.status = outcome.status;
          record.option_index = outcome.option_index;
          record = finalize_record(std::move(record), question);
        } else {
          record.status = ResponseStatus::kTransportFailed;
        }
      } catch (const std::exception&) {
        // Per-respondent failures are data, not errors.
        record.status = ResponseStatus::kTransportFailed;
        record.transport_status = TransportStatus::kExhausted;
      }

      new_calls.fetch_add(1);
      if (options.checkpoint != nullptr) {
        std::lock_guard<std::mutex> guard(append_mutex);
        options.checkpoint->append(options.run_id, record);
      }
      slots[static_cast<std::size_t>(i)] = std::move(record);
    }
  };

  const int thread_count =
      static_cast<int>(std::min<long>(config.max_in_flight, count));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) {
    threads.emplace_back(worker);
  }
  for (auto& thread : threads) {
    thread.join();
  }

  SurveyRunResult result;
  result.new_calls = new_calls.load();
  result.restored = static_cast<long>(restored.size());
  result.complete = true;
  for (auto& slot : slots) {
    if (!slot.has_value()) {
      result.complete = false;
      continue;
    }
    result.records.push_back(std::move(*slot));
  }
  return result;
}

}  // namespace silicon
