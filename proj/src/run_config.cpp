#include "silicon/run_config.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "silicon/hash.hpp"
#include "silicon/version.hpp"

namespace silicon {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> RunConfig::effective_temperatures() const {
  if (!temperatures.empty()) {
    return temperatures;
  }
  return {backend.temperature};
}

void RunConfig::validate() const {
  if (codebook_path.empty()) {
    throw ConfigError("run config: codebook path required");
  }
  if (waves.empty()) {
    throw ConfigError("run config: at least one wave required");
  }
  if (conditions.empty()) {
    throw ConfigError("run config: at least one condition required");
  }
  if (sample.population_size < 1) {
    throw ConfigError("run config: population_size must be >= 1");
  }
  if (output_dir.empty()) {
    throw ConfigError("run config: output_dir required");
  }
  if (max_failure_fraction < 0.0 || max_failure_fraction > 1.0) {
    throw ConfigError("run config: max_failure_fraction must be in [0, 1]");
  }
  for (double temperature : effective_temperatures()) {
    if (temperature < 0.0 || temperature > 2.0) {
      throw ConfigError("run config: temperature must be in [0, 2]");
    }
  }
  backend.validate();
  bootstrap.validate();
}

namespace {

json config_to_json(const RunConfig& config) {
  json doc;
  doc["codebook"] = config.codebook_path;
  json waves = json::array();
  for (const auto& wave : config.waves) {
    waves.push_back({{"label", wave.label},
                     {"human_data", wave.human_data},
                     {"survey_date", wave.survey_date.to_iso()}});
  }
  doc["waves"] = waves;
  doc["questions"] = config.question_ids;
  json conditions = json::array();
  for (ConditionId condition : config.conditions) {
    conditions.push_back(static_cast<int>(condition));
  }
  doc["conditions"] = conditions;
  doc["sample"] = {{"population_size", config.sample.population_size},
                   {"master_seed", config.sample.master_seed}};
  doc["backend"] = {
      {"kind", std::string(backend_kind_name(config.backend.kind))},
      {"endpoint", config.backend.endpoint},
      {"model_name", config.backend.model_name},
      {"temperature", config.backend.temperature},
      {"max_tokens", config.backend.max_tokens},
      {"max_in_flight", config.backend.max_in_flight},
      {"retry_limit", config.backend.retry_limit},
      {"retry_backoff_base_ms", config.backend.retry_backoff_base.count()},
      {"request_timeout_ms", config.backend.request_timeout.count()},
      {"api_key_env", config.backend.api_key_env},
      {"mock_table_path", config.backend.mock_table_path},
      {"mock_seed", config.backend.mock_seed},
      {"mock_distributions", config.backend.mock_distributions},
  };
  doc["bootstrap"] = {{"replicates", config.bootstrap.replicates},
                      {"confidence_level", config.bootstrap.confidence_level},
                      {"seed", config.bootstrap.seed}};
  doc["temperatures"] = config.temperatures;
  doc["stratify_axes"] = config.stratify_axes;
  doc["refusal_prefixes"] = config.refusal_prefixes;
  doc["max_failure_fraction"] = config.max_failure_fraction;
  doc["output_dir"] = config.output_dir;
  return doc;
}

std::string iso_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream input(path);
  if (!input) {
    throw IoError("cannot open run config: " + path);
  }
  json doc;
  try {
    input >> doc;
  } catch (const json::exception& ex) {
    throw ConfigError("run config: " + path + ": " + ex.what());
  }

  RunConfig config;
  config.codebook_path = doc.at("codebook").get<std::string>();
  if (!doc.contains("waves") || !doc.at("waves").is_array() || doc.at("waves").empty()) {
    throw ConfigError("run config: \"waves\" must be a non-empty array");
  }
  for (const auto& node : doc.at("waves")) {
    WaveConfig wave;
    wave.label = node.at("label").get<std::string>();
    wave.human_data = node.at("human_data").get<std::string>();
    if (node.contains("survey_date")) {
      wave.survey_date = SurveyDate::from_iso(node.at("survey_date").get<std::string>());
    }
    config.waves.push_back(std::move(wave));
  }
  if (doc.contains("questions")) {
    config.question_ids = doc.at("questions").get<std::vector<std::string>>();
  }
  if (doc.contains("conditions")) {
    config.conditions.clear();
    for (const auto& value : doc.at("conditions")) {
      config.conditions.push_back(condition_from_int(value.get<int>()));
    }
  }
  if (doc.contains("sample")) {
    const auto& node = doc.at("sample");
    config.sample.population_size = node.value("population_size", 5441L);
    config.sample.master_seed = node.value("master_seed", 0ULL);
  }
  if (doc.contains("backend")) {
    const auto& node = doc.at("backend");
    BackendConfig& backend = config.backend;
    if (node.contains("kind")) {
      backend.kind = backend_kind_from_name(node.at("kind").get<std::string>());
    }
    backend.endpoint = node.value("endpoint", backend.endpoint);
    backend.model_name = node.value("model_name", backend.model_name);
    backend.temperature = node.value("temperature", backend.temperature);
    backend.max_tokens = node.value("max_tokens", backend.max_tokens);
    backend.max_in_flight = node.value("max_in_flight", backend.max_in_flight);
    backend.retry_limit = node.value("retry_limit", backend.retry_limit);
    backend.retry_backoff_base = std::chrono::milliseconds(
        node.value("retry_backoff_base_ms", backend.retry_backoff_base.count()));
    backend.request_timeout = std::chrono::milliseconds(
        node.value("request_timeout_ms", backend.request_timeout.count()));
    backend.api_key_env = node.value("api_key_env", backend.api_key_env);
    backend.mock_table_path = node.value("mock_table_path", backend.mock_table_path);
    backend.mock_seed = node.value("mock_seed", backend.mock_seed);
    if (node.contains("mock_distributions")) {
      backend.mock_distributions =
          node.at("mock_distributions")
              .get<std::map<std::string, std::vector<double>>>();
    }
  }
  if (doc.contains("bootstrap")) {
    const auto& node = doc.at("bootstrap");
    config.bootstrap.replicates = node.value("replicates", config.bootstrap.replicates);
    config.bootstrap.confidence_level =
        node.value("confidence_level", config.bootstrap.confidence_level);
    config.bootstrap.seed = node.value("seed", config.bootstrap.seed);
  }
  if (doc.contains("temperatures")) {
    config.temperatures = doc.at("temperatures").get<std::vector<double>>();
  }
  if (doc.contains("stratify_axes")) {
    config.stratify_axes = doc.at("stratify_axes").get<std::vector<std::string>>();
  }
  if (doc.contains("refusal_prefixes")) {
    config.refusal_prefixes = doc.at("refusal_prefixes").get<std::vector<std::string>>();
  }
  config.max_failure_fraction =
      doc.value("max_failure_fraction", config.max_failure_fraction);
  config.output_dir = doc.value("output_dir", config.output_dir);

  config.validate();
  return config;
}

std::string config_digest(const RunConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  const std::uint64_t hash = fnv1a64(canonical);
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

RunManifest RunManifest::load_or_create(const std::string& output_dir,
                                        const std::string& digest) {
  RunManifest manifest;
  manifest.path_ = (fs::path(output_dir) / "manifest.json").string();
  manifest.digest_ = digest;

  json doc;
  std::ifstream input(manifest.path_);
  if (input) {
    try {
      input >> doc;
    } catch (const json::exception&) {
      doc = json::object();
    }
  }
  if (!doc.is_object() || doc.value("config_digest", "") != digest) {
    // New or different configuration: start a fresh manifest.
    doc = json::object();
    doc["config_digest"] = digest;
    doc["toolkit_version"] = kToolkitVersion;
    doc["timestamps"] = json::object();
    doc["stages"] = json::object();
  }
  doc["timestamps"]["updated"] = iso_timestamp_now();
  manifest.json_text_ = doc.dump();
  return manifest;
}

void RunManifest::record_stage(const std::string& stage, const std::string& key,
                               long count) {
  json doc = json::parse(json_text_);
  doc["stages"][stage][key] = count;
  doc["timestamps"][stage] = iso_timestamp_now();
  json_text_ = doc.dump();
}

void RunManifest::set_stage_flag(const std::string& stage, const std::string& key,
                                 bool value) {
  json doc = json::parse(json_text_);
  doc["stages"][stage][key] = value;
  doc["timestamps"][stage] = iso_timestamp_now();
  json_text_ = doc.dump();
}

void RunManifest::save() const {
  fs::create_directories(fs::path(path_).parent_path());
  std::ofstream out(path_);
  if (!out) {
    throw IoError("cannot write manifest: " + path_);
  }
  json doc = json::parse(json_text_);
  out << doc.dump(2) << '\n';
}

}  // namespace silicon
