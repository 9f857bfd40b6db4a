#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "silicon/commands.hpp"
#include "silicon/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitIoError = 2;
constexpr int kExitPartialFailure = 3;

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::vector<int> conditions;
  std::optional<double> temperature;
  std::optional<std::string> backend;
  std::optional<int> max_in_flight;
  std::optional<std::string> out;
  std::optional<long long> budget;
};

void add_common_options(CLI::App* cmd, std::string& config_path, CliOverrides& overrides) {
  cmd->add_option("--config", config_path, "Run configuration file (JSON)")
      ->required();
  cmd->add_option("--seed", overrides.seed, "Override sample.master_seed");
  cmd->add_option("--condition", overrides.conditions,
                  "Restrict to condition ids (repeatable, 0-4)");
  cmd->add_option("--temperature", overrides.temperature,
                  "Override decoding temperature (replaces any sweep)");
  cmd->add_option("--backend", overrides.backend,
                  "Override backend kind (http_chat|mock_table|mock_categorical)");
  cmd->add_option("--max-in-flight", overrides.max_in_flight,
                  "Override backend.max_in_flight");
  cmd->add_option("--out", overrides.out, "Override output directory");
}

silicon::RunConfig load_with_overrides(const std::string& config_path,
                                       const CliOverrides& overrides) {
  silicon::RunConfig config = silicon::load_run_config(config_path);
  if (overrides.seed) {
    config.sample.master_seed = *overrides.seed;
  }
  if (!overrides.conditions.empty()) {
    config.conditions.clear();
    for (int value : overrides.conditions) {
      config.conditions.push_back(silicon::condition_from_int(value));
    }
  }
  if (overrides.temperature) {
    config.backend.temperature = *overrides.temperature;
    config.temperatures = {*overrides.temperature};
  }
  if (overrides.backend) {
    config.backend.kind = silicon::backend_kind_from_name(*overrides.backend);
  }
  if (overrides.max_in_flight) {
    config.backend.max_in_flight = *overrides.max_in_flight;
  }
  if (overrides.out) {
    config.output_dir = *overrides.out;
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Silicon survey simulation and bias evaluation toolkit"};
  app.set_version_flag("--version", silicon::kToolkitVersion);
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides overrides;

  CLI::App* ingest = app.add_subcommand(
      "ingest", "Compute empirical marginals and human answer distributions");
  CLI::App* sample =
      app.add_subcommand("sample", "Draw the silicon population from the marginals");
  CLI::App* run =
      app.add_subcommand("run", "Query the backend for every (respondent, question, "
                                "condition); resumable");
  CLI::App* eval = app.add_subcommand(
      "eval", "Bootstrap JS-divergence estimates, condition deltas, strata");
  CLI::App* report =
      app.add_subcommand("report", "Render stacked-bar charts and delta tables");
  for (CLI::App* cmd : {ingest, sample, run, eval, report}) {
    add_common_options(cmd, config_path, overrides);
  }
  run->add_option("--budget", overrides.budget,
                  "Stop after this many new backend calls (run is resumable)");

  CLI11_PARSE(app, argc, argv);

  try {
    const silicon::RunConfig config = load_with_overrides(config_path, overrides);
    if (ingest->parsed()) {
      silicon::cmd_ingest(config);
    } else if (sample->parsed()) {
      silicon::cmd_sample(config);
    } else if (run->parsed()) {
      const silicon::RunStageSummary summary = silicon::cmd_run(config, overrides.budget);
      if (!summary.complete) {
        std::cout << "run incomplete (budget reached); rerun to resume from the "
                     "checkpoint\n";
      }
      if (summary.records_written > 0 &&
          summary.failed_fraction() > config.max_failure_fraction) {
        std::cerr << "error: failed-record fraction " << summary.failed_fraction()
                  << " exceeds threshold " << config.max_failure_fraction << "\n";
        return kExitPartialFailure;
      }
    } else if (eval->parsed()) {
      silicon::cmd_eval(config);
    } else if (report->parsed()) {
      silicon::cmd_report(config);
    }
    return kExitOk;
  } catch (const silicon::SchemaError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfigError;
  } catch (const silicon::ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfigError;
  } catch (const silicon::MissingColumnError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitIoError;
  } catch (const silicon::IoError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfigError;
  }
}
