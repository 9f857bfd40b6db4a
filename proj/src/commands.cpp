#include "silicon/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "silicon/report.hpp"

namespace silicon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string format_double(double value, const char* spec = "%.10g") {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

std::vector<const Question*> selected_questions(const RunConfig& config,
                                                const Codebook& codebook) {
  std::vector<const Question*> questions;
  if (config.question_ids.empty()) {
    for (const auto& question : codebook.questions) {
      questions.push_back(&question);
    }
    return questions;
  }
  for (const auto& id : config.question_ids) {
    const Question* question = codebook.find_question(id);
    if (question == nullptr) {
      throw ConfigError("run config: unknown question id " + id);
    }
    questions.push_back(question);
  }
  return questions;
}

void write_text_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << content;
}

json distribution_to_json(const Distribution& distribution, long dropped) {
  return json{{"question_id", distribution.question_id},
              {"probabilities", distribution.probabilities},
              {"sample_count", distribution.sample_count},
              {"dropped", dropped}};
}

json tally_to_json(const FailureTally& tally) {
  return json{{"refusal", tally.refusal},
              {"out_of_range", tally.out_of_range},
              {"malformed", tally.malformed},
              {"transport_failed", tally.transport_failed}};
}

std::string marginals_path(const RunConfig& config, const WaveConfig& wave) {
  return (fs::path(wave_dir(config, wave)) / "marginals.json").string();
}

std::string human_distributions_path(const RunConfig& config, const WaveConfig& wave) {
  return (fs::path(wave_dir(config, wave)) / "human_distributions.json").string();
}

std::string profiles_path(const RunConfig& config, const WaveConfig& wave) {
  return (fs::path(wave_dir(config, wave)) / "profiles.jsonl").string();
}

std::string checkpoint_path(const RunConfig& config, const WaveConfig& wave) {
  return (fs::path(wave_dir(config, wave)) / "checkpoint.jsonl").string();
}

MarginalSet read_marginals(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open marginals file (run `ingest` first): " + path);
  }
  json doc;
  in >> doc;
  MarginalSet marginals;
  for (const auto& [code, node] : doc.items()) {
    Marginal marginal;
    marginal.numeric = node.at("numeric").get<bool>();
    marginal.values = node.at("values").get<std::vector<int>>();
    marginal.probabilities = node.at("probabilities").get<std::vector<double>>();
    marginals.by_variable[code] = std::move(marginal);
  }
  return marginals;
}

}  // namespace

std::string wave_dir(const RunConfig& config, const WaveConfig& wave) {
  return (fs::path(config.output_dir) / wave.label).string();
}

std::string temperature_tag(double temperature) {
  return "t" + format_double(temperature, "%g");
}

std::string records_path(const RunConfig& config, const WaveConfig& wave,
                         double temperature, const std::string& question_id,
                         ConditionId condition) {
  return (fs::path(wave_dir(config, wave)) / "records" / temperature_tag(temperature) /
          (question_id + "_c" + std::to_string(static_cast<int>(condition)) + ".jsonl"))
      .string();
}

std::string skipped_path(const RunConfig& config, const WaveConfig& wave,
                         double temperature) {
  return (fs::path(wave_dir(config, wave)) / "records" / temperature_tag(temperature) /
          "skipped.jsonl")
      .string();
}

std::string estimates_csv_path(const RunConfig& config, const WaveConfig& wave,
                               double temperature) {
  return (fs::path(wave_dir(config, wave)) / "eval" / temperature_tag(temperature) /
          "estimates.csv")
      .string();
}

std::string estimates_jsonl_path(const RunConfig& config, const WaveConfig& wave,
                                 double temperature) {
  return (fs::path(wave_dir(config, wave)) / "eval" / temperature_tag(temperature) /
          "estimates.jsonl")
      .string();
}

std::string strata_csv_path(const RunConfig& config, const WaveConfig& wave,
                            double temperature) {
  return (fs::path(wave_dir(config, wave)) / "eval" / temperature_tag(temperature) /
          "strata.csv")
      .string();
}

void cmd_ingest(const RunConfig& config) {
  config.validate();
  const Codebook codebook = load_codebook(config.codebook_path);
  RunManifest manifest =
      RunManifest::load_or_create(config.output_dir, config_digest(config));

  for (const auto& wave : config.waves) {
    const HumanDataset dataset =
        load_human_responses(wave.human_data, codebook, wave.label);
    if (dataset.row_count == 0) {
      throw IoError("ingest: " + wave.human_data + " has no data rows");
    }

    const MarginalSet marginals = empirical_marginals(dataset, codebook);
    json marginals_doc = json::object();
    for (const auto& [code, marginal] : marginals.by_variable) {
      marginals_doc[code] = {{"numeric", marginal.numeric},
                             {"values", marginal.values},
                             {"probabilities", marginal.probabilities}};
    }
    write_text_file(marginals_path(config, wave), marginals_doc.dump(2) + "\n");

    json distributions_doc = json::object();
    for (const auto& question : codebook.questions) {
      const Distribution distribution = human_distribution(dataset, question);
      distributions_doc[question.id] = distribution_to_json(
          distribution, dataset.row_count - distribution.sample_count);
    }
    write_text_file(human_distributions_path(config, wave),
                    distributions_doc.dump(2) + "\n");

    manifest.record_stage("ingest", wave.label + ".rows", dataset.row_count);
    manifest.record_stage("ingest", wave.label + ".variables",
                          static_cast<long>(codebook.variables.size()));
    manifest.record_stage("ingest", wave.label + ".questions",
                          static_cast<long>(codebook.questions.size()));
  }
  manifest.save();
}

void cmd_sample(const RunConfig& config) {
  config.validate();
  const Codebook codebook = load_codebook(config.codebook_path);
  RunManifest manifest =
      RunManifest::load_or_create(config.output_dir, config_digest(config));

  for (const auto& wave : config.waves) {
    const MarginalSet marginals = read_marginals(marginals_path(config, wave));
    const std::vector<RespondentProfile> population =
        sample_population(marginals, config.sample, codebook);
    write_profiles(population, profiles_path(config, wave));
    manifest.record_stage("sample", wave.label + ".profiles",
                          static_cast<long>(population.size()));
  }
  manifest.save();
}

RunStageSummary cmd_run(const RunConfig& config, std::optional<long long> budget) {
  config.validate();
  const Codebook codebook = load_codebook(config.codebook_path);
  RunManifest manifest =
      RunManifest::load_or_create(config.output_dir, config_digest(config));
  const std::string digest = config_digest(config);

  RunStageSummary summary;
  std::atomic<long long> budget_counter{budget.value_or(0)};

  for (const auto& wave : config.waves) {
    const std::vector<RespondentProfile> population =
        read_profiles(profiles_path(config, wave));
    if (population.empty()) {
      throw IoError("run: no profiles for wave " + wave.label + " (run `sample` first)");
    }
    CheckpointStore checkpoint(checkpoint_path(config, wave));

    for (double temperature : config.effective_temperatures()) {
      BackendConfig backend_config = config.backend;
      backend_config.temperature = temperature;
      const auto backend = make_backend(backend_config, &codebook);

      std::vector<json> skip_notices;
      for (const Question* question : selected_questions(config, codebook)) {
        for (ConditionId condition : config.conditions) {
          if (condition == ConditionId::kReverseCoded && !question->reverse_applicable) {
            skip_notices.push_back(json{{"question_id", question->id},
                                        {"condition", static_cast<int>(condition)},
                                        {"reason", "reverse_not_applicable"}});
            std::cout << "skip: question " << question->id
                      << " condition 2 (reverse-coding not applicable)\n";
            ++summary.skipped_cells;
            continue;
          }
          if (budget.has_value() && budget_counter.load() <= 0) {
            summary.complete = false;
            continue;
          }

          RunSurveyOptions options;
          options.checkpoint = &checkpoint;
          options.run_id = digest + ":" + wave.label + ":" + temperature_tag(temperature);
          options.budget = budget.has_value() ? &budget_counter : nullptr;
          options.refusal_prefixes = &config.refusal_prefixes;

          const SurveyRunResult result =
              run_survey(population, *question, condition, codebook, wave.survey_date,
                         *backend, backend_config, options);
          if (!result.complete) {
            summary.complete = false;
            continue;  // resumable from the checkpoint
          }
          write_records(result.records,
                        records_path(config, wave, temperature, question->id, condition));
          summary.records_written += static_cast<long>(result.records.size());
          for (const auto& record : result.records) {
            if (record.status != ResponseStatus::kParsed) {
              ++summary.failed_records;
            }
          }
        }
      }

      std::string skipped_text;
      for (const auto& notice : skip_notices) {
        skipped_text += notice.dump() + "\n";
      }
      write_text_file(skipped_path(config, wave, temperature), skipped_text);
    }
  }

  manifest.record_stage("run", "records_written", summary.records_written);
  manifest.record_stage("run", "failed_records", summary.failed_records);
  manifest.record_stage("run", "skipped_cells", summary.skipped_cells);
  manifest.set_stage_flag("run", "complete", summary.complete);
  manifest.save();
  return summary;
}

void cmd_eval(const RunConfig& config) {
  config.validate();
  const Codebook codebook = load_codebook(config.codebook_path);
  RunManifest manifest =
      RunManifest::load_or_create(config.output_dir, config_digest(config));

  for (const auto& wave : config.waves) {
    const HumanDataset dataset =
        load_human_responses(wave.human_data, codebook, wave.label);
    std::vector<RespondentProfile> profiles;
    if (!config.stratify_axes.empty()) {
      profiles = read_profiles(profiles_path(config, wave));
    }

    // temperature -> condition -> mean point JSD across questions
    std::map<double, std::map<ConditionId, std::pair<double, long>>> sweep;

    for (double temperature : config.effective_temperatures()) {
      std::vector<EvalCell> cells;
      std::string notes;
      std::map<std::string, DivergenceEstimate> baselines;

      for (const Question* question : selected_questions(config, codebook)) {
        const Distribution human = human_distribution(dataset, *question);

        for (ConditionId condition : config.conditions) {
          const std::string path =
              records_path(config, wave, temperature, question->id, condition);
          if (!fs::exists(path)) {
            continue;  // skipped or not yet run
          }
          const std::vector<ResponseRecord> records = read_records(path);
          EvalCell cell;
          cell.question_id = question->id;
          cell.topic = question->topic;
          cell.condition = condition;
          cell.human_probabilities = human.probabilities;
          try {
            const Distribution silicon = aggregate(records, *question, &cell.failures);
            cell.silicon_probabilities = silicon.probabilities;
            cell.estimate =
                bootstrap_jsd(human, records, *question, config.bootstrap,
                              wave.label + ":" + temperature_tag(temperature));
          } catch (const NoParsedResponsesError&) {
            notes += json{{"question_id", question->id},
                          {"condition", static_cast<int>(condition)},
                          {"note", "no_parsed_responses"}}
                         .dump() +
                     "\n";
            std::cout << "eval: question " << question->id << " condition "
                      << static_cast<int>(condition) << ": no parsed responses\n";
            continue;
          }
          if (condition == ConditionId::kReplicate) {
            baselines[question->id] = cell.estimate;
          }
          cells.push_back(std::move(cell));
        }
      }

      for (auto& cell : cells) {
        if (cell.condition == ConditionId::kReplicate) {
          continue;
        }
        const auto it = baselines.find(cell.question_id);
        if (it != baselines.end()) {
          cell.delta_vs_replicate = delta(cell.estimate, it->second);
        }
      }

      // CSV with the pinned column set.
      std::string csv = "question,condition,point,ci_low,ci_high,delta,significant\n";
      std::string jsonl;
      for (const auto& cell : cells) {
        csv += cell.question_id;
        csv += ",";
        csv += condition_name(cell.condition);
        csv += "," + format_double(cell.estimate.point);
        csv += "," + format_double(cell.estimate.ci_low);
        csv += "," + format_double(cell.estimate.ci_high);
        if (cell.delta_vs_replicate) {
          csv += "," + format_double(cell.delta_vs_replicate->delta);
          csv += cell.delta_vs_replicate->significant ? ",true" : ",false";
        } else {
          csv += ",,";
        }
        csv += "\n";

        json line;
        line["question_id"] = cell.question_id;
        line["topic"] = cell.topic;
        line["condition"] = static_cast<int>(cell.condition);
        line["point"] = cell.estimate.point;
        line["ci_low"] = cell.estimate.ci_low;
        line["ci_high"] = cell.estimate.ci_high;
        line["replicate_count"] = cell.estimate.replicate_count;
        line["sample_count"] = cell.estimate.sample_count;
        line["human"] = cell.human_probabilities;
        line["silicon"] = cell.silicon_probabilities;
        line["failure_tally"] = tally_to_json(cell.failures);
        if (cell.delta_vs_replicate) {
          line["delta"] = cell.delta_vs_replicate->delta;
          line["significant"] = cell.delta_vs_replicate->significant;
        }
        jsonl += line.dump() + "\n";

        auto& [sum, count] = sweep[temperature][cell.condition];
        sum += cell.estimate.point;
        ++count;
      }
      write_text_file(estimates_csv_path(config, wave, temperature), csv);
      write_text_file(estimates_jsonl_path(config, wave, temperature), jsonl);
      if (!notes.empty()) {
        write_text_file((fs::path(wave_dir(config, wave)) / "eval" /
                         temperature_tag(temperature) / "notes.jsonl")
                            .string(),
                        notes);
      }

      if (!config.stratify_axes.empty()) {
        std::string strata_csv =
            "axis,stratum,aggregate_weighting,question,condition,point,ci_low,ci_high,"
            "delta,significant,human_count\n";
        for (const Question* question : selected_questions(config, codebook)) {
          std::vector<ResponseRecord> all_records;
          for (ConditionId condition : config.conditions) {
            const std::string path =
                records_path(config, wave, temperature, question->id, condition);
            if (!fs::exists(path)) {
              continue;
            }
            const auto records = read_records(path);
            all_records.insert(all_records.end(), records.begin(), records.end());
          }
          if (all_records.empty()) {
            continue;
          }
          for (const auto& axis : config.stratify_axes) {
            const auto reports = stratify(all_records, profiles, dataset, axis,
                                          *question, config.bootstrap, &codebook);
            for (const auto& report : reports) {
              const std::string weighting =
                  !report.aggregated ? "" : (report.weighted ? "human_weighted" : "unweighted");
              for (const auto& cell : report.cells) {
                strata_csv += report.axis + "," + report.stratum + "," + weighting + "," +
                              question->id + "," +
                              std::string(condition_name(cell.condition));
                if (cell.estimate) {
                  strata_csv += "," + format_double(cell.estimate->point) + "," +
                                format_double(cell.estimate->ci_low) + "," +
                                format_double(cell.estimate->ci_high);
                } else {
                  strata_csv += ",,,";
                }
                if (cell.delta) {
                  strata_csv += "," + format_double(cell.delta->delta);
                  strata_csv += cell.delta->significant ? ",true" : ",false";
                } else {
                  strata_csv += ",,";
                }
                strata_csv += "," + std::to_string(report.human_count) + "\n";
              }
            }
          }
        }
        write_text_file(strata_csv_path(config, wave, temperature), strata_csv);
      }
    }

    // Table-2-shaped sweep summary: average point JSD across questions.
    std::string sweep_csv = "temperature";
    for (ConditionId condition : config.conditions) {
      sweep_csv += ",";
      sweep_csv += condition_name(condition);
    }
    sweep_csv += "\n";
    for (const auto& [temperature, by_condition] : sweep) {
      sweep_csv += format_double(temperature, "%g");
      for (ConditionId condition : config.conditions) {
        const auto it = by_condition.find(condition);
        if (it == by_condition.end() || it->second.second == 0) {
          sweep_csv += ",";
        } else {
          sweep_csv +=
              "," + format_double(it->second.first / it->second.second, "%.4f");
        }
      }
      sweep_csv += "\n";
    }
    write_text_file(
        (fs::path(wave_dir(config, wave)) / "eval" / "temperature_summary.csv").string(),
        sweep_csv);

    manifest.record_stage("eval", wave.label + ".temperatures",
                          static_cast<long>(config.effective_temperatures().size()));
  }
  manifest.save();
}

void cmd_report(const RunConfig& config) {
  config.validate();
  const Codebook codebook = load_codebook(config.codebook_path);
  RunManifest manifest =
      RunManifest::load_or_create(config.output_dir, config_digest(config));

  for (const auto& wave : config.waves) {
    for (double temperature : config.effective_temperatures()) {
      const std::string path = estimates_jsonl_path(config, wave, temperature);
      std::ifstream in(path);
      if (!in) {
        throw IoError("report: missing eval output (run `eval` first): " + path);
      }
      std::map<std::string, std::vector<EvalCell>> cells_by_question;
      std::vector<EvalCell> all_cells;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) {
          continue;
        }
        const json node = json::parse(line);
        EvalCell cell;
        cell.question_id = node.at("question_id").get<std::string>();
        cell.topic = node.at("topic").get<std::string>();
        cell.condition = condition_from_int(node.at("condition").get<int>());
        cell.estimate.question_id = cell.question_id;
        cell.estimate.condition = cell.condition;
        cell.estimate.point = node.at("point").get<double>();
        cell.estimate.ci_low = node.at("ci_low").get<double>();
        cell.estimate.ci_high = node.at("ci_high").get<double>();
        cell.estimate.replicate_count = node.at("replicate_count").get<int>();
        cell.estimate.sample_count = node.at("sample_count").get<long>();
        cell.human_probabilities = node.at("human").get<std::vector<double>>();
        cell.silicon_probabilities = node.at("silicon").get<std::vector<double>>();
        if (node.contains("delta")) {
          DeltaReport report;
          report.question_id = cell.question_id;
          report.condition = cell.condition;
          report.delta = node.at("delta").get<double>();
          report.significant = node.at("significant").get<bool>();
          cell.delta_vs_replicate = report;
        }
        cells_by_question[cell.question_id].push_back(cell);
        all_cells.push_back(std::move(cell));
      }

      const fs::path report_dir =
          fs::path(wave_dir(config, wave)) / "report" / temperature_tag(temperature);
      long charts = 0;
      for (const auto& [question_id, cells] : cells_by_question) {
        const Question* question = codebook.find_question(question_id);
        if (question == nullptr) {
          continue;
        }
        const std::string svg =
            render_question_chart(question->topic, question->options, cells);
        write_text_file((report_dir / (question_id + ".svg")).string(), svg);
        ++charts;
      }
      write_text_file((report_dir / "deltas.md").string(),
                      render_delta_tables(wave.label, temperature, all_cells));
      manifest.record_stage(
          "report", wave.label + "." + temperature_tag(temperature) + ".charts", charts);
    }
  }
  manifest.save();
}

}  // namespace silicon
