#include "silicon/sampler.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "silicon/hash.hpp"

namespace silicon {

using nlohmann::json;

std::uint64_t derive_sub_seed(std::uint64_t master_seed, long respondent_index,
                              const std::string& variable_code) {
  return SeedChain(master_seed)
      .mix(static_cast<std::uint64_t>(respondent_index))
      .mix(variable_code)
      .value();
}

int sample_marginal(const Marginal& marginal, std::uint64_t sub_seed) {
  double total = 0.0;
  for (double p : marginal.probabilities) {
    total += p;
  }
  if (!(total > 0.0)) {
    throw EmptyMarginalError("sample_marginal: all-zero probability vector");
  }

  SplitMix64 rng(sub_seed);
  const double u = rng.next_double() * total;
  double cumulative = 0.0;
  int last_positive = -1;
  for (std::size_t k = 0; k < marginal.values.size(); ++k) {
    const double p = marginal.probabilities[k];
    if (p > 0.0) {
      last_positive = static_cast<int>(k);
    }
    cumulative += p;
    if (u < cumulative && p > 0.0) {
      return marginal.values[k];
    }
  }
  // Rounding can leave u just above the final cumulative sum.
  return marginal.values[static_cast<std::size_t>(last_positive)];
}

std::vector<RespondentProfile> sample_population(const MarginalSet& marginals,
                                                 const SampleSpec& spec,
                                                 const Codebook& codebook) {
  if (spec.population_size < 1) {
    throw Error("sample_population: population_size must be >= 1");
  }
  for (const auto& variable : codebook.variables) {
    if (!marginals.by_variable.count(variable.code)) {
      throw EmptyMarginalError("sample_population: no marginal for variable " +
                               variable.code);
    }
  }

  std::vector<RespondentProfile> population;
  population.reserve(static_cast<std::size_t>(spec.population_size));
  for (long i = 0; i < spec.population_size; ++i) {
    RespondentProfile profile;
    profile.index = i;
    for (const auto& variable : codebook.variables) {
      const Marginal& marginal = marginals.by_variable.at(variable.code);
      const std::uint64_t sub_seed = derive_sub_seed(spec.master_seed, i, variable.code);
      profile.assignments[variable.code] = sample_marginal(marginal, sub_seed);
    }
    population.push_back(std::move(profile));
  }
  return population;
}

void write_profiles(const std::vector<RespondentProfile>& profiles,
                    const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write profiles file: " + path);
  }
  for (const auto& profile : profiles) {
    json line;
    line["index"] = profile.index;
    line["assignments"] = profile.assignments;
    out << line.dump() << '\n';
  }
}

std::vector<RespondentProfile> read_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open profiles file: " + path);
  }
  std::vector<RespondentProfile> profiles;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const json node = json::parse(line);
    RespondentProfile profile;
    profile.index = node.at("index").get<long>();
    for (const auto& [code, value] : node.at("assignments").items()) {
      profile.assignments[code] = value.get<int>();
    }
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

}  // namespace silicon
