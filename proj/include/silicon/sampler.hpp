#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "silicon/codebook.hpp"

namespace silicon {

struct SampleSpec {
  long population_size = 0;  // >= 1
  std::uint64_t master_seed = 0;
};

struct RespondentProfile {
  long index = 0;
  std::map<std::string, int> assignments;  // variable code -> level code / age
};

/// Stable per-(respondent, variable) seed; see SeedChain for the derivation.
/// Insertion of new variables or parallel generation never perturbs existing
/// draws because each draw consumes exactly one independent stream.
std::uint64_t derive_sub_seed(std::uint64_t master_seed, long respondent_index,
                              const std::string& variable_code);

/// Inverse-CDF draw over `marginal.values` in ascending order.
int sample_marginal(const Marginal& marginal, std::uint64_t sub_seed);

/// Independent draws from the empirical marginals for every respondent.
/// Pure function of (marginals, spec): identical inputs give identical output.
std::vector<RespondentProfile> sample_population(const MarginalSet& marginals,
                                                 const SampleSpec& spec,
                                                 const Codebook& codebook);

void write_profiles(const std::vector<RespondentProfile>& profiles,
                    const std::string& path);
std::vector<RespondentProfile> read_profiles(const std::string& path);

}  // namespace silicon
