#include <doctest.h>

#include "silicon/prompt.hpp"
#include "testsupport.hpp"

using namespace silicon;
namespace ts = testsupport;

namespace {

RespondentProfile example_profile() {
  // white, likes to discuss, moderate, strong Republican, attends church,
  // 36, man, somewhat interested
  RespondentProfile profile;
  profile.index = 0;
  profile.assignments = {
      {"V201549x", 1}, {"V202022", 1}, {"V201200", 4}, {"V201231x", 7},
      {"V201452", 1},  {"V201507x", 36}, {"V201600", 1}, {"V202406", 2},
  };
  return profile;
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

const SurveyDate kElectionDay2020{2020, 11, 3};

}  // namespace

TEST_CASE("replicate system prompt matches the fixture sentences verbatim") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const std::string text = render_system_prompt(example_profile(), codebook,
                                                ConditionId::kReplicate, kElectionDay2020);
  CHECK(text ==
        "Today is November 3, 2020. Racially, I am white. I like to discuss politics "
        "with my family and friends. Ideologically, I am moderate. Politically, I am "
        "a strong Republican. I attend church. I am 36 years old. I am a man. I am "
        "somewhat interested in politics.");
}

TEST_CASE("reformulated system prompt is fully third person") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const std::string text = render_system_prompt(
      example_profile(), codebook, ConditionId::kReformulated, kElectionDay2020);
  CHECK(text.find("Racially, the respondent is white.") != std::string::npos);
  CHECK(text.find("The respondent is 36 years old.") != std::string::npos);
  CHECK(count_occurrences(text, "I am") == 0);
  CHECK(count_occurrences(text, " my ") == 0);
}

TEST_CASE("priming appends exactly the priming paragraph to the replicate prompt") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const std::string base = render_system_prompt(example_profile(), codebook,
                                                ConditionId::kReplicate, kElectionDay2020);
  const std::string primed = render_system_prompt(
      example_profile(), codebook, ConditionId::kPriming, kElectionDay2020);
  CHECK(primed == base + " " + codebook.priming_text);
  CHECK(primed.find("You value logic, objectivity, and internal consistency") !=
        std::string::npos);
}

TEST_CASE("person framing invariant holds across profiles and conditions") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const HumanDataset dataset = load_human_responses(ts::kHuman2020Path, codebook, "2020");
  const MarginalSet marginals = empirical_marginals(dataset, codebook);
  const auto population = sample_population(marginals, {200, 31}, codebook);

  for (const auto& profile : population) {
    for (ConditionId condition : kAllConditions) {
      const std::string text =
          render_system_prompt(profile, codebook, condition, kElectionDay2020);
      if (condition == ConditionId::kReformulated) {
        CHECK(count_occurrences(text, "I am") == 0);
        CHECK(count_occurrences(text, " my ") == 0);
      } else {
        CHECK(count_occurrences(text, "the respondent") == 0);
        CHECK(count_occurrences(text, "The respondent") == 0);
      }
    }
  }
}

TEST_CASE("user prompt selects the condition's text and ends with the instruction") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const Question* health = codebook.find_question("V202378");
  REQUIRE(health != nullptr);

  SUBCASE("replicate") {
    const std::string text =
        render_user_prompt(*health, codebook, ConditionId::kReplicate);
    CHECK(text ==
          "Question: Do you favor an increase, decrease, or no change in government "
          "spending to help people pay for health insurance when people cannot pay "
          "for it all themselves? Answer choices: 1. Increase 2. Decrease 3. No "
          "change When answering, respond ONLY with a single number that corresponds "
          "to the option you choose. Do not include any additional text, punctuation "
          "or explanation. My answer is");
  }

  SUBCASE("reformulated uses the third-person stem") {
    const std::string text =
        render_user_prompt(*health, codebook, ConditionId::kReformulated);
    CHECK(text.find("How would this respondent assess if there should be an increase, "
                    "decrease, or no change in government spending to help people pay "
                    "for health insurance when people cannot pay for it all "
                    "themselves?") != std::string::npos);
  }

  SUBCASE("preamble is prepended verbatim") {
    const std::string text =
        render_user_prompt(*health, codebook, ConditionId::kPreamble);
    CHECK(text.rfind(codebook.preamble_text, 0) == 0);
    CHECK(text.find("There are no correct or desirable answers") != std::string::npos);
    const std::string replicate =
        render_user_prompt(*health, codebook, ConditionId::kReplicate);
    CHECK(text == codebook.preamble_text + "\n\n" + replicate);
  }

  SUBCASE("priming and replicate share identical user text") {
    CHECK(render_user_prompt(*health, codebook, ConditionId::kPriming) ==
          render_user_prompt(*health, codebook, ConditionId::kReplicate));
    CHECK(render_user_prompt(*health, codebook, ConditionId::kPreamble)
              .find(render_user_prompt(*health, codebook, ConditionId::kReplicate)) !=
          std::string::npos);
  }

  SUBCASE("reverse on an ineligible question throws") {
    const Question* guns = codebook.find_question("V202337");
    REQUIRE(guns != nullptr);
    CHECK_FALSE(guns->reverse_applicable);
    CHECK_THROWS_AS(render_user_prompt(*guns, codebook, ConditionId::kReverseCoded),
                    ReverseNotApplicableError);
  }

  SUBCASE("reformulated option labels are used when the codebook rewords them") {
    const Question* economy = codebook.find_question("V201324");
    REQUIRE(economy != nullptr);
    const std::string text =
        render_user_prompt(*economy, codebook, ConditionId::kReformulated);
    CHECK(text.find("1. Very strong 2. Strong 3. Neither strong nor weak 4. Weak "
                    "5. Very weak") != std::string::npos);
  }
}

TEST_CASE("missing assignment is reported") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  RespondentProfile incomplete = example_profile();
  incomplete.assignments.erase("V201600");
  CHECK_THROWS_AS(render_system_prompt(incomplete, codebook, ConditionId::kReplicate,
                                       kElectionDay2020),
                  MissingAssignmentError);
}

TEST_CASE("reverse-coded remap: endpoints, midpoint, involution, bijection") {
  CHECK(remap_reverse_coded(1, 5) == 5);
  CHECK(remap_reverse_coded(3, 5) == 3);
  CHECK(remap_reverse_coded(5, 5) == 1);

  for (int n = 2; n <= 9; ++n) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int k = 1; k <= n; ++k) {
      CHECK(remap_reverse_coded(remap_reverse_coded(k, n), n) == k);
      const int mapped = remap_reverse_coded(k, n);
      CHECK(mapped >= 1);
      CHECK(mapped <= n);
      seen[static_cast<std::size_t>(mapped - 1)] = true;
    }
    for (bool hit : seen) {
      CHECK(hit);
    }
  }

  CHECK_THROWS_AS(remap_reverse_coded(0, 5), OutOfRangeError);
  CHECK_THROWS_AS(remap_reverse_coded(6, 5), OutOfRangeError);
}

TEST_CASE("condition equivalence: 0, 3, 4 share the question text") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  for (const auto& question : codebook.questions) {
    const std::string base = render_user_prompt(question, codebook, ConditionId::kReplicate);
    CHECK(render_user_prompt(question, codebook, ConditionId::kPriming) == base);
    CHECK(render_user_prompt(question, codebook, ConditionId::kPreamble) ==
          codebook.preamble_text + "\n\n" + base);
  }
}

TEST_CASE("prompt bundles export to JSONL for audit and replay") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const Question* health = codebook.find_question("V202378");
  REQUIRE(health != nullptr);

  std::vector<PromptBundle> bundles;
  const RespondentProfile profile = example_profile();
  for (ConditionId condition :
       {ConditionId::kReplicate, ConditionId::kReformulated, ConditionId::kPreamble}) {
    bundles.push_back(render_bundle(profile, *health, codebook, condition,
                                    kElectionDay2020));
  }

  ts::TempDir dir;
  write_bundles(bundles, dir.file("bundles.jsonl"));
  const auto restored = read_bundles(dir.file("bundles.jsonl"));
  REQUIRE(restored.size() == bundles.size());
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    CHECK(restored[i].respondent_index == bundles[i].respondent_index);
    CHECK(restored[i].question_id == bundles[i].question_id);
    CHECK(restored[i].condition == bundles[i].condition);
    CHECK(restored[i].system_text == bundles[i].system_text);
    CHECK(restored[i].user_text == bundles[i].user_text);
  }
}

TEST_CASE("survey date renders English month names and parses ISO") {
  CHECK(SurveyDate{2020, 11, 3}.to_english() == "November 3, 2020");
  CHECK(SurveyDate{2024, 11, 5}.to_english() == "November 5, 2024");
  const SurveyDate parsed = SurveyDate::from_iso("2024-11-05");
  CHECK(parsed.year == 2024);
  CHECK(parsed.month == 11);
  CHECK(parsed.day == 5);
  CHECK_THROWS_AS(SurveyDate::from_iso("late 2024"), Error);
}
