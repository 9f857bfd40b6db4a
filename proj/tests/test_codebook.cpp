#include <doctest.h>

#include <cmath>
#include <numeric>

#include "silicon/codebook.hpp"
#include "testsupport.hpp"

using namespace silicon;
namespace ts = testsupport;

TEST_CASE("bundled codebook loads with 10 questions and 8 variables") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  CHECK(codebook.questions.size() == 10);
  CHECK(codebook.variables.size() == 8);

  int reverse_eligible = 0;
  for (const auto& question : codebook.questions) {
    if (question.reverse_applicable) {
      ++reverse_eligible;
    }
  }
  CHECK(reverse_eligible == 6);

  CHECK(codebook.priming_text.find(
            "You value logic, objectivity, and internal consistency") == 0);
  CHECK(codebook.preamble_text.find("There are no correct or desirable answers") !=
        std::string::npos);
}

TEST_CASE("codebook schema violations are rejected") {
  const std::string base = R"({
    "variables": [
      {"code": "G", "name": "gender",
       "levels": [{"code": 1, "label": "man"}, {"code": 2, "label": "woman"}],
       "first_person": ["I am a man.", "I am a woman."],
       "third_person": ["The respondent is a man.", "The respondent is a woman."]}
    ],
    "questions": [%Q%]
  })";

  ts::TempDir dir;
  SUBCASE("single-option question") {
    const std::string question = R"({
      "id": "Q1", "topic": "T", "options": ["Only"],
      "text_replicate": "r", "text_reformulated": "f"})";
    std::string doc = base;
    doc.replace(doc.find("%Q%"), 3, question);
    const auto path = ts::write_file(dir.file("cb.json"), doc);
    CHECK_THROWS_AS(load_codebook(path), SchemaError);
  }

  SUBCASE("reverse_applicable without reverse text") {
    const std::string question = R"({
      "id": "Q1", "topic": "T", "options": ["A", "B"],
      "text_replicate": "r", "text_reformulated": "f",
      "reverse_applicable": true})";
    std::string doc = base;
    doc.replace(doc.find("%Q%"), 3, question);
    const auto path = ts::write_file(dir.file("cb.json"), doc);
    CHECK_THROWS_AS(load_codebook(path), SchemaError);
  }

  SUBCASE("duplicate question ids") {
    const std::string question = R"({
      "id": "Q1", "topic": "T", "options": ["A", "B"],
      "text_replicate": "r", "text_reformulated": "f"},
      {"id": "Q1", "topic": "T", "options": ["A", "B"],
      "text_replicate": "r", "text_reformulated": "f"})";
    std::string doc = base;
    doc.replace(doc.find("%Q%"), 3, question);
    const auto path = ts::write_file(dir.file("cb.json"), doc);
    CHECK_THROWS_AS(load_codebook(path), SchemaError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_codebook(dir.file("nope.json")), IoError);
  }
}

TEST_CASE("human data loads with 5441 rows and errors are precise") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const HumanDataset dataset = load_human_responses(ts::kHuman2020Path, codebook, "2020");
  CHECK(dataset.row_count == 5441);
  CHECK(dataset.columns.at("V201549x").size() == 5441);

  ts::TempDir dir;
  SUBCASE("missing question column is named") {
    const auto path = ts::write_file(dir.file("bad.csv"), "V201549x\n1\n");
    try {
      load_human_responses(path, codebook);
      FAIL("expected MissingColumnError");
    } catch (const MissingColumnError& ex) {
      CHECK(std::string(ex.what()).find("V202022") != std::string::npos);
    }
  }

  SUBCASE("empty file is an IoError") {
    const auto path = ts::write_file(dir.file("empty.csv"), "");
    CHECK_THROWS_AS(load_human_responses(path, codebook), IoError);
  }
}

namespace {

HumanDataset dataset_with_column(const Codebook& codebook, const std::string& code,
                                 std::vector<int> values) {
  HumanDataset dataset;
  dataset.row_count = static_cast<long>(values.size());
  for (const auto& variable : codebook.variables) {
    dataset.columns[variable.code] =
        std::vector<int>(static_cast<std::size_t>(dataset.row_count), 1);
  }
  for (const auto& question : codebook.questions) {
    dataset.columns[question.id] =
        std::vector<int>(static_cast<std::size_t>(dataset.row_count), 1);
  }
  // Age column needs in-range values.
  dataset.columns["A"] =
      std::vector<int>(static_cast<std::size_t>(dataset.row_count), 40);
  dataset.columns[code] = std::move(values);
  return dataset;
}

}  // namespace

TEST_CASE("marginals: symmetry, sentinel filtering, all-missing") {
  const Codebook codebook = ts::tiny_codebook();

  SUBCASE("balanced column gives (0.5, 0.5)") {
    std::vector<int> values;
    for (int i = 0; i < 2500; ++i) values.push_back(1);
    for (int i = 0; i < 2500; ++i) values.push_back(2);
    const auto dataset = dataset_with_column(codebook, "G", values);
    const MarginalSet marginals = empirical_marginals(dataset, codebook);
    const Marginal& gender = marginals.by_variable.at("G");
    CHECK(gender.probabilities[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gender.probabilities[1] == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("sentinels are dropped") {
    const auto dataset = dataset_with_column(codebook, "G", {1, 1, 1, -9});
    const MarginalSet marginals = empirical_marginals(dataset, codebook);
    const Marginal& gender = marginals.by_variable.at("G");
    CHECK(gender.values == std::vector<int>{1});
    CHECK(gender.probabilities[0] == doctest::Approx(1.0));
  }

  SUBCASE("all-sentinel column throws AllMissing") {
    const auto dataset = dataset_with_column(codebook, "G", {-9, -8, 0, 99});
    CHECK_THROWS_AS(empirical_marginals(dataset, codebook), AllMissingError);
  }

  SUBCASE("empty dataset rejected") {
    HumanDataset dataset;
    CHECK_THROWS_AS(empirical_marginals(dataset, codebook), AllMissingError);
  }
}

TEST_CASE("bundled marginals match the independent tally oracle to 1e-12") {
  const Codebook codebook = load_codebook(ts::kCodebookPath);
  const HumanDataset dataset = load_human_responses(ts::kHuman2020Path, codebook, "2020");
  const MarginalSet marginals = empirical_marginals(dataset, codebook);

  for (const auto& variable : codebook.variables) {
    const int low = variable.numeric ? variable.numeric_min : 1;
    const int high = variable.numeric ? variable.numeric_max : variable.max_level_code();
    const auto tally = ts::oracle_tally_column(ts::kHuman2020Path, variable.code, low, high);
    long total = 0;
    for (const auto& [value, count] : tally) {
      total += count;
    }

    const Marginal& marginal = marginals.by_variable.at(variable.code);
    REQUIRE(marginal.values.size() == tally.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < marginal.values.size(); ++i) {
      const double expected =
          static_cast<double>(tally.at(marginal.values[i])) / static_cast<double>(total);
      CHECK(marginal.probabilities[i] == doctest::Approx(expected).epsilon(1e-12));
      sum += marginal.probabilities[i];
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("human distributions: point mass, uniform filtering, oracle equality") {
  const Codebook codebook = ts::tiny_codebook();
  const Question& q1 = codebook.questions[0];

  SUBCASE("all 2s on a 3-option question") {
    const auto dataset = dataset_with_column(codebook, "Q1", {2, 2, 2, 2});
    const Distribution d = human_distribution(dataset, q1);
    CHECK(d.probabilities == std::vector<double>{0.0, 1.0, 0.0});
  }

  SUBCASE("{1,2,3,-8} on 3 options is uniform") {
    const auto dataset = dataset_with_column(codebook, "Q1", {1, 2, 3, -8});
    const Distribution d = human_distribution(dataset, q1);
    for (double p : d.probabilities) {
      CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    CHECK(d.sample_count == 3);
  }

  SUBCASE("all-sentinel column throws AllMissing") {
    const auto dataset = dataset_with_column(codebook, "Q1", {0, -9, 4});
    CHECK_THROWS_AS(human_distribution(dataset, q1), AllMissingError);
  }

  SUBCASE("bundled dataset matches tally oracle") {
    const Codebook full = load_codebook(ts::kCodebookPath);
    const HumanDataset dataset = load_human_responses(ts::kHuman2020Path, full, "2020");
    for (const auto& question : full.questions) {
      const auto tally =
          ts::oracle_tally_column(ts::kHuman2020Path, question.id, 1, question.option_count());
      long total = 0;
      for (const auto& [value, count] : tally) {
        total += count;
      }
      const Distribution d = human_distribution(dataset, question);
      CHECK(d.sample_count == total);
      for (int k = 1; k <= question.option_count(); ++k) {
        const auto it = tally.find(k);
        const double expected =
            it == tally.end() ? 0.0
                              : static_cast<double>(it->second) / static_cast<double>(total);
        CHECK(d.probabilities[static_cast<std::size_t>(k - 1)] ==
              doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("marginal estimation is permutation-invariant and filtering idempotent") {
  const Codebook codebook = ts::tiny_codebook();
  std::vector<int> values = {1, 2, 2, 1, 2, -9, 1, 1, 2, 2};
  const auto forward = dataset_with_column(codebook, "G", values);
  std::vector<int> reversed(values.rbegin(), values.rend());
  const auto backward = dataset_with_column(codebook, "G", reversed);

  const auto m1 = empirical_marginals(forward, codebook);
  const auto m2 = empirical_marginals(backward, codebook);
  CHECK(m1.by_variable.at("G").probabilities == m2.by_variable.at("G").probabilities);

  // Filtering an already-filtered column changes nothing.
  std::vector<int> filtered;
  for (int v : values) {
    if (v >= 1 && v <= 2) {
      filtered.push_back(v);
    }
  }
  const auto m3 = empirical_marginals(dataset_with_column(codebook, "G", filtered), codebook);
  CHECK(m1.by_variable.at("G").probabilities == m3.by_variable.at("G").probabilities);
}
