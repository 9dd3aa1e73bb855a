// Copyright 2026 The FinTeam Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "finteam/agents.hpp"
#include "finteam/error.hpp"
#include "finteam/eval.hpp"
#include "oracles.hpp"

using namespace finteam;
namespace fs = std::filesystem;

namespace {

fs::path prompts_dir() {
  fs::path candidates[] = {"prompts", "../prompts", "../../prompts"};
  for (const auto& c : candidates) {
    if (fs::is_directory(c)) return c;
  }
  return fs::path(FINTEAM_PROMPTS_DIR);
}

const PromptLibrary& prompts() {
  static PromptLibrary library(prompts_dir());
  return library;
}

}  // namespace

TEST_CASE("judge parses a strict score object") {
  ScriptedBackend backend({{"", R"({"accuracy":5,"thoroughness":4,"clarity":5,)"
                               R"("professionalism":5,"overall":4.8})"}});
  auto score = judge_score("q", "r", backend, prompts());
  CHECK(score.accuracy == 5);
  CHECK(score.thoroughness == 4);
  CHECK(score.clarity == 5);
  CHECK(score.professionalism == 5);
  CHECK(score.overall == doctest::Approx(4.8));
}

TEST_CASE("judge rejects out-of-range scores") {
  ScriptedBackend backend({{"", R"({"accuracy":6,"thoroughness":4,"clarity":5,)"
                               R"("professionalism":5,"overall":4.8})"}});
  try {
    judge_score("q", "r", backend, prompts());
    FAIL("expected judge-range");
  } catch (const Error& e) {
    CHECK(e.kind() == "judge-range");
  }
}

TEST_CASE("judge repairs with one retry") {
  ScriptedBackend backend({{"", "thinking..."},
                           {"valid JSON", R"({"accuracy":3,"thoroughness":3,"clarity":3,)"
                                          R"("professionalism":3,"overall":3})"}});
  auto score = judge_score("q", "r", backend, prompts());
  CHECK(score.accuracy == 3);
}

TEST_CASE("judge batch means match the arithmetic mean oracle") {
  // 150 scripted scores with a known pattern
  std::vector<ScriptedBackend::Entry> script;
  std::vector<std::pair<std::string, std::string>> qa;
  double sum_acc = 0;
  for (int i = 0; i < 150; ++i) {
    int acc = 1 + (i % 5);
    sum_acc += acc;
    std::string tag = "q<" + std::to_string(i) + ">";
    script.push_back({tag, "{\"accuracy\":" + std::to_string(acc) +
                              ",\"thoroughness\":4,\"clarity\":3,\"professionalism\":2,"
                              "\"overall\":4.5}"});
    qa.push_back({tag, "response"});
  }
  // matcher-based non-strict script tolerates any scheduling order
  ScriptedBackend backend(script, /*strict=*/false);
  auto result = judge_batch(qa, backend, prompts(), 4);
  CHECK(result.mean_accuracy == doctest::Approx(sum_acc / 150.0));
  CHECK(result.mean_thoroughness == doctest::Approx(4.0));
  CHECK(result.mean_overall == doctest::Approx(4.5));
  // permutation invariance: reversed question order, same means
  std::vector<std::pair<std::string, std::string>> reversed(qa.rbegin(), qa.rend());
  ScriptedBackend backend2(script, false);
  auto result2 = judge_batch(reversed, backend2, prompts(), 1);
  CHECK(result2.mean_accuracy == doctest::Approx(result.mean_accuracy));
}

TEST_CASE("acceptance rate reproduces the published tally") {
  PickTally tally;
  tally.wins = {{"finteam", 93}, {"qwen", 14}, {"gpt4o", 8}, {"chatglm", 6}, {"xuanyuan", 29}};
  tally.total = 150;
  CHECK(acceptance_rate(tally, "finteam") == doctest::Approx(0.62));
  CHECK(acceptance_rate(tally, "absent-model") == doctest::Approx(0.0));

  double sum = 0;
  for (const auto& [model, wins] : tally.wins) sum += acceptance_rate(tally, model);
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  PickTally broken = tally;
  broken.total = 149;
  CHECK_THROWS_AS(acceptance_rate(broken, "finteam"), Error);
  PickTally zero;
  zero.total = 0;
  CHECK_THROWS_AS(acceptance_rate(zero, "x"), Error);
}

TEST_CASE("paired t-test hand case") {
  auto result = paired_t_test({1, 2, 3}, {1, 1, 1});
  CHECK(std::abs(result.t_statistic - std::sqrt(3.0)) <= 1e-6);
  CHECK(result.degrees_of_freedom == 2);
  CHECK(std::abs(result.p_value - 0.2254033) <= 1e-3);
  // oracle: numerical integration of the t density
  CHECK(std::abs(result.p_value - oracles::t_test_p_by_integration(result.t_statistic, 2)) <=
        1e-8);
}

TEST_CASE("paired t-test symmetric case gives t=0 p=1") {
  auto result = paired_t_test({1, 2, 3, 4}, {2, 1, 4, 3});  // differences -1,1,-1,1
  CHECK(result.t_statistic == doctest::Approx(0.0));
  CHECK(result.p_value == doctest::Approx(1.0));
}

TEST_CASE("paired t-test error paths") {
  CHECK_THROWS_AS(paired_t_test({1, 2}, {1}), Error);
  CHECK_THROWS_AS(paired_t_test({1}, {1}), Error);
  try {
    paired_t_test({2, 2, 2}, {1, 1, 1});  // identical nonzero differences
    FAIL("expected zero-variance");
  } catch (const Error& e) {
    CHECK(e.kind() == "zero-variance");
  }
}

TEST_CASE("paired t-test matches the integration oracle on random samples") {
  std::mt19937_64 rng(0x7e57);
  std::uniform_int_distribution<int> n_pick(5, 150);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = n_pick(rng);
    std::vector<double> a(n), b(n);
    double shift = trial % 3 == 0 ? 0.5 : 0.0;
    for (int i = 0; i < n; ++i) {
      b[i] = noise(rng);
      a[i] = b[i] + shift + noise(rng);
    }
    auto result = paired_t_test(a, b);
    double expected = oracles::t_test_p_by_integration(result.t_statistic,
                                                       result.degrees_of_freedom);
    CHECK(std::abs(result.p_value - expected) <= 1e-3);
  }
}

TEST_CASE("planted mean shift at n=150 is detected") {
  std::mt19937_64 rng(0xA11CE);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> a(150), b(150);
  for (int i = 0; i < 150; ++i) {
    b[i] = noise(rng);
    a[i] = b[i] + 0.5 + 0.3 * noise(rng);
  }
  CHECK(paired_t_test(a, b).p_value < 0.05);
}

TEST_CASE("rouge-l basics and hand case") {
  CHECK(rouge_l("same text here", "same text here") == doctest::Approx(1.0));
  CHECK(rouge_l("alpha beta", "gamma delta") == doctest::Approx(0.0));
  CHECK(rouge_l("", "") == doctest::Approx(1.0));
  CHECK(rouge_l("a b", "") == doctest::Approx(0.0));
  // hand case: LCS=3, P=3/4, R=1, F=0.857142...
  double f = rouge_l("a b c d", "a c d");
  CHECK(std::abs(f - 0.857142857) <= 1e-4);
}

TEST_CASE("rouge-l is CJK aware") {
  // three matching CJK tokens out of four, order preserved
  double f = rouge_l("利率上升", "利率升");
  // candidate tokens: 利 率 上 升; reference: 利 率 升; LCS=3, P=3/4, R=1
  CHECK(std::abs(f - 0.857142857) <= 1e-4);
}

TEST_CASE("rouge-l beta=1 symmetry") {
  std::string a = "the cat sat on the mat";
  std::string b = "a cat on a mat";
  CHECK(rouge_l(a, b) == doctest::Approx(rouge_l(b, a)));
}

TEST_CASE("f1 extraction") {
  CHECK(f1_extraction({"a", "b"}, {"a", "b"}) == doctest::Approx(1.0));
  CHECK(f1_extraction({"a"}, {"b"}) == doctest::Approx(0.0));
  CHECK(f1_extraction({}, {}) == doctest::Approx(1.0));
  CHECK(f1_extraction({"a"}, {}) == doctest::Approx(0.0));
  CHECK(f1_extraction({"a", "b", "c"}, {"b", "c", "d"}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("mc letter extraction fixtures") {
  CHECK(extract_mc_letter("B") == "B");
  CHECK(extract_mc_letter("答案是 B。") == "B");
  CHECK(extract_mc_letter("答案是B。") == "B");
  CHECK(extract_mc_letter("Ｂ") == "B");  // full-width
  CHECK(extract_mc_letter("(C)") == "C");
  CHECK(extract_mc_letter("ABCD are all options, pick D") == "D");
  CHECK(extract_mc_letter("no letter at all") == "");
  CHECK(extract_mc_letter("the word CAB has letters") == "");
  CHECK(extract_mc_letter("answer: A.") == "A");
}

TEST_CASE("mc accuracy counts unextractable responses as incorrect") {
  std::vector<std::string> responses = {"A", "答案是 B。", "no letter", "D"};
  std::vector<std::string> gold = {"A", "B", "C", "C"};
  CHECK(mc_accuracy(responses, gold) == doctest::Approx(0.5));
  CHECK_THROWS_AS(mc_accuracy({"A"}, {"A", "B"}), Error);
}

TEST_CASE("formula equivalence by multi-point evaluation") {
  CHECK(formulas_equivalent("(a-b)/b", "a/b-1"));
  CHECK(formulas_equivalent("(1+0.05)^10", "1.05^10"));
  CHECK_FALSE(formulas_equivalent("(a-b)/b", "(a-b)/a"));
  CHECK_FALSE(formulas_equivalent("a+b", "a*b"));
  CHECK_FALSE(formulas_equivalent("not a formula ((", "a"));
}

TEST_CASE("formula and result accuracy definitional split") {
  std::vector<FormulaRecord> records = {
      {"(120-100)/100", "0.2", "(120-100)/100", "0.2"},  // both right
      {"(a-b)/b", "0.25", "a/b-1", "0.25"},              // equivalent formula, right result
      {"(a-b)/b", "0.30", "a/b-1", "0.25"},              // right formula, wrong result
      {"a*b", "0.25", "a/b-1", "0.25"},                  // wrong formula, right result
  };
  auto acc = formula_result_accuracy(records);
  CHECK(acc.formula_acc == doctest::Approx(0.75));
  CHECK(acc.formula_and_result_acc == doctest::Approx(0.5));

  std::vector<FormulaRecord> identical = {{"x/y", "2", "x/y", "2"}};
  auto perfect = formula_result_accuracy(identical);
  CHECK(perfect.formula_acc == doctest::Approx(1.0));
  CHECK(perfect.formula_and_result_acc == doctest::Approx(1.0));
}

TEST_CASE("welch variant behind its own entry point") {
  // equal-size equal-variance samples: welch t equals the classic two-sample t
  std::vector<double> a = {5.1, 4.9, 5.3, 5.0, 5.2};
  std::vector<double> b = {4.4, 4.6, 4.5, 4.7, 4.3};
  auto result = welch_t_test(a, b);
  CHECK(result.t_statistic > 0);
  CHECK(result.p_value < 0.01);
  CHECK(result.degrees_of_freedom >= 1);
  CHECK_THROWS_AS(welch_t_test({1}, {1, 2}), Error);
  CHECK_THROWS_AS(welch_t_test({1, 1}, {2, 2}), Error);  // zero variance both sides
}

TEST_CASE("incomplete beta sanity against closed forms") {
  // I_x(1,1) = x
  for (double x : {0.1, 0.25, 0.5, 0.9}) {
    CHECK(std::abs(regularized_incomplete_beta(1, 1, x) - x) <= 1e-12);
  }
  // df=1 Student's t: p = 1 - (2/pi) atan(|t|)
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    double expected = 1.0 - 2.0 / M_PI * std::atan(t);
    CHECK(std::abs(students_t_two_tailed_p(t, 1) - expected) <= 1e-10);
  }
  // df=2 closed form: p = 1 - t/sqrt(2+t^2)
  for (double t : {0.5, 1.0, std::sqrt(3.0), 4.0}) {
    double expected = 1.0 - t / std::sqrt(2.0 + t * t);
    CHECK(std::abs(students_t_two_tailed_p(t, 2) - expected) <= 1e-10);
  }
}
