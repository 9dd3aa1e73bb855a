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

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "finteam/chat.hpp"
#include "finteam/prompts.hpp"

namespace finteam {

// Four 1-5 rubric dimensions plus the judge's own overall score. The overall
// is judge-assigned, not derived from the dimensions.
struct JudgeScore {
  int accuracy = 0;
  int thoroughness = 0;
  int clarity = 0;
  int professionalism = 0;
  double overall = 0.0;
};

struct PairedTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  int degrees_of_freedom = 0;
  int n = 0;
};

struct PickTally {
  std::map<std::string, int> wins;  // model -> times chosen best
  int total = 0;
};

// Rubric scoring by a judge backend; strict JSON output with one repair
// retry. Throws ReplyParseError on unusable output and
// Error("judge-range") on out-of-range values.
JudgeScore judge_score(const std::string& question, const std::string& response,
                       Backend& judge_backend, const PromptLibrary& prompts);

struct JudgeBatchResult {
  std::vector<JudgeScore> scores;  // by question index
  double mean_accuracy = 0, mean_thoroughness = 0, mean_clarity = 0, mean_professionalism = 0,
         mean_overall = 0;
};

// Bounded-parallel judging (default 4 in flight); results keyed by index so
// means are order-independent.
JudgeBatchResult judge_batch(const std::vector<std::pair<std::string, std::string>>& qa_pairs,
                             Backend& judge_backend, const PromptLibrary& prompts,
                             int parallelism = 4);

double acceptance_rate(const PickTally& tally, const std::string& model);

// Two-tailed paired Student's t-test: t = mean(d)/(sd(d)/sqrt(n)) with the
// n-1 sample standard deviation; p from the regularized incomplete beta.
PairedTestResult paired_t_test(const std::vector<double>& scores_a,
                               const std::vector<double>& scores_b);

// Unpaired Welch alternative (two-sample, unequal variances), kept behind an
// explicit call/flag; degrees of freedom by Welch-Satterthwaite, rounded down.
PairedTestResult welch_t_test(const std::vector<double>& scores_a,
                              const std::vector<double>& scores_b);

// Student's t two-tailed p-value and its incomplete-beta backbone, exposed
// for reuse and testing.
double students_t_two_tailed_p(double t, int df);
double regularized_incomplete_beta(double a, double b, double x);

// ROUGE-L F-measure (beta=1) over CJK-aware tokens: each CJK codepoint is a
// token, other runs split on word boundaries. Both empty -> 1, one empty -> 0.
double rouge_l(const std::string& candidate, const std::string& reference);

// Exact-match set F1. Both empty -> 1; zero precision and recall -> 0.
double f1_extraction(const std::set<std::string>& predicted, const std::set<std::string>& gold);

// First standalone option letter A-D (full-width normalized) per response.
// Missing or wrong letters count as incorrect.
double mc_accuracy(const std::vector<std::string>& responses,
                   const std::vector<std::string>& gold);
std::string extract_mc_letter(const std::string& response);

struct FormulaRecord {
  std::string extracted_formula;
  std::string extracted_result;
  std::string gold_formula;
  std::string gold_result;
};

struct FormulaAccuracy {
  double formula_acc = 0.0;
  double formula_and_result_acc = 0.0;
};

// Formula match = algebraic equivalence by evaluation at 8 seeded random
// assignments (1e-6 agreement); result match = numeric equality within 1e-4
// relative. Unparseable formulas count as mismatches.
FormulaAccuracy formula_result_accuracy(const std::vector<FormulaRecord>& records);
bool formulas_equivalent(const std::string& formula_a, const std::string& formula_b);

}  // namespace finteam
