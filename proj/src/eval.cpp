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

#include "finteam/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "finteam/agents.hpp"
#include "finteam/error.hpp"
#include "finteam/expr.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

using nlohmann::json;

namespace {

JudgeScore parse_judge_reply(const std::string& reply) {
  auto object_text = extract_json_object(reply);
  if (!object_text) {
    throw ReplyParseError("no JSON object in judge reply", reply);
  }
  json parsed = json::parse(*object_text, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw ReplyParseError("invalid JSON in judge reply", reply);
  }
  const char* dims[] = {"accuracy", "thoroughness", "clarity", "professionalism", "overall"};
  for (const char* dim : dims) {
    if (!parsed.contains(dim) || !parsed[dim].is_number()) {
      throw ReplyParseError(std::string("judge reply lacks numeric '") + dim + "'", reply);
    }
  }
  JudgeScore score;
  score.accuracy = parsed["accuracy"].get<int>();
  score.thoroughness = parsed["thoroughness"].get<int>();
  score.clarity = parsed["clarity"].get<int>();
  score.professionalism = parsed["professionalism"].get<int>();
  score.overall = parsed["overall"].get<double>();
  for (int v : {score.accuracy, score.thoroughness, score.clarity, score.professionalism}) {
    if (v < 1 || v > 5) {
      throw Error("judge-range", "dimension score " + std::to_string(v) + " outside [1,5]");
    }
  }
  if (score.overall < 1.0 || score.overall > 5.0) {
    throw Error("judge-range", "overall score outside [1,5]");
  }
  return score;
}

}  // namespace

JudgeScore judge_score(const std::string& question, const std::string& response,
                       Backend& judge_backend, const PromptLibrary& prompts) {
  ChatRequest request;
  request.temperature = 0.0;
  request.messages = {{Role::System, prompts.render("judge", {})},
                      {Role::User, "Question:\n" + question + "\n\nResponse:\n" + response +
                                       "\n\nScore the response."}};
  std::string reply = judge_backend.complete(request);
  try {
    return parse_judge_reply(reply);
  } catch (const ReplyParseError&) {
    ChatRequest retry = request;
    retry.messages.push_back({Role::Assistant, reply});
    retry.messages.push_back({Role::User, "reply with valid JSON only, exactly one object"});
    return parse_judge_reply(judge_backend.complete(retry));
  }
}

JudgeBatchResult judge_batch(const std::vector<std::pair<std::string, std::string>>& qa_pairs,
                             Backend& judge_backend, const PromptLibrary& prompts,
                             int parallelism) {
  JudgeBatchResult result;
  result.scores.resize(qa_pairs.size());
  if (qa_pairs.empty()) return result;
  if (parallelism < 1) parallelism = 1;
  parallelism = std::min<int>(parallelism, static_cast<int>(qa_pairs.size()));

  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  for (int w = 0; w < parallelism; ++w) {
    workers.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= qa_pairs.size() || failed.load()) return;
        try {
          result.scores[i] =
              judge_score(qa_pairs[i].first, qa_pairs[i].second, judge_backend, prompts);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) first_error = e.what();
          return;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failed.load()) {
    throw Error("judge-batch", first_error);
  }

  double n = static_cast<double>(qa_pairs.size());
  for (const auto& s : result.scores) {
    result.mean_accuracy += s.accuracy / n;
    result.mean_thoroughness += s.thoroughness / n;
    result.mean_clarity += s.clarity / n;
    result.mean_professionalism += s.professionalism / n;
    result.mean_overall += s.overall / n;
  }
  return result;
}

double acceptance_rate(const PickTally& tally, const std::string& model) {
  if (tally.total <= 0) {
    throw Error("invalid-request", "tally total must be positive");
  }
  int sum = 0;
  for (const auto& [name, wins] : tally.wins) sum += wins;
  if (sum != tally.total) {
    throw Error("invalid-request", "win counts do not partition the total");
  }
  auto it = tally.wins.find(model);
  int wins = it == tally.wins.end() ? 0 : it->second;
  return static_cast<double>(wins) / tally.total;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  // continued fraction (modified Lentz)
  auto betacf = [](double a_, double b_, double x_) {
    const int max_iter = 300;
    const double eps = 3e-16;
    const double fpmin = 1e-300;
    double qab = a_ + b_;
    double qap = a_ + 1.0;
    double qam = a_ - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x_ / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
      int m2 = 2 * m;
      double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  };

  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double students_t_two_tailed_p(double t, int df) {
  if (df < 1) {
    throw Error("invalid-request", "degrees of freedom must be >= 1");
  }
  double v = static_cast<double>(df);
  double x = v / (v + t * t);
  double p = regularized_incomplete_beta(v / 2.0, 0.5, x);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

PairedTestResult paired_t_test(const std::vector<double>& scores_a,
                               const std::vector<double>& scores_b) {
  if (scores_a.size() != scores_b.size()) {
    throw Error("invalid-request", "paired samples must have equal length");
  }
  size_t n = scores_a.size();
  if (n < 2) {
    throw Error("invalid-request", "need at least 2 pairs");
  }
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += (scores_a[i] - scores_b[i]) / n;
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = scores_a[i] - scores_b[i] - mean;
    var += d * d;
  }
  var /= (n - 1);
  if (var == 0.0) {
    if (mean == 0.0) {
      throw Error("zero-variance", "all differences identical (zero variance)");
    }
    throw Error("zero-variance", "differences have zero variance");
  }
  double sd = std::sqrt(var);
  PairedTestResult result;
  result.n = static_cast<int>(n);
  result.degrees_of_freedom = static_cast<int>(n) - 1;
  result.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p_value = students_t_two_tailed_p(result.t_statistic, result.degrees_of_freedom);
  return result;
}

PairedTestResult welch_t_test(const std::vector<double>& scores_a,
                              const std::vector<double>& scores_b) {
  if (scores_a.size() < 2 || scores_b.size() < 2) {
    throw Error("invalid-request", "need at least 2 samples per side");
  }
  auto moments = [](const std::vector<double>& xs, double& mean, double& var) {
    mean = 0.0;
    for (double x : xs) mean += x / xs.size();
    var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);
  };
  double mean_a, var_a, mean_b, var_b;
  moments(scores_a, mean_a, var_a);
  moments(scores_b, mean_b, var_b);
  double na = static_cast<double>(scores_a.size());
  double nb = static_cast<double>(scores_b.size());
  double se2 = var_a / na + var_b / nb;
  if (se2 == 0.0) {
    throw Error("zero-variance", "both samples have zero variance");
  }
  double df_num = se2 * se2;
  double df_den = (var_a / na) * (var_a / na) / (na - 1) + (var_b / nb) * (var_b / nb) / (nb - 1);
  PairedTestResult result;
  result.n = static_cast<int>(scores_a.size() + scores_b.size());
  result.degrees_of_freedom = std::max(1, static_cast<int>(std::floor(df_num / df_den)));
  result.t_statistic = (mean_a - mean_b) / std::sqrt(se2);
  result.p_value = students_t_two_tailed_p(result.t_statistic, result.degrees_of_freedom);
  return result;
}

double rouge_l(const std::string& candidate, const std::string& reference) {
  auto cand = tokenize_cjk_aware(candidate);
  auto ref = tokenize_cjk_aware(reference);
  if (cand.empty() && ref.empty()) return 1.0;
  if (cand.empty() || ref.empty()) return 0.0;

  // LCS dynamic programming over token sequences
  size_t m = cand.size(), n = ref.size();
  std::vector<int> prev(n + 1, 0), cur(n + 1, 0);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      if (cand[i - 1] == ref[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  double lcs = prev[n];
  if (lcs == 0.0) return 0.0;
  double precision = lcs / m;
  double recall = lcs / n;
  return 2.0 * precision * recall / (precision + recall);
}

double f1_extraction(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
  if (predicted.empty() && gold.empty()) return 1.0;
  if (predicted.empty() || gold.empty()) return 0.0;
  int hits = 0;
  for (const auto& item : predicted) hits += gold.count(item) ? 1 : 0;
  double precision = static_cast<double>(hits) / predicted.size();
  double recall = static_cast<double>(hits) / gold.size();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::string extract_mc_letter(const std::string& response) {
  size_t pos = 0;
  char32_t prev = 0;
  while (pos < response.size()) {
    size_t start = pos;
    char32_t cp = utf8_next(response, pos);
    char letter = 0;
    if (cp >= 'A' && cp <= 'D') letter = static_cast<char>(cp);
    if (cp >= 0xFF21 && cp <= 0xFF24) letter = static_cast<char>('A' + (cp - 0xFF21));
    if (letter != 0) {
      bool prev_alnum = (prev >= 'A' && prev <= 'Z') || (prev >= 'a' && prev <= 'z') ||
                        (prev >= '0' && prev <= '9');
      char32_t next_cp = 0;
      if (pos < response.size()) {
        size_t peek = pos;
        next_cp = utf8_next(response, peek);
      }
      bool next_alnum = (next_cp >= 'A' && next_cp <= 'Z') || (next_cp >= 'a' && next_cp <= 'z') ||
                        (next_cp >= '0' && next_cp <= '9');
      if (!prev_alnum && !next_alnum) {
        return std::string(1, letter);
      }
    }
    prev = cp;
    (void)start;
  }
  return "";
}

double mc_accuracy(const std::vector<std::string>& responses,
                   const std::vector<std::string>& gold) {
  if (responses.size() != gold.size()) {
    throw Error("invalid-request", "responses and gold labels differ in length");
  }
  if (responses.empty()) return 0.0;
  int correct = 0;
  for (size_t i = 0; i < responses.size(); ++i) {
    std::string extracted = extract_mc_letter(responses[i]);
    if (!extracted.empty() && extracted == gold[i]) ++correct;
  }
  return static_cast<double>(correct) / responses.size();
}

bool formulas_equivalent(const std::string& formula_a, const std::string& formula_b) {
  ExprPtr a, b;
  try {
    a = parse_expression(formula_a);
    b = parse_expression(formula_b);
  } catch (const Error&) {
    return false;
  }
  auto vars_a = expr_variables(*a);
  auto vars_b = expr_variables(*b);
  std::set<std::string> vars(vars_a.begin(), vars_a.end());
  vars.insert(vars_b.begin(), vars_b.end());

  std::mt19937_64 rng(0x0F0E);
  std::uniform_real_distribution<double> value(0.5, 2.5);
  for (int point = 0; point < 8; ++point) {
    Assignment bindings;
    for (const auto& v : vars) bindings[v] = value(rng);
    double va, vb;
    try {
      va = eval_expression(*a, &bindings);
      vb = eval_expression(*b, &bindings);
    } catch (const Error&) {
      return false;
    }
    double tol = 1e-6 * std::max({1.0, std::abs(va), std::abs(vb)});
    if (std::abs(va - vb) > tol) return false;
  }
  return true;
}

FormulaAccuracy formula_result_accuracy(const std::vector<FormulaRecord>& records) {
  FormulaAccuracy out;
  if (records.empty()) return out;
  int formula_hits = 0, both_hits = 0;
  for (const auto& record : records) {
    bool formula_ok = formulas_equivalent(record.extracted_formula, record.gold_formula);
    bool result_ok = false;
    try {
      double got = eval_expression(*parse_expression(record.extracted_result));
      double want = eval_expression(*parse_expression(record.gold_result));
      double tol = 1e-4 * std::max(1.0, std::abs(want));
      result_ok = std::abs(got - want) <= tol;
    } catch (const Error&) {
      result_ok = false;
    }
    formula_hits += formula_ok ? 1 : 0;
    both_hits += (formula_ok && result_ok) ? 1 : 0;
  }
  out.formula_acc = static_cast<double>(formula_hits) / records.size();
  out.formula_and_result_acc = static_cast<double>(both_hits) / records.size();
  return out;
}

}  // namespace finteam
