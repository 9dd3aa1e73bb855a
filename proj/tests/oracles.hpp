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
//
// Test-only numerical oracles. Everything here is kept independent of the
// library code paths it is used to check: plain recursion, quadrature, and
// brute-force scans only.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "finteam/expr.hpp"

namespace oracles {

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, double whole, int depth) {
  double c = 0.5 * (a + b);
  double left = simpson(f, a, c);
  double right = simpson(f, c, b);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, c, eps / 2.0, left, depth - 1) +
         adaptive_simpson(f, c, b, eps / 2.0, right, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-12) {
  return adaptive_simpson(f, a, b, eps, simpson(f, a, b), 40);
}

// Phi(x) by integrating the standard normal density from 0 to x.
inline double normal_cdf_by_integration(double x) {
  auto density = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  };
  if (x >= 0) return 0.5 + integrate(density, 0.0, x);
  return 0.5 - integrate(density, x, 0.0);
}

// Two-tailed p for Student's t by integrating the t density.
inline double t_test_p_by_integration(double t, int df) {
  double v = static_cast<double>(df);
  double log_c = std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0) -
                 0.5 * std::log(v * M_PI);
  auto density = [&](double u) {
    return std::exp(log_c - (v + 1.0) / 2.0 * std::log1p(u * u / v));
  };
  double at = std::abs(t);
  double body = integrate(density, 0.0, at);
  double p = 1.0 - 2.0 * body;
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

// Independent recursive AST walker. Returns nullopt on any arithmetic fault
// so callers can cross-check error behaviour too.
inline std::optional<double> walk_eval(const finteam::Expr& e) {
  using finteam::Expr;
  switch (e.kind) {
    case Expr::Kind::Number:
      return e.number;
    case Expr::Kind::Variable:
      return std::nullopt;
    case Expr::Kind::Unary: {
      auto v = walk_eval(*e.args[0]);
      if (!v) return std::nullopt;
      return -*v;
    }
    case Expr::Kind::Binary: {
      auto l = walk_eval(*e.args[0]);
      auto r = walk_eval(*e.args[1]);
      if (!l || !r) return std::nullopt;
      double out;
      switch (e.op) {
        case '+': out = *l + *r; break;
        case '-': out = *l - *r; break;
        case '*': out = *l * *r; break;
        case '/':
          if (*r == 0.0) return std::nullopt;
          out = *l / *r;
          break;
        case '^': out = std::pow(*l, *r); break;
        default: return std::nullopt;
      }
      if (!std::isfinite(out)) return std::nullopt;
      return out;
    }
    case Expr::Kind::Call: {
      std::vector<double> vals;
      for (const auto& a : e.args) {
        auto v = walk_eval(*a);
        if (!v) return std::nullopt;
        vals.push_back(*v);
      }
      double out;
      if (e.name == "sqrt") {
        if (vals[0] < 0) return std::nullopt;
        out = std::sqrt(vals[0]);
      } else if (e.name == "abs") {
        out = std::abs(vals[0]);
      } else if (e.name == "ln") {
        if (vals[0] <= 0) return std::nullopt;
        out = std::log(vals[0]);
      } else if (e.name == "log10") {
        if (vals[0] <= 0) return std::nullopt;
        out = std::log10(vals[0]);
      } else if (e.name == "exp") {
        out = std::exp(vals[0]);
      } else if (e.name == "min") {
        out = std::min(vals[0], vals[1]);
      } else if (e.name == "max") {
        out = std::max(vals[0], vals[1]);
      } else if (e.name == "pow") {
        out = std::pow(vals[0], vals[1]);
      } else {
        return std::nullopt;
      }
      if (!std::isfinite(out)) return std::nullopt;
      return out;
    }
  }
  return std::nullopt;
}

// Random expression trees over numeric literals, bounded depth.
class RandomExprGen {
 public:
  explicit RandomExprGen(uint64_t seed) : rng_(seed) {}

  finteam::ExprPtr gen(int depth = 4) {
    using finteam::Expr;
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 9);
    int choice = pick(rng_);
    if (depth <= 0 || choice < 3) {
      std::uniform_real_distribution<double> num(-50.0, 50.0);
      double v = num(rng_);
      // keep literals tidy so ^ chains stay finite
      v = std::round(v * 100.0) / 100.0;
      if (v == 0.0) v = 1.0;
      // the parser never yields negative literals, it wraps them in unary
      // minus, so the generator does the same
      if (v < 0.0) return Expr::make_unary(Expr::make_number(-v));
      return Expr::make_number(v);
    }
    if (choice < 8) {
      const char ops[] = {'+', '-', '*', '/', '^'};
      std::uniform_int_distribution<int> op_pick(0, 4);
      char op = ops[op_pick(rng_)];
      if (op == '^') {
        std::uniform_int_distribution<int> e_pick(0, 3);
        auto base = gen(depth - 1);
        auto exponent = finteam::Expr::make_number(static_cast<double>(e_pick(rng_)));
        return Expr::make_binary('^', base, exponent);
      }
      return Expr::make_binary(op, gen(depth - 1), gen(depth - 1));
    }
    if (choice == 8) {
      return Expr::make_unary(gen(depth - 1));
    }
    const char* fns1[] = {"abs", "exp"};
    const char* fns2[] = {"min", "max"};
    std::uniform_int_distribution<int> f_pick(0, 3);
    int f = f_pick(rng_);
    if (f < 2) {
      return Expr::make_call(fns1[f], {gen(depth - 1)});
    }
    return Expr::make_call(fns2[f - 2], {gen(depth - 1), gen(depth - 1)});
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracles
