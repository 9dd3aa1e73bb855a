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

#include "finteam/normal.hpp"

#include <cmath>

#include "finteam/error.hpp"

namespace finteam {

namespace {

// Maclaurin series for erf, used near zero where the rational approximation
// is weakest. Converges in ~12 terms for |z| < 0.5.
double erf_series(double z) {
  const double two_over_sqrt_pi = 1.1283791670955126;
  double term = z;
  double sum = z;
  double z2 = z * z;
  for (int n = 1; n < 40; ++n) {
    term *= -z2 / n;
    double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-17) break;
  }
  return two_over_sqrt_pi * sum;
}

// Abramowitz & Stegun 7.1.26 rational approximation, |error| <= 1.5e-7.
double erf_rational(double z) {
  const double p = 0.3275911;
  const double a1 = 0.254829592;
  const double a2 = -0.284496736;
  const double a3 = 1.421413741;
  const double a4 = -1.453152027;
  const double a5 = 1.061405429;
  double t = 1.0 / (1.0 + p * z);
  double poly = ((((a5 * t + a4) * t + a3) * t + a2) * t + a1) * t;
  return 1.0 - poly * std::exp(-z * z);
}

double erf_approx(double z) {
  double az = std::abs(z);
  double v = az < 0.5 ? erf_series(az) : erf_rational(az);
  return z < 0 ? -v : v;
}

}  // namespace

double normal_cdf(double x) {
  if (!std::isfinite(x)) {
    throw Error("invalid-number", "normal_cdf requires a finite input");
  }
  const double inv_sqrt2 = 0.7071067811865476;
  double phi = 0.5 * (1.0 + erf_approx(x * inv_sqrt2));
  if (phi < 0.0) phi = 0.0;
  if (phi > 1.0) phi = 1.0;
  return phi;
}

long long count_samples_text(const std::string& raw) {
  std::string body = raw;
  // strip one layer of enclosing brackets
  size_t b = body.find_first_not_of(" \t\r\n");
  size_t e = body.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return 0;
  body = body.substr(b, e - b + 1);
  if (!body.empty() && (body.front() == '[' || body.front() == '(') &&
      (body.back() == ']' || body.back() == ')')) {
    body = body.substr(1, body.size() - 2);
  }

  long long count = 0;
  bool in_token = false;
  size_t pos = 0;
  while (pos < body.size()) {
    unsigned char c = static_cast<unsigned char>(body[pos]);
    bool sep = c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';';
    if (!sep && c >= 0x80) {
      // full-width comma / ideographic space also separate
      if (body.compare(pos, 3, "，") == 0 || body.compare(pos, 3, "　") == 0 ||
          body.compare(pos, 3, "、") == 0) {
        sep = true;
        pos += 3;
        in_token = false;
        continue;
      }
    }
    if (sep) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
    ++pos;
  }
  return count;
}

}  // namespace finteam
