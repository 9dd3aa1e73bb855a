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

#include <string>

namespace finteam {

// Standard normal CDF, absolute error <= 1e-7. Throws Error("invalid-number")
// for non-finite input.
double normal_cdf(double x);

// Counter tool core: number of samples in a raw argument list such as
// "[1, 2, 3]" or "1 2 3". Tokens are split on commas and whitespace.
long long count_samples_text(const std::string& raw);

}  // namespace finteam
