// Copyright 2026 The tritrain Authors.
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

#include "tritrain/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tritrain/rng.hpp"

namespace tritrain {

namespace {

struct Probe {
  double loss;
  std::uint64_t signature;
};

Probe evaluate(const LossBuilder& loss) {
  Tape tape;
  Var out = loss(tape);
  return {out.value()[0], tape.activation_signature()};
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  for (Parameter* p : params) p->zero_grad();
  std::uint64_t base_signature = 0;
  {
    Tape tape;
    Var out = loss(tape);
    base_signature = tape.activation_signature();
    tape.backward(out);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) {
    analytic.push_back(p->grad);
    p->zero_grad();
  }

  GradCheckReport report;
  Rng rng(options.seed);
  const double eps = options.eps;

  // Returns false when the probe crosses a kink.
  auto check_coordinate = [&](std::size_t param_index, std::size_t i) {
    Parameter& p = *params[param_index];
    const double original = p.value[i];
    p.value[i] = original + eps;
    const Probe plus = evaluate(loss);
    p.value[i] = original - eps;
    const Probe minus = evaluate(loss);
    p.value[i] = original;
    if (plus.signature != base_signature || minus.signature != base_signature) return false;

    const double numeric = (plus.loss - minus.loss) / (2.0 * eps);
    const double a = analytic[param_index][i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    ++report.checked;
    if (report.checked == 1 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_parameter = p.name;
      report.worst_index = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
    return true;
  };

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const std::size_t n = params[pi]->value.size();
    if (options.samples_per_param == 0 || options.samples_per_param >= n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!check_coordinate(pi, i)) ++report.skipped_at_kinks;
      }
      continue;
    }
    for (std::size_t s = 0; s < options.samples_per_param; ++s) {
      for (std::size_t attempt = 0; attempt <= options.max_redraws; ++attempt) {
        if (check_coordinate(pi, rng.below(n))) break;
        ++report.skipped_at_kinks;
      }
    }
  }
  return report;
}

}  // namespace tritrain
