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

#ifndef TRITRAIN_GRAD_CHECK_HPP_
#define TRITRAIN_GRAD_CHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "tritrain/tape.hpp"

namespace tritrain {

/// Builds a scalar loss on the given tape. Must be deterministic.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double eps = 1e-4;
  /// Coordinates checked per parameter tensor; 0 checks every coordinate.
  std::size_t samples_per_param = 0;
  std::uint64_t seed = 0;
  /// A coordinate whose +/-eps probes change the activation signature sits
  /// on a ReLU or max-pool kink; it is skipped and another one is drawn, up
  /// to this many redraws per sampled coordinate.
  std::size_t max_redraws = 16;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kinks = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares backward() gradients with central differences
/// (f(x + eps) - f(x - eps)) / (2 eps), elementwise, and returns the maximum
/// relative error |a - b| / max(|a|, |b|, 1e-8). Gradients of params are
/// zeroed before and after the check; parameter values are restored exactly.
GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

}  // namespace tritrain

#endif  // TRITRAIN_GRAD_CHECK_HPP_
