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

#ifndef TRITRAIN_ADAM_HPP_
#define TRITRAIN_ADAM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "tritrain/tensor.hpp"

namespace tritrain {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for one parameter.
struct AdamState {
  Tensor m;
  Tensor v;
  std::uint64_t t = 0;
  AdamHyper hyper;

  AdamState() = default;
  AdamState(const Shape& shape, AdamHyper hyper = {});
};

/// One bias-corrected Adam update of p.value from p.grad. Increments s.t.
/// The gradient is left untouched; call p.zero_grad() before the next pass.
void adam_step(Parameter& p, AdamState& s);

/// Adam over a fixed parameter list, one AdamState per parameter.
class Adam {
 public:
  Adam(std::span<Parameter> params, AdamHyper hyper = {});

  /// Applies one step to every parameter, then zeroes their gradients.
  void step(std::span<Parameter> params);

  const std::vector<AdamState>& states() const { return states_; }

 private:
  std::vector<AdamState> states_;
};

}  // namespace tritrain

#endif  // TRITRAIN_ADAM_HPP_
