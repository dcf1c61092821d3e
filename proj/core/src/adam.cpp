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

#include "tritrain/adam.hpp"

#include <cmath>

#include "tritrain/error.hpp"

namespace tritrain {

AdamState::AdamState(const Shape& shape, AdamHyper hyper_in)
    : m(shape), v(shape), t(0), hyper(hyper_in) {}

void adam_step(Parameter& p, AdamState& s) {
  if (p.grad.shape() != p.value.shape() || s.m.shape() != p.value.shape() ||
      s.v.shape() != p.value.shape()) {
    throw ShapeError("adam_step: parameter '" + p.name + "' has shape " +
                     shape_string(p.value.shape()) + " but state has shape " +
                     shape_string(s.m.shape()));
  }
  const AdamHyper& h = s.hyper;
  s.t += 1;
  const double t = static_cast<double>(s.t);
  const double correct1 = 1.0 - std::pow(h.beta1, t);
  const double correct2 = 1.0 - std::pow(h.beta2, t);
  const std::size_t n = p.value.size();
  double* w = p.value.raw();
  const double* g = p.grad.raw();
  double* m = s.m.raw();
  double* v = s.v.raw();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correct1;
    const double v_hat = v[i] / correct2;
    w[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

Adam::Adam(std::span<Parameter> params, AdamHyper hyper) {
  states_.reserve(params.size());
  for (const Parameter& p : params) states_.emplace_back(p.value.shape(), hyper);
}

void Adam::step(std::span<Parameter> params) {
  if (params.size() != states_.size()) {
    throw ConfigError("Adam::step: optimizer built for " + std::to_string(states_.size()) +
                      " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_step(params[i], states_[i]);
    params[i].zero_grad();
  }
}

}  // namespace tritrain
