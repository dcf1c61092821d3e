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

#include "tritrain/models.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "tritrain/error.hpp"

namespace tritrain {

DanConfig DanConfig::for_input(std::size_t input_dim) {
  DanConfig c;
  c.input_dim = input_dim;
  if (input_dim == 300) {
    c.hidden = {300, 150, 75, 2};
  } else if (input_dim == 768) {
    c.hidden = {768, 324, 162, 2};
  } else {
    c.hidden = {input_dim, std::max<std::size_t>(input_dim / 2, 2), std::max<std::size_t>(input_dim / 4, 2), 2};
  }
  return c;
}

std::size_t CnnConfig::max_width() const {
  return filter_widths.empty() ? 0 : *std::max_element(filter_widths.begin(), filter_widths.end());
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const ArchConfig& config) {
  std::visit(Overloaded{
                 [](const DanConfig& c) {
                   require(c.input_dim > 0, "dan: input_dim must be positive");
                   require(!c.hidden.empty(), "dan: at least one layer is required");
                   require(std::all_of(c.hidden.begin(), c.hidden.end(), [](std::size_t h) { return h > 0; }),
                           "dan: layer widths must be positive");
                   require(c.hidden.back() == 2, "dan: the last layer must have width 2");
                 },
                 [](const CnnConfig& c) {
                   require(c.input_dim > 0, "cnn: input_dim must be positive");
                   require(!c.filter_widths.empty(), "cnn: at least one filter width is required");
                   require(std::all_of(c.filter_widths.begin(), c.filter_widths.end(),
                                       [](std::size_t w) { return w > 0; }),
                           "cnn: filter widths must be positive");
                   require(c.filters_per_width > 0, "cnn: filters_per_width must be positive");
                   require(!c.head_hidden.empty(), "cnn: the feed-forward head needs at least one layer");
                   require(std::all_of(c.head_hidden.begin(), c.head_hidden.end(),
                                       [](std::size_t h) { return h > 0; }),
                           "cnn: head widths must be positive");
                   require(c.head_hidden.back() == 2, "cnn: the last head layer must have width 2");
                   require(c.pooled_dim() == c.head_hidden.front(),
                           "cnn: filters_per_width x number of widths (" + std::to_string(c.pooled_dim()) +
                               ") must equal the first head width (" + std::to_string(c.head_hidden.front()) + ")");
                   require(c.head_dropout >= 0.0 && c.head_dropout < 1.0, "cnn: head_dropout must lie in [0, 1)");
                 },
             },
             config);
}

std::string arch_name(const ArchConfig& config) {
  return std::holds_alternative<DanConfig>(config) ? "dan" : "cnn";
}

std::size_t input_dim(const ArchConfig& config) {
  return std::visit([](const auto& c) { return c.input_dim; }, config);
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter& p : parameters) n += p.value.size();
  return n;
}

const Parameter* ModelParams::find(const std::string& name) const {
  for (const Parameter& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

void add_dense_stack(std::vector<Parameter>& out, const std::string& prefix, std::size_t in,
                     const std::vector<std::size_t>& widths, Rng& rng) {
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::string name = prefix + ".ff" + std::to_string(i);
    out.emplace_back(name + ".weight", glorot({in, widths[i]}, in, widths[i], rng));
    out.emplace_back(name + ".bias", Tensor({widths[i]}));
    in = widths[i];
  }
}

}  // namespace

ModelParams init_params(const ArchConfig& config, Rng& rng, double embedding_dropout) {
  validate(config);
  if (!(embedding_dropout >= 0.0) || embedding_dropout >= 1.0) {
    throw ConfigError("embedding dropout must lie in [0, 1)");
  }
  ModelParams m;
  m.config = config;
  m.embedding_dropout = embedding_dropout;
  if (const auto* dan = std::get_if<DanConfig>(&config)) {
    add_dense_stack(m.parameters, "dan", dan->input_dim, dan->hidden, rng);
  } else {
    const auto& cnn = std::get<CnnConfig>(config);
    for (std::size_t w : cnn.filter_widths) {
      const std::string name = "cnn.conv" + std::to_string(w);
      const std::size_t k = cnn.filters_per_width;
      m.parameters.emplace_back(name + ".filters",
                                glorot({k, w, cnn.input_dim}, w * cnn.input_dim, w * k, rng));
      m.parameters.emplace_back(name + ".bias", Tensor({k}));
    }
    add_dense_stack(m.parameters, "cnn", cnn.pooled_dim(), cnn.head_hidden, rng);
  }
  return m;
}

Tensor pad_rows(const Tensor& x, std::size_t min_rows) {
  if (x.rank() != 2) throw ShapeError("pad_rows: expected a matrix, got " + shape_string(x.shape()));
  if (x.dim(0) >= min_rows) return x;
  std::vector<double> data(x.data().begin(), x.data().end());
  data.resize(min_rows * x.dim(1), 0.0);
  return Tensor({min_rows, x.dim(1)}, std::move(data));
}

namespace {

void check_input(const Tensor& x, std::size_t dim, const std::string& arch) {
  if (x.rank() != 2 || x.dim(1) != dim) {
    throw ShapeError(arch + ": expected a (tokens x " + std::to_string(dim) + ") input, got " +
                     shape_string(x.shape()));
  }
}

// M is ModelParams or const ModelParams; Tape::parameter picks the trainable
// or read-only leaf from its constness.
template <class M>
Var dense_stack(Tape& tape, M& m, std::size_t first, std::size_t layers, Var h, double dropout_rate,
                bool train_mode, Rng& rng) {
  for (std::size_t i = 0; i < layers; ++i) {
    Var w = tape.parameter(m.parameters[first + 2 * i]);
    Var b = tape.parameter(m.parameters[first + 2 * i + 1]);
    h = affine(h, w, b);
    if (i + 1 < layers) {
      h = relu(h);
      h = dropout(h, dropout_rate, rng, train_mode);
    }
  }
  return h;
}

template <class M>
Var dan_impl(Tape& tape, M& m, const Tensor& x, bool train_mode, Rng& rng) {
  const auto* cfg = std::get_if<DanConfig>(&m.config);
  if (!cfg) throw ConfigError("dan_forward called on a " + arch_name(m.config) + " model");
  check_input(x, cfg->input_dim, "dan");
  Var input = tape.input(x);
  Var h = mean_rows(dropout(input, m.embedding_dropout, rng, train_mode));
  return dense_stack(tape, m, 0, cfg->hidden.size(), h, 0.0, train_mode, rng);
}

template <class M>
Var cnn_pooled_impl(Tape& tape, M& m, const Tensor& x, bool train_mode, Rng& rng) {
  const auto* cfg = std::get_if<CnnConfig>(&m.config);
  if (!cfg) throw ConfigError("cnn_forward called on a " + arch_name(m.config) + " model");
  check_input(x, cfg->input_dim, "cnn");
  Var input = dropout(tape.input(pad_rows(x, cfg->max_width())), m.embedding_dropout, rng, train_mode);
  std::vector<Var> pooled;
  pooled.reserve(cfg->filter_widths.size());
  std::vector<std::size_t> order(cfg->filter_widths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg->filter_widths[a] < cfg->filter_widths[b]; });
  for (std::size_t i : order) {
    Var filters = tape.parameter(m.parameters[2 * i]);
    Var bias = tape.parameter(m.parameters[2 * i + 1]);
    pooled.push_back(max_over_time(relu(conv1d_valid(input, filters, bias))));
  }
  return concat(pooled);
}

template <class M>
Var cnn_impl(Tape& tape, M& m, const Tensor& x, bool train_mode, Rng& rng) {
  Var h = cnn_pooled_impl(tape, m, x, train_mode, rng);
  const auto& cfg = std::get<CnnConfig>(m.config);
  return dense_stack(tape, m, 2 * cfg.filter_widths.size(), cfg.head_hidden.size(), h, cfg.head_dropout,
                     train_mode, rng);
}

}  // namespace

Var dan_forward(Tape& tape, ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return dan_impl(tape, m, x, train_mode, rng);
}
Var dan_forward(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return dan_impl(tape, m, x, train_mode, rng);
}
Var cnn_forward(Tape& tape, ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return cnn_impl(tape, m, x, train_mode, rng);
}
Var cnn_forward(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return cnn_impl(tape, m, x, train_mode, rng);
}
Var cnn_pooled(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return cnn_pooled_impl(tape, m, x, train_mode, rng);
}

Var forward(Tape& tape, ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return std::holds_alternative<DanConfig>(m.config) ? dan_impl(tape, m, x, train_mode, rng)
                                                     : cnn_impl(tape, m, x, train_mode, rng);
}
Var forward(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng) {
  return std::holds_alternative<DanConfig>(m.config) ? dan_impl(tape, m, x, train_mode, rng)
                                                     : cnn_impl(tape, m, x, train_mode, rng);
}

std::vector<double> logits(const ModelParams& m, const Tensor& x) {
  Tape tape;
  Rng unused(0);
  Var out = forward(tape, m, x, false, unused);
  return {out.value().data().begin(), out.value().data().end()};
}

Prediction predict_from_logits(std::span<const double> z) {
  const std::vector<double> p = softmax(z);
  std::size_t best = 0;
  for (std::size_t c = 1; c < z.size(); ++c) {
    if (z[c] > z[best]) best = c;
  }
  return {static_cast<int>(best), p[best]};
}

Prediction predict(const ModelParams& m, const EmbeddingSource& src, const Sentence& s) {
  const std::vector<double> z = logits(m, src.embed(s));
  return predict_from_logits(z);
}

}  // namespace tritrain
