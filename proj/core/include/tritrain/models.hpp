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

// Sentence classifiers: a deep averaging network and a multi-width 1-D
// convolutional network with max-over-time pooling. Both emit two raw logits;
// softmax lives in the loss and in predict().

#ifndef TRITRAIN_MODELS_HPP_
#define TRITRAIN_MODELS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tritrain/embeddings.hpp"
#include "tritrain/rng.hpp"
#include "tritrain/tape.hpp"
#include "tritrain/tensor.hpp"

namespace tritrain {

/// Averaged embeddings followed by ReLU layers; the last layer is linear.
struct DanConfig {
  std::size_t input_dim = 300;
  std::vector<std::size_t> hidden = {300, 150, 75, 2};

  /// 300 -> {300, 150, 75, 2}, 768 -> {768, 324, 162, 2}; other widths get
  /// {d, d/2, d/4, 2}.
  static DanConfig for_input(std::size_t input_dim);

  friend bool operator==(const DanConfig&, const DanConfig&) = default;
};

/// One convolution per filter width, ReLU, max over time, concatenation in
/// ascending width order, then a ReLU feed-forward head.
struct CnnConfig {
  std::size_t input_dim = 768;
  std::vector<std::size_t> filter_widths = {2, 3, 4, 5};
  std::size_t filters_per_width = 192;
  std::vector<std::size_t> head_hidden = {768, 324, 162, 2};
  double head_dropout = 0.2;

  std::size_t pooled_dim() const { return filters_per_width * filter_widths.size(); }
  std::size_t max_width() const;

  friend bool operator==(const CnnConfig&, const CnnConfig&) = default;
};

using ArchConfig = std::variant<DanConfig, CnnConfig>;

/// Throws ConfigError when the config breaks an architecture invariant.
void validate(const ArchConfig& config);
std::string arch_name(const ArchConfig& config);
std::size_t input_dim(const ArchConfig& config);

struct ModelParams {
  ArchConfig config;
  std::vector<Parameter> parameters;
  double embedding_dropout = kStaticEmbeddingDropout;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const;
  const Parameter* find(const std::string& name) const;
};

/// Glorot-uniform weights, zero biases. Deterministic in the rng state.
ModelParams init_params(const ArchConfig& config, Rng& rng,
                        double embedding_dropout = kStaticEmbeddingDropout);

/// Right-pads x with zero rows up to min_rows rows.
Tensor pad_rows(const Tensor& x, std::size_t min_rows);

/// Forward passes over a (tokens x input_dim) matrix, returning two logits.
/// The mutable overloads record trainable leaves; the const overloads read
/// the parameters without tracking their gradients. rng is only drawn from
/// in train mode.
Var dan_forward(Tape& tape, ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);
Var dan_forward(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);
Var cnn_forward(Tape& tape, ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);
Var cnn_forward(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);

/// Concatenated max-pooled convolution features (pooled_dim), before the head.
Var cnn_pooled(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);

/// Dispatches on the architecture.
Var forward(Tape& tape, ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);
Var forward(Tape& tape, const ModelParams& m, const Tensor& x, bool train_mode, Rng& rng);

/// Eval-mode logits.
std::vector<double> logits(const ModelParams& m, const Tensor& x);

struct Prediction {
  int label = 0;
  double prob = 0.5;
};

/// argmax of softmax(logits) with ties to label 0, and that label's probability.
Prediction predict_from_logits(std::span<const double> logits);
Prediction predict(const ModelParams& m, const EmbeddingSource& src, const Sentence& s);

}  // namespace tritrain

#endif  // TRITRAIN_MODELS_HPP_
