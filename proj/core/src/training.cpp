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

#include "tritrain/training.hpp"

#include <numeric>

#include "json.hpp"
#include "tritrain/adam.hpp"
#include "tritrain/error.hpp"
#include "tritrain/tape.hpp"

namespace tritrain {

namespace {

// Stream tags under TrainConfig::seed.
enum StreamTag : std::uint64_t { kInit = 1, kShuffle = 2, kDropout = 3, kUpsample = 4 };

constexpr double kMinImprovement = 1e-6;

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (patience > max_epochs) throw ConfigError("patience must not exceed max_epochs");
}

std::string to_jsonl(const EpochLog& log) {
  nlohmann::ordered_json j;
  j["epoch"] = log.epoch;
  j["val_precision"] = log.val.precision;
  j["val_recall"] = log.val.recall;
  j["val_f1"] = log.val.f1;
  return j.dump();
}

Dataset upsample(const Dataset& d, Rng& rng) {
  std::vector<std::size_t> positives;
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Sentence& s = d.sentences[i];
    if (!s.label) throw DataError("upsample: sentence '" + s.id + "' has no label");
    if (*s.label == 1) positives.push_back(i);
    else ++negatives;
  }
  if (positives.empty() || negatives == 0) {
    throw DataError("upsample: dataset '" + d.name + "' contains a single class");
  }
  Dataset out = d;
  if (positives.size() >= negatives) return out;
  const std::size_t needed = negatives - positives.size();
  out.sentences.reserve(d.size() + needed);
  for (std::size_t k = 0; k < needed; ++k) {
    Sentence copy = d.sentences[positives[rng.below(positives.size())]];
    if (copy.origin.empty()) copy.origin = copy.id;
    copy.id += "#up" + std::to_string(k + 1);
    out.sentences.push_back(std::move(copy));
  }
  return out;
}

std::vector<Prediction> predict_all(const ModelParams& m, const EmbeddingSource& src, const Dataset& d) {
  std::vector<Prediction> out;
  out.reserve(d.size());
  for (const Sentence& s : d.sentences) out.push_back(predict(m, src, s));
  return out;
}

LabelMap predict_labels(const ModelParams& m, const EmbeddingSource& src, const Dataset& d) {
  LabelMap out;
  for (const Sentence& s : d.sentences) out[s.id] = predict(m, src, s).label;
  return out;
}

Metrics evaluate(const ModelParams& m, const EmbeddingSource& src, const Dataset& d) {
  if (d.empty()) throw DataError("evaluate: dataset '" + d.name + "' is empty");
  std::vector<int> gold, pred;
  gold.reserve(d.size());
  pred.reserve(d.size());
  for (const Sentence& s : d.sentences) {
    if (!s.label) throw DataError("evaluate: sentence '" + s.id + "' has no label");
    gold.push_back(*s.label);
    pred.push_back(predict(m, src, s).label);
  }
  return score(gold, pred);
}

TrainResult train_supervised(const ArchConfig& arch, const EmbeddingSource& src, const Dataset& train,
                             const Dataset& val, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw DataError("train_supervised: training set is empty");
  for (const Sentence& s : train.sentences) {
    if (!s.label) throw DataError("train_supervised: training sentence '" + s.id + "' has no label");
  }
  if (val.empty() || count_positive(val) == 0) {
    throw DataError("train_supervised: validation set needs at least one positive sentence");
  }
  if (input_dim(arch) != src.dim()) {
    throw ConfigError("architecture expects " + std::to_string(input_dim(arch)) +
                      "-d inputs but the embedding source has dimension " + std::to_string(src.dim()));
  }

  Dataset data = train;
  if (cfg.upsample) {
    Rng up(derive_seed(cfg.seed, {kUpsample}));
    data = upsample(train, up);
  }

  Rng init_rng(derive_seed(cfg.seed, {kInit}));
  ModelParams model = init_params(arch, init_rng, src.dropout_rate());
  model.seed = cfg.seed;

  std::vector<Tensor> inputs;
  inputs.reserve(data.size());
  for (const Sentence& s : data.sentences) inputs.push_back(src.embed(s));

  Rng shuffle_rng(derive_seed(cfg.seed, {kShuffle}));
  Rng dropout_rng(derive_seed(cfg.seed, {kDropout}));
  Adam adam(model.parameters, AdamHyper{.lr = cfg.lr});

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.model = model;
  double best_f1 = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      Tape tape;
      Var out = forward(tape, model, inputs[idx], true, dropout_rng);
      Var loss = softmax_cross_entropy(out, *data.sentences[idx].label);
      loss_sum += loss.value()[0];
      tape.backward(loss);
      adam.step(model.parameters);
    }

    EpochLog log;
    log.epoch = epoch;
    log.val = evaluate(model, src, val);
    log.train_loss = loss_sum / static_cast<double>(order.size());
    result.epochs.push_back(log);

    if (log.val.f1 > best_f1 + kMinImprovement) {
      best_f1 = log.val.f1;
      result.model = model;
      result.val_metrics = log.val;
      result.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
    }
    if (stale >= cfg.patience) break;
  }
  return result;
}

}  // namespace tritrain
