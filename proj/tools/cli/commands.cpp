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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "artifacts.hpp"
#include "json.hpp"
#include "tritrain/checkpoint.hpp"
#include "tritrain/error.hpp"
#include "tritrain/stats.hpp"
#include "tritrain/tritrain.hpp"

namespace tritrain::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void Io::info(const std::string& line) {
  std::lock_guard lock(mu);
  out << line << '\n';
}

void Io::warn(const std::string& line) {
  std::lock_guard lock(mu);
  err << "warning: " << line << '\n';
}

void Overrides::apply(RunConfig& cfg) const {
  if (!seeds.empty()) cfg.seeds = seeds;
  if (output_dir) cfg.output_dir = *output_dir;
  if (jobs) cfg.jobs = *jobs;
  if (arch) cfg.arch = *arch;
  if (lr) cfg.train_config.lr = *lr;
  if (max_epochs) cfg.train_config.max_epochs = *max_epochs;
  if (patience) cfg.train_config.patience = *patience;
  if (max_iters) cfg.max_iters = *max_iters;
  if (no_upsample) cfg.train_config.upsample = false;
}

RunConfig effective_config(const fs::path& config_path, const Overrides& overrides) {
  RunConfig cfg = load_run_config(config_path);
  apply_seed_env(cfg);
  overrides.apply(cfg);
  return cfg;
}

namespace {

// Runs fn(0..n-1) on at most `jobs` threads. The first exception is rethrown
// after every worker has stopped.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Json metrics_json(const Metrics& m) {
  Json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  return j;
}

Json interval_json(const std::vector<double>& values) {
  const MeanInterval ci = mean_confidence_interval(values, 0.95);
  Json j;
  j["mean"] = ci.mean;
  j["half_width"] = ci.half_width ? Json(*ci.half_width) : Json(nullptr);
  j["n"] = ci.n;
  return j;
}

// Mean and 95% t-interval of precision, recall and F1 across runs.
Json aggregate_json(const std::vector<Metrics>& runs) {
  std::vector<double> p, r, f;
  for (const Metrics& m : runs) {
    p.push_back(m.precision);
    r.push_back(m.recall);
    f.push_back(m.f1);
  }
  Json j;
  j["precision"] = interval_json(p);
  j["recall"] = interval_json(r);
  j["f1"] = interval_json(f);
  return j;
}

std::string format_interval(const Json& ci) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << ci["mean"].get<double>();
  if (!ci["half_width"].is_null()) s << " +/- " << ci["half_width"].get<double>();
  return s.str();
}

std::string fixed4(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << v;
  return s.str();
}

Metrics score_predictions(const Dataset& d, const std::vector<Prediction>& preds) {
  std::vector<int> gold, pred;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.sentences[i].label) throw DataError(d.name + ": sentence '" + d.sentences[i].id + "' has no label");
    gold.push_back(*d.sentences[i].label);
    pred.push_back(preds[i].label);
  }
  return score(gold, pred);
}

// Every sentence must embed before training starts, so a misaligned
// contextual store fails fast with the offending id.
void check_embeddable(const EmbeddingSource& src, const Dataset& d) {
  for (const Sentence& s : d.sentences) src.embed(s);
}

struct Inputs {
  EmbeddingSource src;
  ArchConfig arch;
  Dataset train;
  Dataset val;
  std::optional<Dataset> test;
  Dataset unlabelled;
};

Dataset load_labelled(const fs::path& path, const std::string& name) {
  Dataset d = load_dataset(path, true);
  d.name = name;
  return d;
}

// A zero-byte file and a header-only file both count as an empty set.
Dataset load_unlabelled(const fs::path& path) {
  Dataset d;
  if (fs::file_size(path) > 0) d = load_dataset(path, false);
  d.name = "unlabelled";
  return d;
}

Inputs load_inputs(const RunConfig& cfg, bool tri, Io& io) {
  validate_run_config(cfg, tri);
  const ArchConfig arch = build_arch(cfg);
  Inputs in{open_embeddings(cfg.embedding), arch, {}, {}, {}, {}};
  in.train = load_labelled(cfg.train, "train");
  if (cfg.filter_short) {
    const std::size_t before = in.train.size();
    in.train = filter_short(in.train, cfg.min_tokens);
    if (in.train.size() < before) {
      io.info("dropped " + std::to_string(before - in.train.size()) + " training sentences with fewer than " +
              std::to_string(cfg.min_tokens) + " tokens");
    }
  }
  if (in.train.empty()) throw DataError("training set '" + cfg.train.string() + "' has no sentences");
  in.val = load_labelled(cfg.val, "val");
  if (in.val.empty()) throw DataError("validation set '" + cfg.val.string() + "' has no sentences");
  if (cfg.test) in.test = load_labelled(*cfg.test, "test");
  if (tri) {
    in.unlabelled = load_unlabelled(*cfg.unlabelled);
    if (cfg.filter_short) in.unlabelled = filter_short(in.unlabelled, cfg.min_tokens);
    if (in.unlabelled.empty()) {
      io.warn("unlabelled set is empty; each learner trains on its bootstrap sample of the labelled data only");
    }
  }
  check_embeddable(in.src, in.train);
  check_embeddable(in.src, in.val);
  if (in.test) check_embeddable(in.src, *in.test);
  check_embeddable(in.src, in.unlabelled);
  return in;
}

std::string seed_dir(std::uint64_t seed) { return "seed-" + std::to_string(seed); }

void save_model(const ModelParams& m, const fs::path& path, ArtifactLog& log) {
  fs::create_directories(path.parent_path());
  save_checkpoint(m, path);
  log.add(path);
  log.add(fs::path(path).replace_extension(".bin"));
}

void save_predictions(const fs::path& path, const Dataset& d, const std::vector<Prediction>& preds,
                      ArtifactLog& log) {
  write_predictions(path, d, preds);
  log.add(path);
}

void save_text(const fs::path& path, const std::string& text, ArtifactLog& log) {
  write_file(path, text);
  log.add(path);
}

// Evaluation splits of one run: predictions and scores on val and, when
// configured, test.
struct SplitResults {
  std::vector<Prediction> val;
  std::optional<std::vector<Prediction>> test;
  Metrics val_metrics;
  std::optional<Metrics> test_metrics;
};

template <class PredictFn>
SplitResults score_splits(const Inputs& in, const fs::path& dir, PredictFn predict, ArtifactLog& log) {
  SplitResults r;
  r.val = predict(in.val);
  r.val_metrics = score_predictions(in.val, r.val);
  save_predictions(dir / "val_predictions.csv", in.val, r.val, log);
  if (in.test) {
    r.test = predict(*in.test);
    r.test_metrics = score_predictions(*in.test, *r.test);
    save_predictions(dir / "test_predictions.csv", *in.test, *r.test, log);
  }
  return r;
}

Json split_json(const SplitResults& r) {
  Json j;
  j["val"] = metrics_json(r.val_metrics);
  j["test"] = r.test_metrics ? metrics_json(*r.test_metrics) : Json(nullptr);
  return j;
}

// Majority over seeds (odd seed counts only); prob is the mean of the runs'
// probabilities.
std::vector<Prediction> vote_over_seeds(const Dataset& d, const std::vector<const std::vector<Prediction>*>& runs) {
  std::vector<LabelMap> maps;
  for (const auto* preds : runs) {
    LabelMap m;
    for (std::size_t i = 0; i < d.size(); ++i) m.emplace(d.sentences[i].id, (*preds)[i].label);
    maps.push_back(std::move(m));
  }
  const LabelMap voted = seed_majority(maps);
  std::vector<Prediction> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    out[i].label = voted.at(d.sentences[i].id);
    double prob = 0.0;
    for (const auto* preds : runs) prob += (*preds)[i].prob;
    out[i].prob = prob / static_cast<double>(runs.size());
  }
  return out;
}

// Writes the summary shared by train and tritrain: per-run rows, aggregate
// intervals, and the seed-majority ensemble when the seed count is odd.
void write_summary(const std::string& command, const RunConfig& cfg, const Inputs& in,
                   const std::vector<SplitResults>& results, std::vector<Json> run_rows, ArtifactLog& log,
                   Io& io) {
  Json summary;
  summary["command"] = command;
  summary["arch"] = cfg.arch;
  summary["seeds"] = cfg.seeds;
  summary["confidence"] = 0.95;
  for (std::size_t i = 0; i < results.size(); ++i) {
    Json row = std::move(run_rows[i]);
    Json split = split_json(results[i]);
    row["val"] = split["val"];
    row["test"] = split["test"];
    run_rows[i] = std::move(row);
  }
  summary["runs"] = run_rows;

  std::vector<Metrics> val, test;
  for (const SplitResults& r : results) {
    val.push_back(r.val_metrics);
    if (r.test_metrics) test.push_back(*r.test_metrics);
  }
  Json aggregate;
  aggregate["val"] = aggregate_json(val);
  aggregate["test"] = in.test ? aggregate_json(test) : Json(nullptr);
  summary["aggregate"] = aggregate;

  if (results.size() % 2 == 1 && results.size() > 1) {
    const fs::path dir = cfg.output_dir / "seed-majority";
    std::vector<const std::vector<Prediction>*> val_runs, test_runs;
    for (const SplitResults& r : results) {
      val_runs.push_back(&r.val);
      if (r.test) test_runs.push_back(&*r.test);
    }
    SplitResults voted;
    voted.val = vote_over_seeds(in.val, val_runs);
    voted.val_metrics = score_predictions(in.val, voted.val);
    save_predictions(dir / "val_predictions.csv", in.val, voted.val, log);
    if (in.test) {
      voted.test = vote_over_seeds(*in.test, test_runs);
      voted.test_metrics = score_predictions(*in.test, *voted.test);
      save_predictions(dir / "test_predictions.csv", *in.test, *voted.test, log);
    }
    summary["seed_majority"] = split_json(voted);
  } else {
    summary["seed_majority"] = nullptr;
  }
  save_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n", log);

  io.info("val F1  " + format_interval(aggregate["val"]["f1"]));
  if (in.test) io.info("test F1 " + format_interval(aggregate["test"]["f1"]));
  io.info("summary written to " + (cfg.output_dir / "summary.json").string());
}

void start_run(const RunConfig& cfg, ArtifactLog& log) {
  fs::create_directories(cfg.output_dir);
  save_text(cfg.output_dir / "config.json", to_json(cfg) + "\n", log);
}

}  // namespace

int cmd_preprocess(const PreprocessOptions& opts, Io& io) {
  if (!fs::is_regular_file(opts.in)) throw DataError("input file '" + opts.in.string() + "' does not exist");
  const bool labels = has_label_column(opts.in);
  Dataset d = load_dataset(opts.in, labels);
  const std::size_t total = d.size();
  if (opts.filter_short) d = filter_short(d, opts.min_tokens);
  if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());
  write_dataset(opts.out, d, WriteOptions{labels, false});
  if (d.empty() && total > 0) {
    io.warn("every sentence has fewer than " + std::to_string(opts.min_tokens) +
            " tokens; wrote the header only to " + opts.out.string());
  }
  io.info("kept " + std::to_string(d.size()) + " of " + std::to_string(total) + " sentences");
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, Io& io) {
  const Inputs in = load_inputs(cfg, false, io);
  ArtifactLog log(cfg.output_dir);
  start_run(cfg, log);

  std::vector<SplitResults> results(cfg.seeds.size());
  std::vector<Json> rows(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const fs::path dir = cfg.output_dir / seed_dir(seed);
    TrainConfig tc = cfg.train_config;
    tc.seed = seed;
    const TrainResult res = train_supervised(in.arch, in.src, in.train, in.val, tc);
    save_model(res.model, dir / "model.json", log);
    std::string epochs;
    for (const EpochLog& e : res.epochs) epochs += to_jsonl(e) + "\n";
    save_text(dir / "epochs.jsonl", epochs, log);
    results[i] = score_splits(in, dir, [&](const Dataset& d) { return predict_all(res.model, in.src, d); }, log);

    Json row;
    row["seed"] = seed;
    row["best_epoch"] = res.best_epoch;
    row["epochs_run"] = res.epochs.size();
    Json metrics = row;
    const Json split = split_json(results[i]);
    metrics["val"] = split["val"];
    metrics["test"] = split["test"];
    save_text(dir / "metrics.json", metrics.dump(2) + "\n", log);
    rows[i] = std::move(row);
    io.info("seed " + std::to_string(seed) + ": best epoch " + std::to_string(res.best_epoch) + ", val F1 " +
            fixed4(results[i].val_metrics.f1) +
            (results[i].test_metrics ? ", test F1 " + fixed4(results[i].test_metrics->f1) : ""));
  });

  write_summary("train", cfg, in, results, std::move(rows), log, io);
  log.write_manifest();
  return kExitOk;
}

int cmd_tritrain(const RunConfig& cfg, Io& io) {
  const Inputs in = load_inputs(cfg, true, io);
  ArtifactLog log(cfg.output_dir);
  start_run(cfg, log);

  // Seeds share the job budget; a single seed spends it on its three learners.
  const std::size_t inner_jobs = cfg.seeds.size() == 1 ? std::min<std::size_t>(cfg.jobs, 3) : 1;
  std::vector<SplitResults> results(cfg.seeds.size());
  std::vector<Json> rows(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const fs::path dir = cfg.output_dir / seed_dir(seed);
    TrainConfig tc = cfg.train_config;
    tc.seed = seed;
    TriTrainOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.jobs = inner_jobs;
    const TriTrainResult res = tri_train(in.arch, in.src, in.train, in.unlabelled, in.val, tc, opts);

    for (std::size_t m = 0; m < 3; ++m) {
      const std::string k = std::to_string(m + 1);
      save_model(res.models[m], dir / ("learner" + k + ".json"), log);
      const fs::path pseudo = dir / ("pseudo_l" + k + ".csv");
      write_dataset(pseudo, res.pseudo_labelled[m], WriteOptions{true, true});
      log.add(pseudo);
    }
    std::string iterations;
    for (const IterationLog& it : res.log) iterations += to_jsonl(it) + "\n";
    save_text(dir / "iterations.jsonl", iterations, log);
    results[i] = score_splits(
        in, dir, [&](const Dataset& d) { return majority_predictions(res.models, in.src, d); }, log);

    Json row;
    row["seed"] = seed;
    row["best_iteration"] = res.best_iteration;
    row["iterations_run"] = res.log.size();
    row["best_val_f1"] = res.best_val_f1;
    std::array<std::size_t, 3> pseudo_sizes{};
    for (std::size_t m = 0; m < 3; ++m) {
      for (const Sentence& s : res.pseudo_labelled[m].sentences) pseudo_sizes[m] += s.source == Provenance::pseudo;
    }
    row["pseudo_labelled"] = pseudo_sizes;
    Json metrics = row;
    const Json split = split_json(results[i]);
    metrics["val"] = split["val"];
    metrics["test"] = split["test"];
    save_text(dir / "metrics.json", metrics.dump(2) + "\n", log);
    rows[i] = std::move(row);
    io.info("seed " + std::to_string(seed) + ": best iteration " + std::to_string(res.best_iteration) + " of " +
            std::to_string(res.log.size()) + ", val F1 " + fixed4(results[i].val_metrics.f1) +
            (results[i].test_metrics ? ", test F1 " + fixed4(results[i].test_metrics->f1) : ""));
  });

  write_summary("tritrain", cfg, in, results, std::move(rows), log, io);
  log.write_manifest();
  return kExitOk;
}

int cmd_predict(const PredictOptions& opts, Io& io) {
  if (opts.models.size() != 1 && opts.models.size() != 3) {
    throw ConfigError("predict takes one checkpoint or three (a tri-training triple)");
  }
  std::vector<ModelParams> models;
  for (const fs::path& p : opts.models) models.push_back(load_checkpoint(p));
  const std::size_t width = input_dim(models.front().config);
  for (const ModelParams& m : models) {
    if (input_dim(m.config) != width) throw ConfigError("checkpoints disagree on the input width");
  }

  EmbeddingSpec spec;
  if (opts.config) {
    if (!opts.embeddings.empty()) throw ConfigError("give either --config or --embeddings, not both");
    spec = load_run_config(*opts.config).embedding;
  } else {
    if (opts.embeddings.empty()) throw ConfigError("predict needs --embeddings or --config");
    spec.type = opts.embedding_type;
    spec.paths = opts.embeddings;
    spec.dim = opts.embedding_dim.value_or(width);
  }
  if (spec.dim != width) {
    throw ConfigError("embedding width " + std::to_string(spec.dim) + " does not match the model input width " +
                      std::to_string(width));
  }
  for (const fs::path& p : spec.paths) {
    if (!fs::is_regular_file(p)) throw ConfigError("embedding file '" + p.string() + "' does not exist");
  }
  const EmbeddingSource src = open_embeddings(spec);
  if (!fs::is_regular_file(opts.data)) throw DataError("data file '" + opts.data.string() + "' does not exist");
  const Dataset d = load_dataset(opts.data, false);

  std::vector<Prediction> preds;
  if (models.size() == 1) {
    preds = predict_all(models.front(), src, d);
  } else {
    const ModelTriple triple = {models[0], models[1], models[2]};
    preds = majority_predictions(triple, src, d);
  }
  write_predictions(opts.out, d, preds);
  io.info("wrote " + std::to_string(preds.size()) + " predictions to " + opts.out.string());
  return kExitOk;
}

int cmd_evaluate(const fs::path& preds, const fs::path& gold_path, bool json, Io& io) {
  const LabelMap predicted = read_predictions(preds);
  const Dataset gold = load_dataset(gold_path, true);
  if (predicted.size() != gold.size()) {
    throw DataError("prediction file covers " + std::to_string(predicted.size()) + " ids, gold has " +
                    std::to_string(gold.size()));
  }
  const Metrics m = score(predicted, gold);
  if (json) {
    io.info(metrics_json(m).dump());
  } else {
    io.info("precision " + fixed4(m.precision));
    io.info("recall    " + fixed4(m.recall));
    io.info("f1        " + fixed4(m.f1));
    io.info("tp " + std::to_string(m.tp) + "  fp " + std::to_string(m.fp) + "  fn " + std::to_string(m.fn) +
            "  tn " + std::to_string(m.tn));
  }
  return kExitOk;
}

int cmd_compare(const fs::path& preds_a, const fs::path& preds_b, const fs::path& gold_path, bool json, Io& io) {
  const LabelMap a = read_predictions(preds_a);
  const LabelMap b = read_predictions(preds_b);
  const Dataset gold = load_dataset(gold_path, true);
  const McNemarResult r = mcnemar(a, b, gold);
  if (json) {
    io.info(to_json(r));
  } else {
    std::lock_guard lock(io.mu);
    io.out << format_table(r, preds_a.string(), preds_b.string());
  }
  return kExitOk;
}

}  // namespace tritrain::cli
