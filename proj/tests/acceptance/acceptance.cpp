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

// Acceptance checks for the toolkit. Prints one PASS or FAIL line per
// criterion and exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "tritrain/grad_check.hpp"
#include "tritrain/models.hpp"
#include "tritrain/stats.hpp"
#include "tritrain/tape.hpp"
#include "tritrain/training.hpp"
#include "tritrain/tritrain.hpp"

namespace fs = std::filesystem;
using namespace tritrain;
using namespace tritrain::testing;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradEps = 1e-4;
constexpr double kGradBudgetSeconds = 120.0;
constexpr std::size_t kGradSentences = 20;
constexpr double kMcNemarOracleTolerance = 1e-12;
constexpr double kMcNemarFixture = 0.03857;
constexpr double kMcNemarFixtureTolerance = 1e-5;
constexpr std::size_t kTrendSeeds = 5;
constexpr std::size_t kTrendMinWins = 4;
constexpr double kTrendMinGain = 5.0;  // F1 points
constexpr double kTrendBudgetSeconds = 600.0;
constexpr std::uint64_t kTrendFixtureSeed = 7;
constexpr double kT975Df4 = 2.776445105;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Gradient check on 20 random sentences with lengths 5..15, dropout off.
// Coordinates are sampled per parameter tensor: a full sweep of the CNN
// would need millions of forward passes per sentence.
Outcome gradient_check() {
  const auto start = Clock::now();
  struct Case {
    const char* name;
    ArchConfig arch;
    std::size_t samples;
  };
  const Case cases[] = {{"dan-300", DanConfig::for_input(300), 24}, {"cnn-768", CnnConfig{}, 6}};
  std::string detail;
  bool pass = true;
  for (const Case& c : cases) {
    Rng rng(derive_seed(2024, {static_cast<std::uint64_t>(input_dim(c.arch))}));
    ModelParams m = init_params(c.arch, rng);
    std::vector<Parameter*> ps;
    for (Parameter& p : m.parameters) ps.push_back(&p);
    double worst = 0.0;
    std::size_t checked = 0, kinks = 0;
    for (std::size_t k = 0; k < kGradSentences; ++k) {
      const std::size_t len = 5 + rng.below(11);
      const Tensor x = random_matrix(len, input_dim(c.arch), rng);
      const int label = static_cast<int>(rng.below(2));
      GradCheckOptions opts;
      opts.eps = kGradEps;
      opts.samples_per_param = c.samples;
      opts.seed = derive_seed(k, {0x6763});
      Rng unused(0);
      const GradCheckReport r = grad_check(
          [&](Tape& t) { return softmax_cross_entropy(forward(t, m, x, false, unused), label); }, ps, opts);
      worst = std::max(worst, r.max_rel_error);
      checked += r.checked;
      kinks += r.skipped_at_kinks;
    }
    pass = pass && worst < kGradTolerance;
    detail += fmt("%s max rel error %.2e over %zu coordinates (%zu kink redraws); ", c.name, worst, checked, kinks);
  }
  const double secs = seconds_since(start);
  pass = pass && secs < kGradBudgetSeconds;
  detail += fmt("tolerance %.0e, %.0fs of %.0fs budget", kGradTolerance, secs, kGradBudgetSeconds);
  return {pass, detail};
}

std::size_t dense_count(std::size_t in, const std::vector<std::size_t>& widths) {
  std::size_t total = 0;
  for (std::size_t w : widths) {
    total += in * w + w;
    in = w;
  }
  return total;
}

Outcome shapes() {
  std::vector<std::string> bad;
  const CnnConfig cnn;
  Rng rng(1);
  const ModelParams cm = init_params(cnn, rng);
  Tape tape;
  Rng unused(0);
  const Var pooled = cnn_pooled(tape, cm, random_matrix(9, 768, rng), false, unused);
  const std::size_t pooled_len = pooled.value().size();
  if (pooled_len != 768 || cnn.filter_widths.size() != 4 || cnn.filters_per_width != 192) bad.push_back("cnn pooled");
  std::size_t conv = 0;
  for (std::size_t w : cnn.filter_widths) conv += w * 768 * 192 + 192;
  const std::size_t cnn_expected = conv + dense_count(768, cnn.head_hidden);
  if (cm.parameter_count() != cnn_expected) bad.push_back("cnn count");

  const DanConfig d300 = DanConfig::for_input(300), d768 = DanConfig::for_input(768);
  if (d300.hidden != std::vector<std::size_t>{300, 150, 75, 2}) bad.push_back("dan-300 widths");
  if (d768.hidden != std::vector<std::size_t>{768, 324, 162, 2}) bad.push_back("dan-768 widths");
  const std::size_t n300 = init_params(d300, rng).parameter_count();
  const std::size_t n768 = init_params(d768, rng).parameter_count();
  if (n300 != dense_count(300, d300.hidden)) bad.push_back("dan-300 count");
  if (n768 != dense_count(768, d768.hidden)) bad.push_back("dan-768 count");

  std::string detail = fmt("pooled %zu (4 x 192); params cnn %zu, dan-300 %zu, dan-768 %zu", pooled_len,
                           cm.parameter_count(), n300, n768);
  for (const auto& b : bad) detail += "; mismatch " + b;
  return {bad.empty(), detail};
}

// Two-sided exact binomial p from integer binomial coefficients.
long double brute_force_mcnemar(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0L;
  std::vector<std::uint64_t> row = {1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next(row.size() + 1, 0);
    for (std::size_t k = 0; k < row.size(); ++k) {
      next[k] += row[k];
      next[k + 1] += row[k];
    }
    row = std::move(next);
  }
  std::uint64_t tail = 0;
  for (std::size_t k = 0; k <= std::min(b, c); ++k) tail += row[k];
  return std::min(1.0L, 2.0L * static_cast<long double>(tail) / std::ldexp(1.0L, static_cast<int>(n)));
}

Outcome mcnemar_oracle() {
  double worst = 0.0;
  bool equal_is_one = true;
  for (std::size_t b = 0; b <= 20; ++b) {
    for (std::size_t c = 0; b + c <= 20; ++c) {
      const double p = mcnemar_exact_p(b, c);
      worst = std::max(worst, static_cast<double>(std::fabs(static_cast<long double>(p) - brute_force_mcnemar(b, c))));
      if (b == c && p != 1.0) equal_is_one = false;
    }
  }
  const double fixture = mcnemar_from_counts(10, 2).p_exact;
  const bool pass = worst < kMcNemarOracleTolerance && std::fabs(fixture - kMcNemarFixture) < kMcNemarFixtureTolerance &&
                    equal_is_one;
  return {pass, fmt("max |p - oracle| %.1e over b+c <= 20; b=10,c=2 gives %.6f; b=c gives 1: %s", worst, fixture,
                    equal_is_one ? "yes" : "no")};
}

std::multiset<std::string> gold_ids(const Dataset& d) {
  std::multiset<std::string> ids;
  for (const Sentence& s : d.sentences) {
    if (s.source == Provenance::gold) ids.insert(s.id);
  }
  return ids;
}

Outcome tritrain_invariants() {
  DomainShiftOptions o;
  o.dim = 12;
  o.n_source = 80;
  o.n_unlabelled = 80;
  o.n_val = 40;
  o.n_test = 10;
  std::size_t rounds = 0, violations = 0;
  for (std::uint64_t seed : {11u, 12u}) {
    const DomainShift f = make_domain_shift(seed, o);
    const EmbeddingSource src = f.embedding_source();
    TrainConfig cfg;
    cfg.max_epochs = 4;
    cfg.patience = 1;
    cfg.seed = seed;
    TriTrainOptions opts;
    opts.max_iters = 4;
    const std::multiset<std::string> labelled = gold_ids(f.source);
    opts.observer = [&](const RoundView& view) {
      ++rounds;
      std::set<std::string> joined;
      for (const Dataset& li : view.rebuilt) {
        if (gold_ids(li) != labelled) ++violations;
        if (li.size() > f.source.size() + f.unlabelled.size()) ++violations;
        for (const Sentence& s : li.sentences) {
          if (s.source == Provenance::pseudo) joined.insert(s.id);
        }
      }
      if (joined.size() != f.unlabelled.size()) ++violations;
    };
    tri_train(DanConfig::for_input(o.dim), src, f.source, f.unlabelled, f.val, cfg, opts);
  }
  return {violations == 0 && rounds > 0,
          fmt("%zu rounds over 2 fixtures, %zu violations of coverage, gold portion or size bound", rounds,
              violations)};
}

Outcome domain_shift_trend() {
  const auto start = Clock::now();
  const DomainShift f = make_domain_shift(kTrendFixtureSeed);
  const EmbeddingSource src = f.embedding_source();
  const ArchConfig arch = DanConfig::for_input(f.table->dim());
  std::size_t wins = 0;
  double gain = 0.0;
  std::string runs;
  for (std::uint64_t seed = 1; seed <= kTrendSeeds; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    const TrainResult base = train_supervised(arch, src, f.source, f.val, cfg);
    const double base_f1 = 100.0 * score(predict_labels(base.model, src, f.test), f.test).f1;
    const TriTrainResult tri = tri_train(arch, src, f.source, f.unlabelled, f.val, cfg);
    const double tri_f1 = 100.0 * score(majority_vote(tri.models, src, f.test), f.test).f1;
    wins += tri_f1 > base_f1;
    gain += tri_f1 - base_f1;
    runs += fmt(" %.1f->%.1f", base_f1, tri_f1);
  }
  gain /= static_cast<double>(kTrendSeeds);
  const double secs = seconds_since(start);
  const bool pass = wins >= kTrendMinWins && gain >= kTrendMinGain && secs < kTrendBudgetSeconds;
  return {pass, fmt("tri-training beats the supervised model in %zu of %zu seeds, mean gain %.2f F1 points "
                    "(need %zu and %.1f); test F1 per seed:%s; %.0fs of %.0fs budget",
                    wins, kTrendSeeds, gain, kTrendMinWins, kTrendMinGain, runs.c_str(), secs, kTrendBudgetSeconds)};
}

Outcome upsampling() {
  std::vector<int> labels(100, 0);
  std::fill(labels.begin(), labels.begin() + 23, 1);
  Rng rng(23);
  const Dataset up = upsample(make_labelled(labels), rng);
  const double rate = static_cast<double>(count_positive(up)) / static_cast<double>(up.size());
  bool exact = count_positive(up) * 2 == up.size();
  // Random imbalanced sets balance exactly too.
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(60);
    const std::size_t pos = 1 + rng.below((n - 1) / 2);  // 1 <= pos < n - pos
    std::vector<int> l(n, 0);
    std::fill(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(pos), 1);
    const Dataset u = upsample(make_labelled(l), rng);
    exact = exact && count_positive(u) * 2 == u.size() && u.size() == 2 * (n - pos);
  }
  return {exact && rate == 0.5,
          fmt("23 of 100 positive becomes %zu of %zu (%.1f%%); 50 random imbalanced sets balanced: %s",
              count_positive(up), up.size(), 100.0 * rate, exact ? "yes" : "no")};
}

struct CliRun {
  int code;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, err.str()};
}

nlohmann::json base_config() {
  return {{"arch", "dan"},
          {"embedding", {{"type", "static"}, {"path", "embeddings.txt"}, {"dim", 12}}},
          {"train", "source.csv"},
          {"val", "val.csv"},
          {"test", "test.csv"},
          {"unlabelled", "unlabelled.csv"},
          {"seeds", {1, 2}},
          {"max_epochs", 5},
          {"patience", 2},
          {"max_iters", 4}};
}

void write_small_fixture(const fs::path& dir) {
  DomainShiftOptions o;
  o.dim = 12;
  o.n_source = 100;
  o.n_unlabelled = 100;
  o.n_val = 40;
  o.n_test = 60;
  write_domain_shift(dir, make_domain_shift(5, o));
}

Outcome determinism() {
  TempDir dir("accept-det");
  write_small_fixture(dir.path());
  write_text(dir / "config.json", base_config().dump(2));
  const std::string cfg = (dir / "config.json").string();
  const CliRun a = run_cli({"tritrain", cfg, "--output-dir", (dir / "a").string(), "--jobs", "1"});
  const CliRun b = run_cli({"tritrain", cfg, "--output-dir", (dir / "b").string(), "--jobs", "2"});
  if (a.code != 0 || b.code != 0) return {false, "tritrain failed: " + a.err + b.err};
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const char* seed : {"seed-1", "seed-2"}) {
    for (const char* file : {"iterations.jsonl", "val_predictions.csv", "test_predictions.csv"}) {
      const fs::path rel = fs::path(seed) / file;
      ++compared;
      if (read_text(dir / "a" / rel) != read_text(dir / "b" / rel)) differing.push_back(rel.string());
    }
  }
  std::string detail = fmt("%zu iteration logs and prediction files compared across two runs (jobs 1 and 2)", compared);
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty(), detail};
}

Outcome reporting() {
  TempDir dir("accept-report");
  write_small_fixture(dir.path());
  nlohmann::json config = base_config();
  config["seeds"] = {1, 2, 3, 4, 5};
  config["output_dir"] = "out";
  write_text(dir / "config.json", config.dump(2));
  const CliRun r = run_cli({"train", (dir / "config.json").string()});
  if (r.code != 0) return {false, "train failed: " + r.err};
  const auto summary = nlohmann::json::parse(read_text(dir / "out" / "summary.json"));
  std::size_t checkpoints = 0;
  for (int s = 1; s <= 5; ++s) checkpoints += fs::exists(dir / "out" / ("seed-" + std::to_string(s)) / "model.json");

  // Recompute the interval from the per-seed test F1 values.
  std::vector<double> f1;
  for (const auto& run : summary["runs"]) f1.push_back(run["test"]["f1"].get<double>());
  double mean = 0.0;
  for (double v : f1) mean += v;
  mean /= static_cast<double>(f1.size());
  double ss = 0.0;
  for (double v : f1) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 4.0);
  const double expected = kT975Df4 * sd / std::sqrt(5.0);
  const auto& ci = summary["aggregate"]["test"]["f1"];
  if (f1.size() != 5 || ci["half_width"].is_null()) return {false, "summary lacks five runs or an interval"};
  const double got_mean = ci["mean"].get<double>(), got_hw = ci["half_width"].get<double>();
  const bool pass = checkpoints == 5 && std::fabs(got_mean - mean) < 1e-12 &&
                    std::fabs(got_hw - expected) <= 1e-9 * std::max(1.0, expected);
  return {pass, fmt("5 checkpoints: %s; test F1 %.4f +/- %.4f, expected half-width %.4f from t = %.9f",
                    checkpoints == 5 ? "yes" : "no", got_mean, got_hw, expected, kT975Df4)};
}

}  // namespace

int main() {
  ::unsetenv("TRITRAIN_SEED");
  report("gradient correctness", gradient_check);
  report("shape and architecture", shapes);
  report("mcnemar oracle equivalence", mcnemar_oracle);
  report("tri-training invariants", tritrain_invariants);
  report("domain-shift trend", domain_shift_trend);
  report("upsampling balance", upsampling);
  report("tritrain determinism", determinism);
  report("reporting intervals", reporting);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
