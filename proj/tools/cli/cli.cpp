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

#include "cli.hpp"

#include <algorithm>
#include <exception>

#include "CLI11.hpp"
#include "commands.hpp"
#include "tritrain/error.hpp"

namespace tritrain::cli {

namespace fs = std::filesystem;

namespace {

void add_run_flags(CLI::App* cmd, Overrides& o, bool tri) {
  cmd->add_option("--seed", o.seeds, "Seeds to run (replaces the config's seed list)");
  cmd->add_option("--output-dir", o.output_dir, "Directory for every artifact of the run");
  cmd->add_option("--jobs", o.jobs, "Seeds trained concurrently")->check(CLI::PositiveNumber);
  cmd->add_option("--arch", o.arch, "Architecture: dan or cnn");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--max-epochs", o.max_epochs, "Epoch cap per training run");
  cmd->add_option("--patience", o.patience, "Epochs without validation gain before stopping");
  cmd->add_flag("--no-upsample", o.no_upsample, "Train on the class distribution as given");
  if (tri) cmd->add_option("--max-iters", o.max_iters, "Tri-training round cap");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semi-supervised sentence classification with tri-training", "tritrain"};
  app.require_subcommand(1);

  PreprocessOptions pre;
  auto* preprocess = app.add_subcommand("preprocess", "Clean and tokenise a raw CSV");
  preprocess->add_option("input", pre.in, "Raw CSV with id, sentence and optional label columns")->required();
  preprocess->add_option("output", pre.out, "Cleaned CSV to write")->required();
  preprocess->add_flag("--filter-short", pre.filter_short, "Drop sentences below --min-tokens tokens");
  preprocess->add_option("--min-tokens", pre.min_tokens, "Minimum kept length")->capture_default_str();

  fs::path train_config, tri_config;
  Overrides train_over, tri_over;
  auto* train = app.add_subcommand("train", "Supervised training, one model per seed");
  train->add_option("config", train_config, "Run config (JSON)")->required();
  add_run_flags(train, train_over, false);
  auto* tri = app.add_subcommand("tritrain", "Tri-training, one learner triple per seed");
  tri->add_option("config", tri_config, "Run config (JSON)")->required();
  add_run_flags(tri, tri_over, true);

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "Write id,label,prob predictions for a dataset");
  predict->add_option("--model", pred.models, "Checkpoint; give three for a majority vote")->required();
  predict->add_option("--data", pred.data, "Dataset CSV")->required();
  predict->add_option("--out", pred.out, "Prediction CSV to write")->required();
  predict->add_option("--config", pred.config, "Take embedding settings from this run config");
  predict->add_option("--embeddings", pred.embeddings, "Embedding table, or contextual store files");
  predict->add_option("--embedding-type", pred.embedding_type, "static or contextual")
      ->check(CLI::IsMember({"static", "contextual"}))
      ->capture_default_str();
  predict->add_option("--embedding-dim", pred.embedding_dim, "Vector width (default: the model's)");

  fs::path eval_preds, eval_gold;
  bool eval_json = false;
  auto* evaluate = app.add_subcommand("evaluate", "Precision, recall and F1 of a prediction file");
  evaluate->add_option("predictions", eval_preds, "Prediction CSV")->required();
  evaluate->add_option("gold", eval_gold, "Labelled dataset CSV")->required();
  evaluate->add_flag("--json", eval_json, "Print JSON");

  fs::path cmp_a, cmp_b, cmp_gold;
  bool cmp_json = false;
  auto* compare = app.add_subcommand("compare", "McNemar test between two prediction files");
  compare->add_option("a", cmp_a, "Prediction CSV of system A")->required();
  compare->add_option("b", cmp_b, "Prediction CSV of system B")->required();
  compare->add_option("gold", cmp_gold, "Labelled dataset CSV")->required();
  compare->add_flag("--json", cmp_json, "Print JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  Io io{out, err, {}};
  try {
    if (*preprocess) return cmd_preprocess(pre, io);
    if (*train) return cmd_train(effective_config(train_config, train_over), io);
    if (*tri) return cmd_tritrain(effective_config(tri_config, tri_over), io);
    if (*predict) return cmd_predict(pred, io);
    if (*evaluate) return cmd_evaluate(eval_preds, eval_gold, eval_json, io);
    if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_gold, cmp_json, io);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tritrain::cli
