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

// The tritrain subcommands. Each returns a process exit code: 0 on success,
// 1 for usage or configuration errors, 2 for data errors.

#ifndef TRITRAIN_TOOLS_COMMANDS_HPP_
#define TRITRAIN_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace tritrain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Output streams shared by worker threads.
struct Io {
  std::ostream& out;
  std::ostream& err;
  std::mutex mu;

  void info(const std::string& line);
  void warn(const std::string& line);
};

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::vector<std::uint64_t> seeds;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::size_t> jobs;
  std::optional<std::string> arch;
  std::optional<double> lr;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> max_iters;
  bool no_upsample = false;

  void apply(RunConfig& cfg) const;
};

/// Reads the config, applies TRITRAIN_SEED and then the flags.
RunConfig effective_config(const std::filesystem::path& config_path, const Overrides& overrides);

struct PreprocessOptions {
  std::filesystem::path in;
  std::filesystem::path out;
  bool filter_short = false;
  std::size_t min_tokens = 4;
};

struct PredictOptions {
  std::vector<std::filesystem::path> models;  // one checkpoint, or three for a majority vote
  std::filesystem::path data;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;  // embedding settings from a run config
  std::vector<std::filesystem::path> embeddings;
  std::string embedding_type = "static";
  std::optional<std::size_t> embedding_dim;  // defaults to the model's input width
};

// These throw tritrain::Error subclasses; run() maps them to exit codes.
int cmd_preprocess(const PreprocessOptions& opts, Io& io);
int cmd_train(const RunConfig& cfg, Io& io);
int cmd_tritrain(const RunConfig& cfg, Io& io);
int cmd_predict(const PredictOptions& opts, Io& io);
int cmd_evaluate(const std::filesystem::path& preds, const std::filesystem::path& gold, bool json, Io& io);
int cmd_compare(const std::filesystem::path& preds_a, const std::filesystem::path& preds_b,
                const std::filesystem::path& gold, bool json, Io& io);

}  // namespace tritrain::cli

#endif  // TRITRAIN_TOOLS_COMMANDS_HPP_
