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

// Experiment configuration for the train and tritrain commands.
//
// A config is a JSON object. Relative paths resolve against the directory
// holding the config file. Values come from, in increasing precedence: the
// built-in defaults, the config file, the TRITRAIN_SEED environment variable
// (replaces the seed list with that single seed), and command-line flags.

#ifndef TRITRAIN_TOOLS_RUN_CONFIG_HPP_
#define TRITRAIN_TOOLS_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tritrain/embeddings.hpp"
#include "tritrain/models.hpp"
#include "tritrain/training.hpp"

namespace tritrain::cli {

struct EmbeddingSpec {
  std::string type = "static";  // "static" or "contextual"
  std::vector<std::filesystem::path> paths;  // contextual stores may span several files
  std::size_t dim = 300;
  std::optional<double> dropout;  // default depends on the type
};

struct RunConfig {
  std::filesystem::path source;  // config file, when read from one

  std::string arch = "dan";
  std::string arch_overrides = "{}";  // JSON object, see build_arch
  EmbeddingSpec embedding;

  std::filesystem::path train;
  std::filesystem::path val;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> unlabelled;
  std::filesystem::path output_dir = "runs";

  std::vector<std::uint64_t> seeds = {1};
  TrainConfig train_config;
  bool filter_short = true;
  std::size_t min_tokens = 4;
  std::size_t max_iters = 10;
  std::size_t jobs = 1;
};

/// Parses a config object. `base` resolves relative paths.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base);
RunConfig load_run_config(const std::filesystem::path& path);

/// Replaces the seed list when TRITRAIN_SEED is set. Throws ConfigError on a
/// value that is not an unsigned integer.
void apply_seed_env(RunConfig& cfg);

/// Default layout for `arch` at the embedding dimension (the paper widths for
/// 300 and 768), with any keys from "arch_config" applied on top: "hidden" for
/// dan; "filter_widths", "filters_per_width", "head_hidden", "head_dropout"
/// for cnn. Throws ConfigError on an unknown name or key.
ArchConfig build_arch(const RunConfig& cfg);

/// Checks invariants and that every referenced input exists. `need_unlabelled`
/// is set for tri-training.
void validate_run_config(const RunConfig& cfg, bool need_unlabelled);

EmbeddingSource open_embeddings(const EmbeddingSpec& spec);

/// JSON echo of the effective configuration, stored next to the results.
std::string to_json(const RunConfig& cfg);

}  // namespace tritrain::cli

#endif  // TRITRAIN_TOOLS_RUN_CONFIG_HPP_
