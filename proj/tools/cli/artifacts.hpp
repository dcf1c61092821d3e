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

// Output files shared by the subcommands: prediction CSVs and the manifest
// that records a content hash for every artifact of a run.

#ifndef TRITRAIN_TOOLS_ARTIFACTS_HPP_
#define TRITRAIN_TOOLS_ARTIFACTS_HPP_

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "tritrain/metrics.hpp"
#include "tritrain/models.hpp"
#include "tritrain/text_prep.hpp"

namespace tritrain::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// `id,label,prob` rows in dataset order; prob is P(label = 1).
void write_predictions(const std::filesystem::path& path, const Dataset& d, const std::vector<Prediction>& preds);

/// Reads a prediction CSV. Throws DataError on a malformed row or a repeated id.
LabelMap read_predictions(const std::filesystem::path& path);

/// Creates parent directories and writes `text` verbatim.
void write_file(const std::filesystem::path& path, const std::string& text);

/// Thread-safe record of the files a command wrote under one output directory.
class ArtifactLog {
 public:
  explicit ArtifactLog(std::filesystem::path root) : root_(std::move(root)) {}
  const std::filesystem::path& root() const { return root_; }

  void add(const std::filesystem::path& path);

  /// Writes root/manifest.json: one entry per recorded file, sorted by path
  /// relative to the root, with its size in bytes and SHA-256.
  void write_manifest() const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::vector<std::filesystem::path> files_;
};

}  // namespace tritrain::cli

#endif  // TRITRAIN_TOOLS_ARTIFACTS_HPP_
