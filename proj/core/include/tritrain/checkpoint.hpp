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

// Model checkpoints: a JSON header (architecture, embedding dropout, seed,
// parameter names, shapes and offsets) next to a sidecar file holding every
// parameter as contiguous little-endian IEEE-754 doubles, in header order.

#ifndef TRITRAIN_CHECKPOINT_HPP_
#define TRITRAIN_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "tritrain/models.hpp"

namespace tritrain {

/// Writes `<path>` (JSON) and `<path with extension .bin>`.
void save_checkpoint(const ModelParams& m, const std::filesystem::path& path);

/// Throws DataError when the header and the binary disagree.
ModelParams load_checkpoint(const std::filesystem::path& path);

/// Architecture config as a JSON string and back.
std::string arch_to_json(const ArchConfig& config);
ArchConfig arch_from_json(const std::string& json);

}  // namespace tritrain

#endif  // TRITRAIN_CHECKPOINT_HPP_
