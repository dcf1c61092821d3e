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

#include "artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "tritrain/csv.hpp"
#include "tritrain/error.hpp"

namespace tritrain::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    char byte[3];
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_predictions(const fs::path& path, const Dataset& d, const std::vector<Prediction>& preds) {
  if (preds.size() != d.size()) throw ShapeError("prediction count differs from dataset size");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  csv::write_row(out, {"id", "label", "prob"});
  char prob[32];
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::snprintf(prob, sizeof prob, "%.6f", preds[i].prob);
    csv::write_row(out, {d.sentences[i].id, std::to_string(preds[i].label), prob});
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

LabelMap read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file '" + path.string() + "'");
  const auto rows = csv::read(in);
  const std::string name = path.string();
  if (rows.empty()) throw DataError(name + ": missing header row");
  const auto& header = rows.front().fields;
  const auto col = [&](const std::string& c) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) throw DataError(name + ": header has no '" + c + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = col("id");
  const std::size_t label_col = col("label");
  LabelMap out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::string where = name + ":" + std::to_string(rows[r].line);
    if (f.size() != header.size()) throw DataError(where + ": expected " + std::to_string(header.size()) + " fields");
    if (f[label_col] != "0" && f[label_col] != "1") {
      throw DataError(where + ": label must be 0 or 1, got '" + f[label_col] + "'");
    }
    if (!out.emplace(f[id_col], f[label_col] == "1" ? 1 : 0).second) {
      throw DataError(where + ": duplicate id '" + f[id_col] + "'");
    }
  }
  return out;
}

void ArtifactLog::add(const fs::path& path) {
  std::lock_guard lock(mu_);
  files_.push_back(path);
}

void ArtifactLog::write_manifest() const {
  std::vector<std::pair<std::string, fs::path>> entries;
  {
    std::lock_guard lock(mu_);
    for (const fs::path& p : files_) entries.emplace_back(fs::relative(p, root_).generic_string(), p);
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [rel, p] : entries) {
    nlohmann::ordered_json e;
    e["path"] = rel;
    e["bytes"] = fs::file_size(p);
    e["sha256"] = sha256_file(p);
    files.push_back(std::move(e));
  }
  nlohmann::ordered_json j;
  j["files"] = std::move(files);
  write_file(root_ / "manifest.json", j.dump(2) + "\n");
}

}  // namespace tritrain::cli
