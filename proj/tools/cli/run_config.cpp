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

#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tritrain/checkpoint.hpp"
#include "tritrain/error.hpp"

namespace tritrain::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "arch", "arch_config", "embedding", "train", "val", "test", "unlabelled", "output_dir", "seeds",
      "seed", "lr", "max_epochs", "patience", "upsample", "shuffle", "filter_short", "min_tokens",
      "max_iters", "jobs"};
  return keys;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::vector<std::size_t> widths(const json& j, const std::string& key) {
  auto v = get<std::vector<std::size_t>>(j, key);
  if (v.empty()) throw ConfigError("config key '" + key + "' must be a nonempty list");
  return v;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, unused] : j.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfig cfg;
  if (j.contains("arch")) cfg.arch = get<std::string>(j, "arch");
  if (j.contains("arch_config")) {
    if (!j["arch_config"].is_object()) throw ConfigError("config key 'arch_config' must be an object");
    cfg.arch_overrides = j["arch_config"].dump();
  }
  if (j.contains("embedding")) {
    const json& e = j["embedding"];
    if (!e.is_object()) throw ConfigError("config key 'embedding' must be an object");
    for (const auto& [key, unused] : e.items()) {
      if (key != "type" && key != "path" && key != "dim" && key != "dropout") {
        throw ConfigError("unknown embedding key '" + key + "'");
      }
    }
    if (e.contains("type")) cfg.embedding.type = get<std::string>(e, "type");
    if (e.contains("dim")) cfg.embedding.dim = get<std::size_t>(e, "dim");
    if (e.contains("dropout")) cfg.embedding.dropout = get<double>(e, "dropout");
    if (e.contains("path")) {
      if (e["path"].is_array()) {
        for (const std::string& p : get<std::vector<std::string>>(e, "path")) cfg.embedding.paths.push_back(resolve(base, p));
      } else {
        cfg.embedding.paths.push_back(resolve(base, get<std::string>(e, "path")));
      }
    }
  }
  if (j.contains("train")) cfg.train = resolve(base, get<std::string>(j, "train"));
  if (j.contains("val")) cfg.val = resolve(base, get<std::string>(j, "val"));
  if (j.contains("test")) cfg.test = resolve(base, get<std::string>(j, "test"));
  if (j.contains("unlabelled")) cfg.unlabelled = resolve(base, get<std::string>(j, "unlabelled"));
  if (j.contains("output_dir")) cfg.output_dir = resolve(base, get<std::string>(j, "output_dir"));
  if (j.contains("seeds") && j.contains("seed")) throw ConfigError("give either 'seeds' or 'seed', not both");
  if (j.contains("seeds")) cfg.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("seed")) cfg.seeds = {get<std::uint64_t>(j, "seed")};
  if (j.contains("lr")) cfg.train_config.lr = get<double>(j, "lr");
  if (j.contains("max_epochs")) cfg.train_config.max_epochs = get<std::size_t>(j, "max_epochs");
  if (j.contains("patience")) cfg.train_config.patience = get<std::size_t>(j, "patience");
  if (j.contains("upsample")) cfg.train_config.upsample = get<bool>(j, "upsample");
  if (j.contains("shuffle")) cfg.train_config.shuffle = get<bool>(j, "shuffle");
  if (j.contains("filter_short")) cfg.filter_short = get<bool>(j, "filter_short");
  if (j.contains("min_tokens")) cfg.min_tokens = get<std::size_t>(j, "min_tokens");
  if (j.contains("max_iters")) cfg.max_iters = get<std::size_t>(j, "max_iters");
  if (j.contains("jobs")) cfg.jobs = get<std::size_t>(j, "jobs");
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig cfg = parse_run_config(text.str(), path.parent_path());
  cfg.source = path;
  return cfg;
}

void apply_seed_env(RunConfig& cfg) {
  const char* env = std::getenv("TRITRAIN_SEED");
  if (!env || !*env) return;
  const std::string value(env);
  if (value.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("TRITRAIN_SEED must be an unsigned integer, got '" + value + "'");
  }
  try {
    cfg.seeds = {std::stoull(value)};
  } catch (const std::out_of_range&) {
    throw ConfigError("TRITRAIN_SEED is out of range");
  }
}

ArchConfig build_arch(const RunConfig& cfg) {
  const json over = json::parse(cfg.arch_overrides);
  const std::size_t dim = cfg.embedding.dim;
  if (cfg.arch == "dan") {
    DanConfig c = DanConfig::for_input(dim);
    for (const auto& [key, unused] : over.items()) {
      if (key != "hidden") throw ConfigError("unknown dan arch_config key '" + key + "'");
    }
    if (over.contains("hidden")) c.hidden = widths(over, "hidden");
    validate(c);
    return c;
  }
  if (cfg.arch == "cnn") {
    CnnConfig c;
    c.input_dim = dim;
    for (const auto& [key, unused] : over.items()) {
      if (key != "filter_widths" && key != "filters_per_width" && key != "head_hidden" && key != "head_dropout") {
        throw ConfigError("unknown cnn arch_config key '" + key + "'");
      }
    }
    if (over.contains("filter_widths")) c.filter_widths = widths(over, "filter_widths");
    if (over.contains("filters_per_width")) c.filters_per_width = get<std::size_t>(over, "filters_per_width");
    if (over.contains("head_hidden")) c.head_hidden = widths(over, "head_hidden");
    if (over.contains("head_dropout")) c.head_dropout = get<double>(over, "head_dropout");
    validate(c);
    return c;
  }
  throw ConfigError("unknown architecture '" + cfg.arch + "' (expected dan or cnn)");
}

void validate_run_config(const RunConfig& cfg, bool need_unlabelled) {
  build_arch(cfg);
  cfg.train_config.validate();
  if (cfg.seeds.empty()) throw ConfigError("seed list is empty");
  if (cfg.jobs == 0) throw ConfigError("jobs must be at least 1");
  if (cfg.max_iters == 0) throw ConfigError("max_iters must be at least 1");
  if (cfg.embedding.type != "static" && cfg.embedding.type != "contextual") {
    throw ConfigError("embedding type must be 'static' or 'contextual', got '" + cfg.embedding.type + "'");
  }
  if (cfg.embedding.dim == 0) throw ConfigError("embedding dim must be positive");
  if (cfg.embedding.paths.empty()) throw ConfigError("config needs embedding.path");
  if (cfg.embedding.type == "static" && cfg.embedding.paths.size() != 1) {
    throw ConfigError("a static embedding table is a single file");
  }
  auto require_file = [](const fs::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError("config needs '" + what + "'");
    if (!fs::is_regular_file(p)) throw ConfigError(what + " file '" + p.string() + "' does not exist");
  };
  for (const fs::path& p : cfg.embedding.paths) require_file(p, "embedding");
  require_file(cfg.train, "train");
  require_file(cfg.val, "val");
  if (cfg.test) require_file(*cfg.test, "test");
  if (need_unlabelled) {
    if (!cfg.unlabelled) throw ConfigError("tri-training needs 'unlabelled'");
    require_file(*cfg.unlabelled, "unlabelled");
  }
}

EmbeddingSource open_embeddings(const EmbeddingSpec& spec) {
  if (spec.type == "static") {
    auto table = std::make_shared<EmbeddingTable>(load_embedding_table(spec.paths.at(0), spec.dim));
    return EmbeddingSource::from_table(table, spec.dropout.value_or(kStaticEmbeddingDropout));
  }
  auto store = std::make_shared<ContextualStore>(spec.dim);
  for (const fs::path& p : spec.paths) {
    const ContextualStore part = load_precomputed_embeddings(p);
    if (part.size() > 0 && part.dim() != spec.dim) {
      throw DataError("contextual store '" + p.string() + "' has width " + std::to_string(part.dim()) +
                      ", config says " + std::to_string(spec.dim));
    }
    store->merge(part);
  }
  return EmbeddingSource::from_store(store, spec.dropout.value_or(kContextualEmbeddingDropout));
}

std::string to_json(const RunConfig& cfg) {
  json j;
  j["arch"] = cfg.arch;
  j["arch_config"] = json::parse(arch_to_json(build_arch(cfg)));
  j["embedding"] = {{"type", cfg.embedding.type}, {"dim", cfg.embedding.dim}};
  std::vector<std::string> paths;
  for (const auto& p : cfg.embedding.paths) paths.push_back(p.string());
  j["embedding"]["path"] = paths;
  if (cfg.embedding.dropout) j["embedding"]["dropout"] = *cfg.embedding.dropout;
  j["train"] = cfg.train.string();
  j["val"] = cfg.val.string();
  if (cfg.test) j["test"] = cfg.test->string();
  if (cfg.unlabelled) j["unlabelled"] = cfg.unlabelled->string();
  j["output_dir"] = cfg.output_dir.string();
  j["seeds"] = cfg.seeds;
  j["lr"] = cfg.train_config.lr;
  j["max_epochs"] = cfg.train_config.max_epochs;
  j["patience"] = cfg.train_config.patience;
  j["upsample"] = cfg.train_config.upsample;
  j["shuffle"] = cfg.train_config.shuffle;
  j["filter_short"] = cfg.filter_short;
  j["min_tokens"] = cfg.min_tokens;
  j["max_iters"] = cfg.max_iters;
  j["jobs"] = cfg.jobs;
  return j.dump(2);
}

}  // namespace tritrain::cli
