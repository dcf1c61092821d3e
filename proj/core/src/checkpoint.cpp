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

#include "tritrain/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "tritrain/error.hpp"

namespace tritrain {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "tritrain-checkpoint";
constexpr int kVersion = 1;

json arch_json(const ArchConfig& config) {
  if (const auto* dan = std::get_if<DanConfig>(&config)) {
    return {{"type", "dan"}, {"input_dim", dan->input_dim}, {"hidden", dan->hidden}};
  }
  const auto& cnn = std::get<CnnConfig>(config);
  return {{"type", "cnn"},
          {"input_dim", cnn.input_dim},
          {"filter_widths", cnn.filter_widths},
          {"filters_per_width", cnn.filters_per_width},
          {"head_hidden", cnn.head_hidden},
          {"head_dropout", cnn.head_dropout}};
}

ArchConfig arch_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "dan") {
    DanConfig c;
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    return c;
  }
  if (type == "cnn") {
    CnnConfig c;
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.filter_widths = j.at("filter_widths").get<std::vector<std::size_t>>();
    c.filters_per_width = j.at("filters_per_width").get<std::size_t>();
    c.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
    c.head_dropout = j.at("head_dropout").get<double>();
    return c;
  }
  throw DataError("unknown architecture type '" + type + "'");
}

void put_le(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  std::filesystem::path bin = path;
  bin.replace_extension(".bin");
  return bin;
}

}  // namespace

std::string arch_to_json(const ArchConfig& config) { return arch_json(config).dump(); }

ArchConfig arch_from_json(const std::string& text) {
  try {
    return arch_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid architecture config: ") + e.what());
  }
}

void save_checkpoint(const ModelParams& m, const std::filesystem::path& path) {
  const std::filesystem::path bin = sidecar(path);
  json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["arch"] = arch_json(m.config);
  header["embedding_dropout"] = m.embedding_dropout;
  header["seed"] = m.seed;
  header["binary"] = bin.filename().string();
  json params = json::array();
  std::size_t offset = 0;
  for (const Parameter& p : m.parameters) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}, {"count", p.value.size()}});
    offset += p.value.size();
  }
  header["parameters"] = params;

  std::ofstream out_bin(bin, std::ios::binary);
  if (!out_bin) throw DataError("cannot write checkpoint data '" + bin.string() + "'");
  for (const Parameter& p : m.parameters) {
    for (double v : p.value.data()) put_le(out_bin, v);
  }
  out_bin.close();
  if (!out_bin) throw DataError("failed writing checkpoint data '" + bin.string() + "'");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << header.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  json header;
  try {
    header = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path.string() + "': " + e.what());
  }
  try {
    if (header.at("format").get<std::string>() != kFormat) {
      throw DataError("checkpoint '" + path.string() + "' has an unknown format");
    }
    ModelParams m;
    m.config = arch_from(header.at("arch"));
    validate(m.config);
    m.embedding_dropout = header.at("embedding_dropout").get<double>();
    m.seed = header.at("seed").get<std::uint64_t>();

    const std::filesystem::path bin = path.parent_path() / header.at("binary").get<std::string>();
    std::ifstream in_bin(bin, std::ios::binary);
    if (!in_bin) throw DataError("cannot open checkpoint data '" + bin.string() + "'");
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in_bin), std::istreambuf_iterator<char>()};

    std::size_t expected = 0;
    for (const auto& p : header.at("parameters")) {
      const Shape shape = p.at("shape").get<Shape>();
      const std::size_t offset = p.at("offset").get<std::size_t>();
      const std::size_t count = p.at("count").get<std::size_t>();
      if (count != shape_size(shape)) throw DataError("checkpoint parameter count disagrees with its shape");
      if ((offset + count) * 8 > bytes.size()) throw DataError("checkpoint data file is truncated");
      std::vector<double> data(count);
      for (std::size_t i = 0; i < count; ++i) data[i] = get_le(bytes.data() + (offset + i) * 8);
      m.parameters.emplace_back(p.at("name").get<std::string>(), Tensor(shape, std::move(data)));
      expected += count;
    }
    if (expected * 8 != bytes.size()) throw DataError("checkpoint data file has trailing bytes");

    // Shapes must match what the architecture implies.
    Rng probe(0);
    const ModelParams fresh = init_params(m.config, probe, m.embedding_dropout);
    if (fresh.parameters.size() != m.parameters.size()) {
      throw DataError("checkpoint has " + std::to_string(m.parameters.size()) + " parameters, architecture needs " +
                      std::to_string(fresh.parameters.size()));
    }
    for (std::size_t i = 0; i < fresh.parameters.size(); ++i) {
      if (fresh.parameters[i].value.shape() != m.parameters[i].value.shape() ||
          fresh.parameters[i].name != m.parameters[i].name) {
        throw DataError("checkpoint parameter '" + m.parameters[i].name + "' does not match the architecture");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path.string() + "': " + e.what());
  }
}

}  // namespace tritrain
