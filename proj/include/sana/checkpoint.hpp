/*
 * Copyright 2026 The SANA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Checkpoint directory layout:
//   manifest.json  {"params": [{"name", "shape": [rows, cols], "dtype": "float32"}, ...],
//                   "optimizer": {"step": n} (only when optimizer.bin exists)}
//   params.bin     little-endian float32 values, concatenated in manifest order
//   optimizer.bin  first moments then second moments per parameter, same scheme

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sana/autograd.hpp"
#include "sana/optim.hpp"

namespace sana::nn {

namespace detail {

inline void write_f32(std::ostream& out, const Matrix& m) {
  std::string buf(static_cast<std::size_t>(m.size()) * 4, '\0');
  for (Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i]));
    for (int b = 0; b < 4; ++b) buf[static_cast<std::size_t>(i) * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline void read_f32(std::istream& in, Matrix& m, const std::string& what) {
  std::string buf(static_cast<std::size_t>(m.size()) * 4, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw Error("truncated checkpoint data: " + what);
  for (Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[static_cast<std::size_t>(i) * 4 + b])) << (8 * b);
    m.data()[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
}

}  // namespace detail

inline nlohmann::json parameter_manifest(const ParameterStore& store) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : store)
    params.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}, {"dtype", "float32"}});
  return {{"params", std::move(params)}};
}

/// Writes manifest.json and params.bin (and optimizer.bin when `optimizer` is given).
inline void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& store,
                            const OptimizerState* optimizer = nullptr) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = parameter_manifest(store);
  {
    std::ofstream out(dir / "params.bin", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "params.bin").string());
    for (const auto& p : store) detail::write_f32(out, p.value);
  }
  if (optimizer) {
    if (optimizer->first.size() != store.size()) throw Error("optimizer state does not match the parameter store");
    std::ofstream out(dir / "optimizer.bin", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "optimizer.bin").string());
    for (std::size_t i = 0; i < store.size(); ++i) {
      detail::write_f32(out, optimizer->first[i]);
      detail::write_f32(out, optimizer->second[i]);
    }
    manifest["optimizer"] = {{"step", optimizer->step}};
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

/// Loads values into an already-constructed store; names and shapes must match.
inline void load_checkpoint(const std::filesystem::path& dir, ParameterStore& store, OptimizerState* optimizer = nullptr) {
  const nlohmann::json manifest = read_json_file(dir / "manifest.json");
  const auto& params = manifest.at("params");
  if (params.size() != store.size())
    throw ShapeError("checkpoint has " + std::to_string(params.size()) + " parameters, model expects " +
                     std::to_string(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& entry = params[i];
    const Parameter& p = store[i];
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<Index>>();
    if (name != p.name) throw ShapeError("checkpoint parameter " + name + " where model expects " + p.name);
    if (shape.size() != 2 || shape[0] != p.value.rows() || shape[1] != p.value.cols())
      throw ShapeError("checkpoint shape mismatch for " + name + ": model has " + shape_str(p.value));
    if (entry.at("dtype") != "float32") throw Error("unsupported dtype for " + name);
  }
  std::ifstream in(dir / "params.bin", std::ios::binary);
  if (!in) throw Error("cannot open " + (dir / "params.bin").string());
  for (auto& p : store) detail::read_f32(in, p.value, p.name);
  if (optimizer && manifest.contains("optimizer")) {
    std::ifstream oin(dir / "optimizer.bin", std::ios::binary);
    if (!oin) throw Error("cannot open " + (dir / "optimizer.bin").string());
    optimizer->first.assign(store.size(), Matrix());
    optimizer->second.assign(store.size(), Matrix());
    for (std::size_t i = 0; i < store.size(); ++i) {
      optimizer->first[i] = Matrix::Zero(store[i].value.rows(), store[i].value.cols());
      optimizer->second[i] = Matrix::Zero(store[i].value.rows(), store[i].value.cols());
      detail::read_f32(oin, optimizer->first[i], store[i].name);
      detail::read_f32(oin, optimizer->second[i], store[i].name);
    }
    optimizer->step = manifest["optimizer"].at("step").get<long>();
  }
}

}  // namespace sana::nn
