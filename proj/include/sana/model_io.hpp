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

// Model directories: the parameter checkpoint plus config.json (the frozen
// RunConfig), vocab.json ({"kind", "tokens", "keys"}).

#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "sana/checkpoint.hpp"
#include "sana/config.hpp"
#include "sana/table.hpp"

namespace sana {

struct ModelHeader {
  std::string kind;  // "pointer" or "editor"
  RunConfig config;
  Vocabulary tokens;
  Vocabulary keys;
};

inline void write_model_header(const std::filesystem::path& dir, const ModelHeader& h) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config.json");
    if (!out) throw Error("cannot write " + (dir / "config.json").string());
    out << nlohmann::json(h.config).dump(2) << '\n';
  }
  std::ofstream out(dir / "vocab.json");
  if (!out) throw Error("cannot write " + (dir / "vocab.json").string());
  out << nlohmann::json{{"kind", h.kind}, {"tokens", h.tokens.tokens()}, {"keys", h.keys.tokens()}}.dump() << '\n';
}

inline ModelHeader read_model_header(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("checkpoint directory not found: " + dir.string());
  ModelHeader h;
  h.config = nn::read_json_file(dir / "config.json").get<RunConfig>();
  h.config.validate();
  const auto v = nn::read_json_file(dir / "vocab.json");
  h.kind = v.at("kind").get<std::string>();
  h.tokens = Vocabulary(v.at("tokens").get<Tokens>());
  h.keys = Vocabulary(v.at("keys").get<Tokens>());
  return h;
}

}  // namespace sana
