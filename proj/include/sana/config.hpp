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

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sana/common.hpp"

namespace sana {

struct ModelDims {
  int width = 64;
  int hidden = 128;
  int heads = 2;
  int layers = 2;
  int token_emb = 64;
  int key_emb = 16;
  int pos_emb = 8;
  int max_pos = 30;  // clamp for the p+ / p- embeddings

  bool operator==(const ModelDims&) const = default;

  /// The transformer-base sizes with 420/80/5 embedding widths.
  static ModelDims paper_base() { return {512, 2048, 8, 6, 420, 80, 5, 30}; }
};

struct RunConfig {
  ModelDims dims;
  std::size_t vocab_cap = 50000;
  double lambda = 1.0;        // weight of the deletion loss
  int k_max = 8;              // largest placeholder count per slot
  int max_iter = 10;          // refinement rounds at inference
  int max_state_len = 512;    // hard cap on the edit state
  int beam_width = 5;
  int max_len = 64;           // skeleton decoding limit
  bool length_normalize = false;
  bool tie_token_head = false;
  bool hard_constraints = true;
  double parent_lambda = 0.5;  // reference vs. table recall mix
  double pointer_lr = 3e-4;
  int pointer_warmup = 4000;
  double editor_lr = 5e-4;
  int editor_warmup = 10000;
  int batch_size = 8;
  int pointer_epochs = 100;
  int editor_epochs = 100;
  std::uint64_t seed = 1;

  void validate() const {
    auto positive = [](long long v, const char* name) {
      if (v <= 0) throw ConfigError(std::string("config field must be positive: ") + name);
    };
    positive(dims.width, "width");
    positive(dims.hidden, "hidden");
    positive(dims.heads, "heads");
    positive(dims.layers, "layers");
    positive(dims.token_emb, "token_emb");
    positive(dims.key_emb, "key_emb");
    positive(dims.pos_emb, "pos_emb");
    positive(dims.max_pos, "max_pos");
    positive(k_max, "k_max");
    positive(max_state_len, "max_state_len");
    positive(beam_width, "beam_width");
    positive(max_len, "max_len");
    positive(pointer_warmup, "pointer_warmup");
    positive(editor_warmup, "editor_warmup");
    positive(batch_size, "batch_size");
    if (max_iter < 0) throw ConfigError("config field must be non-negative: max_iter");
    if (pointer_epochs < 0 || editor_epochs < 0) throw ConfigError("epochs must be non-negative");
    if (vocab_cap < 5) throw ConfigError("vocab_cap must be at least 5");
    if (lambda < 0) throw ConfigError("lambda must be non-negative");
    if (!(parent_lambda >= 0 && parent_lambda <= 1)) throw ConfigError("parent_lambda must lie in [0, 1]");
    if (!(pointer_lr > 0) || !(editor_lr > 0)) throw ConfigError("learning rates must be positive");
    if (dims.width % dims.heads != 0) throw ConfigError("width must be divisible by heads");
    if (tie_token_head && dims.token_emb != dims.width)
      throw ConfigError("tie_token_head requires token_emb == width");
  }
};

inline void to_json(nlohmann::json& j, const ModelDims& d) {
  j = {{"width", d.width},         {"hidden", d.hidden},   {"heads", d.heads},
       {"layers", d.layers},       {"token_emb", d.token_emb}, {"key_emb", d.key_emb},
       {"pos_emb", d.pos_emb},     {"max_pos", d.max_pos}};
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"dims", c.dims},
       {"vocab_cap", c.vocab_cap},
       {"lambda", c.lambda},
       {"k_max", c.k_max},
       {"max_iter", c.max_iter},
       {"max_state_len", c.max_state_len},
       {"beam_width", c.beam_width},
       {"max_len", c.max_len},
       {"length_normalize", c.length_normalize},
       {"tie_token_head", c.tie_token_head},
       {"hard_constraints", c.hard_constraints},
       {"parent_lambda", c.parent_lambda},
       {"pointer_lr", c.pointer_lr},
       {"pointer_warmup", c.pointer_warmup},
       {"editor_lr", c.editor_lr},
       {"editor_warmup", c.editor_warmup},
       {"batch_size", c.batch_size},
       {"pointer_epochs", c.pointer_epochs},
       {"editor_epochs", c.editor_epochs},
       {"seed", c.seed}};
}

namespace detail {
template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field has the wrong type: ") + name);
  }
}
}  // namespace detail

// Missing fields keep their defaults; unknown fields are rejected.
inline void from_json(const nlohmann::json& j, ModelDims& d) {
  if (!j.is_object()) throw ConfigError("\"dims\" must be an object");
  static const char* known[] = {"width", "hidden", "heads", "layers", "token_emb", "key_emb", "pos_emb", "max_pos"};
  for (const auto& [k, _] : j.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* n) { return k == n; }) == std::end(known))
      throw ConfigError("unknown config field: dims." + k);
  detail::read_field(j, "width", d.width);
  detail::read_field(j, "hidden", d.hidden);
  detail::read_field(j, "heads", d.heads);
  detail::read_field(j, "layers", d.layers);
  detail::read_field(j, "token_emb", d.token_emb);
  detail::read_field(j, "key_emb", d.key_emb);
  detail::read_field(j, "pos_emb", d.pos_emb);
  detail::read_field(j, "max_pos", d.max_pos);
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const nlohmann::json defaults = RunConfig{};
  for (const auto& [k, _] : j.items())
    if (!defaults.contains(k)) throw ConfigError("unknown config field: " + k);
  if (j.contains("dims")) c.dims = j["dims"].get<ModelDims>();
  detail::read_field(j, "vocab_cap", c.vocab_cap);
  detail::read_field(j, "lambda", c.lambda);
  detail::read_field(j, "k_max", c.k_max);
  detail::read_field(j, "max_iter", c.max_iter);
  detail::read_field(j, "max_state_len", c.max_state_len);
  detail::read_field(j, "beam_width", c.beam_width);
  detail::read_field(j, "max_len", c.max_len);
  detail::read_field(j, "length_normalize", c.length_normalize);
  detail::read_field(j, "tie_token_head", c.tie_token_head);
  detail::read_field(j, "hard_constraints", c.hard_constraints);
  detail::read_field(j, "parent_lambda", c.parent_lambda);
  detail::read_field(j, "pointer_lr", c.pointer_lr);
  detail::read_field(j, "pointer_warmup", c.pointer_warmup);
  detail::read_field(j, "editor_lr", c.editor_lr);
  detail::read_field(j, "editor_warmup", c.editor_warmup);
  detail::read_field(j, "batch_size", c.batch_size);
  detail::read_field(j, "pointer_epochs", c.pointer_epochs);
  detail::read_field(j, "editor_epochs", c.editor_epochs);
  detail::read_field(j, "seed", c.seed);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  RunConfig c = j.get<RunConfig>();
  c.validate();
  return c;
}

}  // namespace sana
