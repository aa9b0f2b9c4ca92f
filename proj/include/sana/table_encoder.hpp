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

// Shared table encoder: each linearized cell (token, key, p+, p-) is fused by
// f = ReLU(W_f [w; k; p+; p-] + b_f), then contextualized by full
// self-attention layers. Cells get no sequence-position encoding beyond
// p+/p-, so the encoder is equivariant to attribute permutations.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "sana/config.hpp"
#include "sana/layers.hpp"
#include "sana/table.hpp"

namespace sana {

struct CellIds {
  std::vector<int> token;
  std::vector<int> key;
  std::vector<int> fwd;
  std::vector<int> bwd;
};

inline CellIds cell_ids(const LinearizedTable& cells, const Vocabulary& tokens, const Vocabulary& keys, int max_pos) {
  CellIds ids;
  for (const auto& c : cells) {
    ids.token.push_back(c.is_eos() ? kEosId : tokens.id(c.token));
    ids.key.push_back(c.is_eos() ? kEosId : keys.id(c.key));
    ids.fwd.push_back(std::clamp(c.fwd_pos, 1, max_pos));
    ids.bwd.push_back(std::clamp(c.bwd_pos, 1, max_pos));
  }
  return ids;
}

struct EncoderOutput {
  nn::Var hidden;     // one row per cell, EOS cell last
  Tokens cell_tokens; // parallel source tokens for copy addressing
};

class TableEncoder {
 public:
  TableEncoder(nn::ParameterStore& store, const std::string& prefix, const ModelDims& dims, std::size_t token_vocab,
               std::size_t key_vocab, Rng& rng)
      : dims_(dims) {
    using nn::Init;
    const auto n_pos = static_cast<nn::Index>(dims.max_pos + 1);
    token_emb_ = &store.create(prefix + ".token_emb", static_cast<nn::Index>(token_vocab), dims.token_emb, Init::kXavier, rng);
    key_emb_ = &store.create(prefix + ".key_emb", static_cast<nn::Index>(key_vocab), dims.key_emb, Init::kXavier, rng);
    fwd_emb_ = &store.create(prefix + ".fwd_pos_emb", n_pos, dims.pos_emb, Init::kXavier, rng);
    bwd_emb_ = &store.create(prefix + ".bwd_pos_emb", n_pos, dims.pos_emb, Init::kXavier, rng);
    const nn::Index concat = dims.token_emb + dims.key_emb + 2 * dims.pos_emb;
    fuse_ = nn::Linear::create(store, prefix + ".fuse", concat, dims.width, rng);
    for (int l = 0; l < dims.layers; ++l)
      layers_.push_back(nn::EncoderLayer::create(store, prefix + ".layer" + std::to_string(l), dims.width, dims.hidden,
                                                 dims.heads, rng));
  }

  /// Fused cell vectors f, one row per cell.
  nn::Var embed_cells(nn::Graph& g, const CellIds& ids) const {
    nn::Var x = nn::concat_cols({nn::embedding(g.param(*token_emb_), ids.token), nn::embedding(g.param(*key_emb_), ids.key),
                                 nn::embedding(g.param(*fwd_emb_), ids.fwd), nn::embedding(g.param(*bwd_emb_), ids.bwd)});
    return nn::relu(fuse_(g, x));
  }

  nn::Var encode_ids(nn::Graph& g, const CellIds& ids) const {
    nn::Var h = embed_cells(g, ids);
    for (const auto& layer : layers_) h = layer(g, h);
    return h;
  }

  EncoderOutput encode(nn::Graph& g, const LinearizedTable& cells, const Vocabulary& tokens, const Vocabulary& keys) const {
    if (cells.empty()) throw Error("encode_table: no cells (the EOS cell is required)");
    EncoderOutput out{encode_ids(g, cell_ids(cells, tokens, keys, dims_.max_pos)), {}};
    for (const auto& c : cells) out.cell_tokens.push_back(c.token);
    return out;
  }

  nn::Parameter& token_embedding() const { return *token_emb_; }
  nn::Parameter& key_embedding() const { return *key_emb_; }
  nn::Parameter& fwd_embedding() const { return *fwd_emb_; }
  nn::Parameter& bwd_embedding() const { return *bwd_emb_; }
  const nn::Linear& fuse() const { return fuse_; }
  const ModelDims& dims() const { return dims_; }

 private:
  ModelDims dims_;
  nn::Parameter* token_emb_;
  nn::Parameter* key_emb_;
  nn::Parameter* fwd_emb_;
  nn::Parameter* bwd_emb_;
  nn::Linear fuse_;
  std::vector<nn::EncoderLayer> layers_;
};

}  // namespace sana
