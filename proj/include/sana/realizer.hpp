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

// Stage 2: an edit-based transformer decoder (full self-attention over the
// current sequence, cross-attention over the table encoder) with three heads:
//   deletion     softmax(W_del z_i)               keep = 0, delete = 1
//   placeholder  softmax(W_plh [z_i; z_{i+1}])    0..k_max insertions per slot
//   token        softmax(W_tok z_i)               fill for each placeholder

#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sana/config.hpp"
#include "sana/edit_oracle.hpp"
#include "sana/model_io.hpp"
#include "sana/table_encoder.hpp"

namespace sana {

/// Encoder output detached from any graph, reused across refinement rounds.
struct TableContext {
  nn::Matrix hidden;
  Tokens cell_tokens;
};

/// Loss components of one training example.
struct EditLossParts {
  double placeholder = 0.0;  // sum over slots of Y'
  double token = 0.0;        // sum over placeholders of Y''
  double deletion = 0.0;     // sum over inner positions of Y'''
  int clamped_slots = 0;     // oracle counts above k_max
  double ins() const { return placeholder + token; }
};

class EditRealizer {
 public:
  using Context = TableContext;

  EditRealizer(const RunConfig& config, Vocabulary tokens, Vocabulary keys)
      : config_(config), tokens_(std::move(tokens)), keys_(std::move(keys)), rng_(config.seed + 1) {
    config_.validate();
    const auto& d = config_.dims;
    encoder_.emplace(store_, "editor.encoder", d, tokens_.size(), keys_.size(), rng_);
    in_proj_ = nn::Linear::create(store_, "editor.decoder.in", d.token_emb, d.width, rng_);
    pos_emb_ = &store_.create("editor.decoder.pos_emb", config_.max_state_len, d.width, nn::Init::kXavier, rng_);
    for (int l = 0; l < d.layers; ++l)
      layers_.push_back(nn::DecoderLayer::create(store_, "editor.decoder.layer" + std::to_string(l), d.width, d.hidden,
                                                 d.heads, rng_));
    w_del_ = nn::Linear::create(store_, "editor.w_del", d.width, 2, rng_, false);
    w_plh_ = nn::Linear::create(store_, "editor.w_plh", 2 * d.width, config_.k_max + 1, rng_, false);
    if (!config_.tie_token_head)
      w_tok_ = nn::Linear::create(store_, "editor.w_tok", d.width, static_cast<nn::Index>(tokens_.size()), rng_, false);
  }

  static EditRealizer load(const std::filesystem::path& dir) {
    ModelHeader h = read_model_header(dir);
    if (h.kind != "editor") throw Error(dir.string() + " holds a " + h.kind + " checkpoint, expected editor");
    EditRealizer m(h.config, std::move(h.tokens), std::move(h.keys));
    nn::load_checkpoint(dir, m.store_);
    return m;
  }

  void save(const std::filesystem::path& dir, const nn::OptimizerState* opt = nullptr) const {
    write_model_header(dir, {"editor", config_, tokens_, keys_});
    nn::save_checkpoint(dir, store_, opt);
  }

  EncoderOutput encode(nn::Graph& g, const Table& table) const {
    return encoder_->encode(g, linearize_table(table), tokens_, keys_);
  }

  std::vector<int> state_ids(const Tokens& state) const {
    std::vector<int> ids;
    ids.reserve(state.size());
    for (const auto& t : state) ids.push_back(tokens_.id(t));
    return ids;
  }

  /// Decoder outputs z_0..z_n. Full self-attention unless `causal` (ablation only).
  nn::Var decode_hidden(nn::Graph& g, const std::vector<int>& ids, nn::Var memory, bool causal = false) const {
    if (static_cast<int>(ids.size()) > config_.max_state_len)
      throw Error("edit state of " + std::to_string(ids.size()) + " tokens exceeds the cap of " +
                  std::to_string(config_.max_state_len));
    std::vector<int> pos(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) pos[i] = static_cast<int>(i);
    nn::Var x = nn::add(in_proj_(g, nn::embedding(g.param(encoder_->token_embedding()), ids)),
                        nn::embedding(g.param(*pos_emb_), pos));
    for (const auto& layer : layers_) x = layer(g, x, memory, causal);
    return x;
  }

  /// n x 2 logits (keep, delete).
  nn::Var deletion_logits(nn::Graph& g, nn::Var z) const { return w_del_(g, z); }

  /// (n-1) x (k_max+1) logits, one row per consecutive pair.
  nn::Var placeholder_logits(nn::Graph& g, nn::Var z) const {
    if (z.rows() < 2) throw ShapeError("placeholder_logits: state needs at least two positions");
    const auto n = z.rows();
    return w_plh_(g, nn::concat_cols({nn::slice_rows(z, 0, n - 1), nn::slice_rows(z, 1, n - 1)}));
  }

  /// Vocabulary logits at the given rows of z.
  nn::Var token_logits(nn::Graph& g, nn::Var z, const std::vector<int>& rows) const {
    nn::Var picked = nn::gather_rows(z, rows);
    if (config_.tie_token_head) return nn::matmul_nt(picked, g.param(encoder_->token_embedding()));
    return w_tok_(g, picked);
  }

  // --- inference -----------------------------------------------------------

  TableContext prepare(const Table& table) const {
    nn::Graph g(false);
    EncoderOutput enc = encode(g, table);
    return {enc.hidden.value(), enc.cell_tokens};
  }

  nn::Matrix decode(const TableContext& ctx, const Tokens& state, bool causal = false) const {
    nn::Graph g(false);
    return decode_hidden(g, state_ids(state), g.constant(ctx.hidden), causal).value();
  }

  /// P(delete) per position.
  std::vector<double> delete_probs(const TableContext& ctx, const Tokens& state) const {
    nn::Graph g(false);
    nn::Var z = decode_hidden(g, state_ids(state), g.constant(ctx.hidden));
    nn::Var p = nn::softmax_rows(deletion_logits(g, z));
    std::vector<double> out(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) out[i] = p.value()(static_cast<nn::Index>(i), 1);
    return out;
  }

  /// Argmax placeholder count per slot.
  std::vector<int> placeholder_counts(const TableContext& ctx, const Tokens& state) const {
    nn::Graph g(false);
    nn::Var z = decode_hidden(g, state_ids(state), g.constant(ctx.hidden));
    const nn::Matrix& logits = placeholder_logits(g, z).value();
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (nn::Index r = 0; r < logits.rows(); ++r) logits.row(r).maxCoeff(&out[static_cast<std::size_t>(r)]);
    return out;
  }

  /// Argmax fill for every placeholder, in order of appearance.
  Tokens fill_tokens(const TableContext& ctx, const Tokens& state) const {
    std::vector<int> rows;
    for (std::size_t i = 0; i < state.size(); ++i)
      if (state[i] == kPlh) rows.push_back(static_cast<int>(i));
    if (rows.empty()) return {};
    nn::Graph g(false);
    nn::Var z = decode_hidden(g, state_ids(state), g.constant(ctx.hidden));
    return argmax_tokens(token_logits(g, z, rows).value());
  }

  /// Row-wise argmax over the vocabulary, never choosing PAD/BOS/EOS/PLH.
  Tokens argmax_tokens(const nn::Matrix& logits) const {
    Tokens out;
    for (nn::Index r = 0; r < logits.rows(); ++r) {
      int best = kUnkId;
      for (nn::Index c = 0; c < logits.cols(); ++c) {
        if (c == kPadId || c == kBosId || c == kEosId || c == kPlhId) continue;
        if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
      }
      out.push_back(tokens_.token(best));
    }
    return out;
  }

  // --- training ------------------------------------------------------------

  /// L_edit = L_ins + lambda * L_del for one (table, reference) pair and a
  /// sampled intermediate Y' (see make_intermediate).
  nn::Var edit_loss(nn::Graph& g, const Table& table, const Tokens& reference, const Intermediate& y_prime,
                    double lambda, EditLossParts* parts = nullptr) const {
    const std::string bos(kBos), eos(kEos);
    const EncoderOutput enc = encode(g, table);
    EditLossParts local;

    // Placeholder head on Y'.
    const InsertionOracle oracle = oracle_insertion(y_prime.tokens, reference);
    std::vector<int> counts = oracle.counts;
    for (auto& c : counts)
      if (c > config_.k_max) c = config_.k_max, ++local.clamped_slots;
    Tokens state1{bos};
    state1.insert(state1.end(), y_prime.tokens.begin(), y_prime.tokens.end());
    state1.push_back(eos);
    nn::Var z1 = decode_hidden(g, state_ids(state1), enc.hidden);
    nn::Var plh_loss = nn::scale(nn::cross_entropy(placeholder_logits(g, z1), counts), static_cast<double>(counts.size()));
    local.placeholder = plh_loss.scalar();

    // Token head on Y''.
    Tokens state2{bos};
    const Tokens inner2 = apply_insertions(y_prime.tokens, counts);
    state2.insert(state2.end(), inner2.begin(), inner2.end());
    state2.push_back(eos);
    std::vector<int> plh_rows, tok_targets;
    for (std::size_t k = 0, pos = 1; k < counts.size(); ++k) {
      for (int c = 0; c < counts[k]; ++c) {
        plh_rows.push_back(static_cast<int>(pos++));
        tok_targets.push_back(tokens_.id(oracle.fills[k][static_cast<std::size_t>(c)]));
      }
      if (k < y_prime.tokens.size()) ++pos;
    }
    nn::Var total = plh_loss;
    Tokens state3 = state2;
    if (!plh_rows.empty()) {
      nn::Var z2 = decode_hidden(g, state_ids(state2), enc.hidden);
      nn::Var logits = token_logits(g, z2, plh_rows);
      nn::Var tok_loss = nn::scale(nn::cross_entropy(logits, tok_targets), static_cast<double>(plh_rows.size()));
      local.token = tok_loss.scalar();
      total = nn::add(total, tok_loss);
      // Y''': the model's own argmax fills (values only).
      const Tokens fills = argmax_tokens(logits.value());
      for (std::size_t i = 0; i < plh_rows.size(); ++i) state3[static_cast<std::size_t>(plh_rows[i])] = fills[i];
    }

    // Deletion head on Y'''. Anchored (skeleton) tokens are always kept.
    const Tokens inner3(state3.begin() + 1, state3.end() - 1);
    if (!inner3.empty() && lambda > 0.0) {
      Alignment anchors;
      for (std::size_t k = 0, pos = 0; k < counts.size(); ++k) {
        pos += static_cast<std::size_t>(counts[k]);
        if (k < y_prime.tokens.size()) {
          if (y_prime.anchored[k]) anchors.emplace_back(pos, y_prime.source_pos[k]);
          ++pos;
        }
      }
      const std::vector<bool> del = oracle_deletion_anchored(inner3, reference, anchors);
      std::vector<int> targets(del.begin(), del.end());
      std::vector<int> rows(inner3.size());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i + 1);
      nn::Var z3 = decode_hidden(g, state_ids(state3), enc.hidden);
      nn::Var del_logits = nn::gather_rows(deletion_logits(g, z3), rows);
      nn::Var del_loss = nn::scale(nn::cross_entropy(del_logits, targets), static_cast<double>(rows.size()));
      local.deletion = del_loss.scalar();
      total = nn::add(total, nn::scale(del_loss, lambda));
    }
    if (parts) *parts = local;
    return total;
  }

  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }
  const RunConfig& config() const { return config_; }
  RunConfig& mutable_config() { return config_; }
  const Vocabulary& tokens() const { return tokens_; }
  const Vocabulary& keys() const { return keys_; }
  const TableEncoder& encoder() const { return *encoder_; }
  const nn::Linear& w_del() const { return w_del_; }
  const nn::Linear& w_plh() const { return w_plh_; }
  const nn::Linear& w_tok() const { return w_tok_; }

 private:
  RunConfig config_;
  Vocabulary tokens_;
  Vocabulary keys_;
  Rng rng_;
  nn::ParameterStore store_;
  std::optional<TableEncoder> encoder_;
  nn::Linear in_proj_;
  nn::Parameter* pos_emb_ = nullptr;
  std::vector<nn::DecoderLayer> layers_;
  nn::Linear w_del_;
  nn::Linear w_plh_;
  nn::Linear w_tok_;
};

}  // namespace sana
