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

// Stage 1: a transformer pointer network that copies table tokens into a
// skeleton. Attention over encoder cells,
//   u(r_t, h_i) = (W_q r_t) . (W_k h_i) / sqrt(d_r),
// is pooled per distinct token to give the copy distribution.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sana/config.hpp"
#include "sana/model_io.hpp"
#include "sana/skeleton.hpp"
#include "sana/table_encoder.hpp"

namespace sana {

/// Attention over cells and the pooled per-token copy probabilities.
struct CopyDistribution {
  std::vector<double> alpha;
  Tokens tokens;              // distinct cell tokens in first-occurrence order
  std::vector<double> probs;  // parallel to tokens

  double prob(const std::string& token) const {
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i] == token) return probs[i];
    return 0.0;
  }

  /// Highest-probability token; ties go to the earliest cell.
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
};

/// Softmax over one row of attention logits.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) return {};
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += out[i] = std::exp(logits[i] - mx);
  for (auto& p : out) p /= z;
  return out;
}

/// P_copy(w) = sum of alpha over the cells holding w.
inline CopyDistribution copy_distribution(const std::vector<double>& alpha, const Tokens& cell_tokens) {
  if (alpha.size() != cell_tokens.size())
    throw ShapeError("copy_distribution: " + std::to_string(alpha.size()) + " weights for " +
                     std::to_string(cell_tokens.size()) + " cells");
  CopyDistribution d;
  d.alpha = alpha;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    auto [it, fresh] = slot.emplace(cell_tokens[i], d.tokens.size());
    if (fresh) {
      d.tokens.push_back(cell_tokens[i]);
      d.probs.push_back(0.0);
    }
    d.probs[it->second] += alpha[i];
  }
  return d;
}

struct BeamResult {
  Skeleton skeleton;
  double score = 0.0;      // summed log probability, EOS included when finished
  bool truncated = false;  // no hypothesis finished within max_len
};

class SkeletonPointer {
 public:
  SkeletonPointer(const RunConfig& config, Vocabulary tokens, Vocabulary keys)
      : config_(config), tokens_(std::move(tokens)), keys_(std::move(keys)), rng_(config.seed) {
    config_.validate();
    const auto& d = config_.dims;
    encoder_.emplace(store_, "pointer.encoder", d, tokens_.size(), keys_.size(), rng_);
    in_proj_ = nn::Linear::create(store_, "pointer.decoder.in", d.token_emb, d.width, rng_);
    pos_emb_ = &store_.create("pointer.decoder.pos_emb", config_.max_len + 2, d.width, nn::Init::kXavier, rng_);
    for (int l = 0; l < d.layers; ++l)
      layers_.push_back(nn::DecoderLayer::create(store_, "pointer.decoder.layer" + std::to_string(l), d.width, d.hidden,
                                                 d.heads, rng_));
    w_q_ = nn::Linear::create(store_, "pointer.w_q", d.width, d.width, rng_, false);
    w_k_ = nn::Linear::create(store_, "pointer.w_k", d.width, d.width, rng_, false);
  }

  static SkeletonPointer load(const std::filesystem::path& dir) {
    ModelHeader h = read_model_header(dir);
    if (h.kind != "pointer") throw Error(dir.string() + " holds a " + h.kind + " checkpoint, expected pointer");
    SkeletonPointer m(h.config, std::move(h.tokens), std::move(h.keys));
    nn::load_checkpoint(dir, m.store_);
    return m;
  }

  void save(const std::filesystem::path& dir, const nn::OptimizerState* opt = nullptr) const {
    write_model_header(dir, {"pointer", config_, tokens_, keys_});
    nn::save_checkpoint(dir, store_, opt);
  }

  EncoderOutput encode(nn::Graph& g, const Table& table) const {
    return encoder_->encode(g, linearize_table(table), tokens_, keys_);
  }

  /// Decoder hidden states r_0..r_{t} for a prefix of token ids (causal).
  nn::Var decode(nn::Graph& g, const EncoderOutput& enc, const std::vector<int>& prefix_ids) const {
    const auto n = static_cast<int>(prefix_ids.size());
    std::vector<int> pos(prefix_ids.size());
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = std::min(i, config_.max_len + 1);
    nn::Var x = nn::add(in_proj_(g, nn::embedding(g.param(encoder_->token_embedding()), prefix_ids)),
                        nn::embedding(g.param(*pos_emb_), pos));
    for (const auto& layer : layers_) x = layer(g, x, enc.hidden, true);
    return x;
  }

  /// Attention logits u(r_t, h_i): one row per decoder state, one column per cell.
  nn::Var attention_logits(nn::Graph& g, nn::Var states, nn::Var hidden) const {
    return nn::scale(nn::matmul_nt(w_q_(g, states), w_k_(g, hidden)),
                     1.0 / std::sqrt(static_cast<double>(config_.dims.width)));
  }

  /// Attention weights of the last decoder state over the cells.
  std::vector<double> pointer_attention(nn::Graph& g, nn::Var state_row, const EncoderOutput& enc) const {
    const nn::Matrix logits = attention_logits(g, state_row, enc.hidden).value();
    return softmax(std::vector<double>(logits.data(), logits.data() + logits.cols()));
  }

  /// Teacher-forced -sum_t log P_copy(s_t | s_<t, T) with s_0 = BOS, s_{q+1} = EOS.
  nn::Var loss(nn::Graph& g, const Table& table, const Skeleton& skeleton) const {
    const LinearizedTable cells = linearize_table(table);
    std::vector<std::vector<int>> gold;
    for (const auto& s : skeleton) {
      std::vector<int> hits;
      for (std::size_t i = 0; i + 1 < cells.size(); ++i)
        if (cells[i].token == s) hits.push_back(static_cast<int>(i));
      if (hits.empty()) throw Error("skeleton token \"" + s + "\" does not occur in the table");
      gold.push_back(std::move(hits));
    }
    gold.push_back({static_cast<int>(cells.size()) - 1});
    std::vector<int> prefix{kBosId};
    for (const auto& s : skeleton) prefix.push_back(tokens_.id(s));
    EncoderOutput enc = encoder_->encode(g, cells, tokens_, keys_);
    nn::Var states = decode(g, enc, prefix);
    return nn::pooled_nll(attention_logits(g, states, enc.hidden), gold);
  }

  nn::Var loss(nn::Graph& g, const Example& ex) const {
    if (!ex.skeleton) throw Error("pointer loss needs an annotated skeleton");
    return loss(g, ex.table, *ex.skeleton);
  }

  /// Copy distribution for the next token after `prefix` (tokens, BOS implied).
  CopyDistribution next_distribution(nn::Graph& g, const EncoderOutput& enc, const Tokens& prefix) const {
    std::vector<int> ids{kBosId};
    for (const auto& t : prefix) ids.push_back(tokens_.id(t));
    nn::Var states = decode(g, enc, ids);
    nn::Var last = nn::slice_rows(states, states.rows() - 1, 1);
    return copy_distribution(pointer_attention(g, last, enc), enc.cell_tokens);
  }

  /// Length-unnormalized beam search (normalization behind config.length_normalize).
  BeamResult beam_search(const Table& table, int beam_width, int max_len) const {
    if (beam_width < 1) throw ConfigError("beam width must be at least 1");
    BeamResult best = run_beam(table, beam_width, max_len);
    if (beam_width > 1) {
      // Beam pruning can in principle drop the greedy path; never return worse.
      BeamResult greedy = run_beam(table, 1, max_len);
      const bool better = greedy.truncated == best.truncated ? rank(greedy) > rank(best) : best.truncated;
      if (better) best = std::move(greedy);
    }
    return best;
  }

  BeamResult beam_search(const Table& table) const { return beam_search(table, config_.beam_width, config_.max_len); }

  /// Sum of log P_copy along a forced skeleton, EOS included.
  double sequence_log_prob(const Table& table, const Skeleton& skeleton) const {
    nn::Graph g(false);
    return -loss(g, table, skeleton).scalar();
  }

  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }
  const RunConfig& config() const { return config_; }
  const Vocabulary& tokens() const { return tokens_; }
  const Vocabulary& keys() const { return keys_; }
  const TableEncoder& encoder() const { return *encoder_; }

 private:
  struct Hypothesis {
    Tokens tokens;
    double score = 0.0;
  };

  double rank(const BeamResult& r) const {
    if (!config_.length_normalize) return r.score;
    return r.score / static_cast<double>(r.skeleton.size() + (r.truncated ? 0 : 1));
  }

  BeamResult run_beam(const Table& table, int beam_width, int max_len) const {
    nn::Graph g(false);
    const EncoderOutput enc = encode(g, table);
    const auto k = static_cast<std::size_t>(beam_width);
    std::vector<Hypothesis> live{{}};
    std::vector<BeamResult> finished;
    auto norm = [&](double score, std::size_t len) {
      return config_.length_normalize ? score / static_cast<double>(len) : score;
    };
    for (int step = 0; step <= max_len && !live.empty(); ++step) {
      struct Candidate {
        std::size_t hyp;
        std::size_t token;
        double score;
      };
      std::vector<Candidate> cands;
      std::vector<CopyDistribution> dists;
      for (std::size_t h = 0; h < live.size(); ++h) {
        dists.push_back(next_distribution(g, enc, live[h].tokens));
        const auto& d = dists.back();
        for (std::size_t t = 0; t < d.tokens.size(); ++t) {
          if (d.probs[t] <= 0.0) continue;
          cands.push_back({h, t, live[h].score + std::log(d.probs[t])});
        }
      }
      std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
      // EOS among the top-k candidates finishes a hypothesis; the best k
      // non-EOS candidates stay live.
      std::vector<Hypothesis> next;
      for (std::size_t rank_i = 0; rank_i < cands.size() && next.size() < k; ++rank_i) {
        const auto& c = cands[rank_i];
        const std::string& tok = dists[c.hyp].tokens[c.token];
        if (tok == kEos) {
          if (rank_i < k) finished.push_back({live[c.hyp].tokens, c.score, false});
          continue;
        }
        Hypothesis h = live[c.hyp];
        h.tokens.push_back(tok);
        h.score = c.score;
        next.push_back(std::move(h));
      }
      // At the length limit only EOS can still finish; the live prefixes are
      // kept as the truncated fallback.
      if (step == max_len) break;
      live = std::move(next);
      if (finished.size() >= k) break;
      if (!finished.empty() && !live.empty() && !config_.length_normalize) {
        // Scores only decrease, so no live hypothesis can overtake the best finished one.
        double best_fin = -std::numeric_limits<double>::infinity();
        for (const auto& f : finished) best_fin = std::max(best_fin, f.score);
        double best_live = -std::numeric_limits<double>::infinity();
        for (const auto& h : live) best_live = std::max(best_live, h.score);
        if (best_fin >= best_live) break;
      }
    }
    if (finished.empty()) {
      BeamResult r;
      r.truncated = true;
      if (!live.empty()) {
        auto it = std::max_element(live.begin(), live.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
        r.skeleton = it->tokens;
        r.score = it->score;
      }
      return r;
    }
    auto it = std::max_element(finished.begin(), finished.end(), [&](const auto& a, const auto& b) {
      return norm(a.score, a.skeleton.size() + 1) < norm(b.score, b.skeleton.size() + 1);
    });
    return *it;
  }

  RunConfig config_;
  Vocabulary tokens_;
  Vocabulary keys_;
  Rng rng_;
  nn::ParameterStore store_;
  std::optional<TableEncoder> encoder_;
  nn::Linear in_proj_;
  nn::Parameter* pos_emb_ = nullptr;
  std::vector<nn::DecoderLayer> layers_;
  nn::Linear w_q_;
  nn::Linear w_k_;
};

}  // namespace sana
