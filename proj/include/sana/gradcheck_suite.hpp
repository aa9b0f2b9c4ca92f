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

// Registered finite-difference checks: every differentiable layer and both
// full models at toy sizes. Layer inputs are parameters too, so input
// gradients are checked alongside weight gradients. Each layer output is
// scored by a cross-entropy through a fixed random projection, which keeps
// the loss nonlinear and avoids symmetric directions (e.g. layer norm sums).

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sana/edit_oracle.hpp"
#include "sana/gradcheck.hpp"
#include "sana/layers.hpp"
#include "sana/pointer.hpp"
#include "sana/realizer.hpp"
#include "sana/table_encoder.hpp"

namespace sana {

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckEntry {
  std::string name;
  nn::GradCheckResult result;
  bool passed() const { return result.max_rel_error < kGradCheckTolerance; }
};

namespace suite {

inline nn::Var projected_loss(nn::Graph& g, nn::Var out, const nn::Matrix& proj) {
  std::vector<int> targets(static_cast<std::size_t>(out.rows()));
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = static_cast<int>(i % static_cast<std::size_t>(proj.cols()));
  return nn::cross_entropy(nn::matmul(out, g.constant(proj)), targets);
}

inline nn::Matrix random_matrix(nn::Index r, nn::Index c, Rng& rng) {
  nn::Matrix m(r, c);
  for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

inline Example toy_example() {
  Example ex;
  ex.table.attributes = {{"name", {"Ada", "Lovelace"}}, {"born", {"10", "December", "1815"}}, {"field", {"maths"}}};
  ex.reference = {"Ada", "Lovelace", "was", "born", "on", "10", "December", "1815", "and", "studied", "maths", "."};
  ex.skeleton = Tokens{"Ada", "Lovelace", "10", "December", "1815", "maths"};
  return ex;
}

inline RunConfig toy_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.dims = {8, 16, 2, 1, 8, 4, 3, 6};
  cfg.k_max = 4;
  cfg.max_len = 12;
  cfg.max_state_len = 64;
  cfg.seed = seed;
  return cfg;
}

}  // namespace suite

inline std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed = 7, nn::GradCheckOptions opt = {}) {
  using namespace nn;
  std::vector<GradCheckEntry> out;
  opt.seed = seed;
  constexpr Index kWidth = 8, kHidden = 12, kRows = 5, kMem = 4;

  auto layer_check = [&](const std::string& name, auto build) {
    ParameterStore store;
    Rng rng(seed);
    auto loss = build(store, rng);
    out.push_back({name, finite_difference_check(store, loss, opt)});
  };
  auto input = [](ParameterStore& store, const std::string& name, Index r, Index c, Rng& rng) -> Parameter& {
    Parameter& p = store.create(name, r, c, Init::kZeros, rng);
    p.value = suite::random_matrix(r, c, rng);
    return p;
  };

  layer_check("linear", [&](ParameterStore& store, Rng& rng) {
    Parameter& x = input(store, "x", kRows, kWidth, rng);
    Linear lin = Linear::create(store, "lin", kWidth, kHidden, rng);
    Matrix proj = suite::random_matrix(kHidden, 3, rng);
    return [&x, lin, proj](Graph& g) { return suite::projected_loss(g, lin(g, g.param(x)), proj); };
  });
  layer_check("layer_norm", [&](ParameterStore& store, Rng& rng) {
    Parameter& x = input(store, "x", kRows, kWidth, rng);
    LayerNorm ln = LayerNorm::create(store, "ln", kWidth, rng);
    ln.gain->value = suite::random_matrix(1, kWidth, rng);
    ln.bias->value = suite::random_matrix(1, kWidth, rng);
    Matrix proj = suite::random_matrix(kWidth, 3, rng);
    return [&x, ln, proj](Graph& g) { return suite::projected_loss(g, ln(g, g.param(x)), proj); };
  });
  for (const bool causal : {false, true}) {
    layer_check(causal ? "self_attention_causal" : "self_attention", [&](ParameterStore& store, Rng& rng) {
      Parameter& x = input(store, "x", kRows, kWidth, rng);
      MultiHeadAttention mha = MultiHeadAttention::create(store, "mha", kWidth, 2, rng);
      Matrix proj = suite::random_matrix(kWidth, 3, rng);
      return [&x, mha, proj, causal](Graph& g) {
        Var xv = g.param(x);
        return suite::projected_loss(g, mha(g, xv, xv, causal), proj);
      };
    });
  }
  layer_check("cross_attention", [&](ParameterStore& store, Rng& rng) {
    Parameter& x = input(store, "x", kRows, kWidth, rng);
    Parameter& m = input(store, "memory", kMem, kWidth, rng);
    MultiHeadAttention mha = MultiHeadAttention::create(store, "mha", kWidth, 2, rng);
    Matrix proj = suite::random_matrix(kWidth, 3, rng);
    return [&x, &m, mha, proj](Graph& g) { return suite::projected_loss(g, mha(g, g.param(x), g.param(m), false), proj); };
  });
  layer_check("feed_forward", [&](ParameterStore& store, Rng& rng) {
    Parameter& x = input(store, "x", kRows, kWidth, rng);
    FeedForward ffn = FeedForward::create(store, "ffn", kWidth, kHidden, rng);
    Matrix proj = suite::random_matrix(kWidth, 3, rng);
    return [&x, ffn, proj](Graph& g) { return suite::projected_loss(g, ffn(g, g.param(x)), proj); };
  });
  layer_check("encoder_layer", [&](ParameterStore& store, Rng& rng) {
    Parameter& x = input(store, "x", kRows, kWidth, rng);
    EncoderLayer layer = EncoderLayer::create(store, "enc", kWidth, kHidden, 2, rng);
    Matrix proj = suite::random_matrix(kWidth, 3, rng);
    return [&x, layer, proj](Graph& g) { return suite::projected_loss(g, layer(g, g.param(x)), proj); };
  });
  for (const bool causal : {false, true}) {
    layer_check(causal ? "decoder_layer_causal" : "decoder_layer", [&](ParameterStore& store, Rng& rng) {
      Parameter& x = input(store, "x", kRows, kWidth, rng);
      Parameter& m = input(store, "memory", kMem, kWidth, rng);
      DecoderLayer layer = DecoderLayer::create(store, "dec", kWidth, kHidden, 2, rng);
      Matrix proj = suite::random_matrix(kWidth, 3, rng);
      return [&x, &m, layer, proj, causal](Graph& g) {
        return suite::projected_loss(g, layer(g, g.param(x), g.param(m), causal), proj);
      };
    });
  }
  layer_check("pooled_pointer_nll", [&](ParameterStore& store, Rng& rng) {
    Parameter& s = input(store, "scores", 3, 6, rng);
    return [&s](Graph& g) { return pooled_nll(g.param(s), {{0, 2}, {5}, {1, 3, 4}}); };
  });

  const Example ex = suite::toy_example();
  Corpus corpus{ex};
  const Vocabulary tokens = build_vocabulary(corpus, 1000);
  const Vocabulary keys = build_key_vocabulary(corpus, 1000);

  {
    ParameterStore store;
    Rng rng(seed);
    const ModelDims dims = suite::toy_config(seed).dims;
    TableEncoder enc(store, "encoder", dims, tokens.size(), keys.size(), rng);
    const Matrix proj = suite::random_matrix(dims.width, 3, rng);
    const LinearizedTable cells = linearize_table(ex.table);
    out.push_back({"table_encoder", finite_difference_check(
                                        store,
                                        [&](Graph& g) {
                                          return suite::projected_loss(g, enc.encode(g, cells, tokens, keys).hidden, proj);
                                        },
                                        opt)});
  }
  {
    SkeletonPointer model(suite::toy_config(seed), tokens, keys);
    out.push_back({"skeleton_pointer",
                   finite_difference_check(model.parameters(), [&](Graph& g) { return model.loss(g, ex); }, opt)});
  }
  for (const bool tied : {false, true}) {
    RunConfig cfg = suite::toy_config(seed);
    cfg.tie_token_head = tied;
    EditRealizer model(cfg, tokens, keys);
    Rng rng(seed);
    const Intermediate y = make_intermediate(ex.reference, *ex.skeleton, rng, 0.5);
    out.push_back({tied ? "edit_realizer_tied" : "edit_realizer",
                   finite_difference_check(
                       model.parameters(),
                       [&](Graph& g) { return model.edit_loss(g, ex.table, ex.reference, y, 1.0); }, opt)});
  }
  return out;
}

}  // namespace sana
