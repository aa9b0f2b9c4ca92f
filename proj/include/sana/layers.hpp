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

// Transformer building blocks on top of the autograd tape. Layers hold
// non-owning pointers into a ParameterStore.

#pragma once

#include <string>
#include <vector>

#include "sana/autograd.hpp"

namespace sana::nn {

struct Linear {
  Parameter* weight = nullptr;  // in x out
  Parameter* bias = nullptr;    // 1 x out, optional

  static Linear create(ParameterStore& store, const std::string& name, Index in, Index out, Rng& rng,
                       bool with_bias = true) {
    Linear l;
    l.weight = &store.create(name + ".w", in, out, Init::kXavier, rng);
    if (with_bias) l.bias = &store.create(name + ".b", 1, out, Init::kZeros, rng);
    return l;
  }

  Var operator()(Graph& g, Var x) const {
    Var y = matmul(x, g.param(*weight));
    return bias ? add_row(y, g.param(*bias)) : y;
  }
};

struct LayerNorm {
  Parameter* gain = nullptr;
  Parameter* bias = nullptr;

  static LayerNorm create(ParameterStore& store, const std::string& name, Index width, Rng& rng) {
    return {&store.create(name + ".g", 1, width, Init::kOnes, rng),
            &store.create(name + ".b", 1, width, Init::kZeros, rng)};
  }

  Var operator()(Graph& g, Var x) const { return layer_norm(x, g.param(*gain), g.param(*bias)); }
};

struct MultiHeadAttention {
  Linear query, key, value, output;
  int heads = 1;

  static MultiHeadAttention create(ParameterStore& store, const std::string& name, Index width, int heads, Rng& rng) {
    if (heads <= 0 || width % heads != 0)
      throw ConfigError("width " + std::to_string(width) + " not divisible by " + std::to_string(heads) + " heads");
    // No key bias: it adds a per-query constant to the logits, which softmax ignores.
    return {Linear::create(store, name + ".q", width, width, rng),
            Linear::create(store, name + ".k", width, width, rng, false),
            Linear::create(store, name + ".v", width, width, rng), Linear::create(store, name + ".o", width, width, rng),
            heads};
  }

  Var operator()(Graph& g, Var queries, Var memory, bool causal) const {
    Var q = query(g, queries);
    Var k = key(g, memory);
    Var v = value(g, memory);
    return output(g, attention(q, k, v, heads, causal));
  }
};

struct FeedForward {
  Linear inner, outer;

  static FeedForward create(ParameterStore& store, const std::string& name, Index width, Index hidden, Rng& rng) {
    return {Linear::create(store, name + ".1", width, hidden, rng), Linear::create(store, name + ".2", hidden, width, rng)};
  }

  Var operator()(Graph& g, Var x) const { return outer(g, relu(inner(g, x))); }
};

/// Post-norm encoder block: self-attention then feed-forward, each residual.
struct EncoderLayer {
  MultiHeadAttention self_attn;
  LayerNorm norm1;
  FeedForward ffn;
  LayerNorm norm2;

  static EncoderLayer create(ParameterStore& store, const std::string& name, Index width, Index hidden, int heads,
                             Rng& rng) {
    return {MultiHeadAttention::create(store, name + ".self", width, heads, rng),
            LayerNorm::create(store, name + ".ln1", width, rng),
            FeedForward::create(store, name + ".ffn", width, hidden, rng),
            LayerNorm::create(store, name + ".ln2", width, rng)};
  }

  Var operator()(Graph& g, Var x) const {
    x = norm1(g, add(x, self_attn(g, x, x, false)));
    return norm2(g, add(x, ffn(g, x)));
  }
};

/// Post-norm decoder block with self-attention (causal or full) and
/// cross-attention over an encoder memory.
struct DecoderLayer {
  MultiHeadAttention self_attn;
  LayerNorm norm1;
  MultiHeadAttention cross_attn;
  LayerNorm norm2;
  FeedForward ffn;
  LayerNorm norm3;

  static DecoderLayer create(ParameterStore& store, const std::string& name, Index width, Index hidden, int heads,
                             Rng& rng) {
    return {MultiHeadAttention::create(store, name + ".self", width, heads, rng),
            LayerNorm::create(store, name + ".ln1", width, rng),
            MultiHeadAttention::create(store, name + ".cross", width, heads, rng),
            LayerNorm::create(store, name + ".ln2", width, rng),
            FeedForward::create(store, name + ".ffn", width, hidden, rng),
            LayerNorm::create(store, name + ".ln3", width, rng)};
  }

  Var operator()(Graph& g, Var x, Var memory, bool causal) const {
    x = norm1(g, add(x, self_attn(g, x, x, causal)));
    x = norm2(g, add(x, cross_attn(g, x, memory, false)));
    return norm3(g, add(x, ffn(g, x)));
  }
};

}  // namespace sana::nn
