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

// Constraint-masked iterative refinement. Starting from [BOS] skeleton [EOS],
// each round deletes (never a protected position), inserts placeholders and
// fills them, until the sequence stops changing or max_iter rounds ran.
//
// The procedure is generic over an edit policy so the state machine can be
// driven by the trained EditRealizer or by stubs in tests.

#pragma once

#include <algorithm>
#include <concepts>
#include <string>
#include <vector>

#include "sana/common.hpp"
#include "sana/table.hpp"

namespace sana {

template <typename P>
concept EditPolicy = requires(const P& p, const Table& table, const typename P::Context& ctx, const Tokens& state) {
  { p.prepare(table) } -> std::convertible_to<typename P::Context>;
  { p.delete_probs(ctx, state) } -> std::convertible_to<std::vector<double>>;
  { p.placeholder_counts(ctx, state) } -> std::convertible_to<std::vector<int>>;
  { p.fill_tokens(ctx, state) } -> std::convertible_to<Tokens>;
};

struct EditState {
  Tokens tokens;                 // [BOS] ... [EOS]
  std::vector<bool> protected_;  // true = never deleted
  int iteration = 0;

  bool valid() const {
    return tokens.size() >= 2 && tokens.size() == protected_.size() && tokens.front() == kBos &&
           tokens.back() == kEos && protected_.front() && protected_.back();
  }
};

enum class Termination { kFixedPoint, kMaxIterations };

inline const char* to_string(Termination t) { return t == Termination::kFixedPoint ? "fixed_point" : "max_iterations"; }

struct DecodeTrace {
  std::vector<EditState> snapshots;  // initial state first
  Termination termination = Termination::kMaxIterations;
  int iterations = 0;
};

struct DecodeOptions {
  int max_iter = 10;
  int k_max = 8;
  int max_state_len = 512;
  bool hard_constraints = true;
};

/// [BOS] + skeleton + [EOS]. Skeleton tokens are protected only under hard
/// constraints; the sentinels always are.
inline EditState init_state(const Tokens& skeleton, bool hard_constraints = true) {
  EditState s;
  s.tokens.emplace_back(kBos);
  s.tokens.insert(s.tokens.end(), skeleton.begin(), skeleton.end());
  s.tokens.emplace_back(kEos);
  s.protected_.assign(s.tokens.size(), hard_constraints);
  s.protected_.front() = s.protected_.back() = true;
  return s;
}

/// Removes unprotected positions whose P(delete) > 0.5.
inline EditState masked_delete(const EditState& state, const std::vector<double>& delete_probs) {
  if (delete_probs.size() != state.tokens.size())
    throw ShapeError("masked_delete: " + std::to_string(delete_probs.size()) + " scores for a state of " +
                     std::to_string(state.tokens.size()));
  EditState out;
  out.iteration = state.iteration;
  for (std::size_t i = 0; i < state.tokens.size(); ++i) {
    if (!state.protected_[i] && delete_probs[i] > 0.5) continue;
    out.tokens.push_back(state.tokens[i]);
    out.protected_.push_back(state.protected_[i]);
  }
  return out;
}

/// Inserts argmax placeholder counts (clamped to k_max), then fills every
/// placeholder. New tokens are unprotected.
template <EditPolicy P>
EditState insert_and_fill(const EditState& state, const P& policy, const typename P::Context& ctx,
                          const DecodeOptions& opt) {
  const std::vector<int> counts = policy.placeholder_counts(ctx, state.tokens);
  if (counts.size() + 1 != state.tokens.size())
    throw ShapeError("insert_and_fill: " + std::to_string(counts.size()) + " slot counts for a state of " +
                     std::to_string(state.tokens.size()));
  EditState out;
  out.iteration = state.iteration;
  for (std::size_t i = 0; i < state.tokens.size(); ++i) {
    out.tokens.push_back(state.tokens[i]);
    out.protected_.push_back(state.protected_[i]);
    if (i < counts.size()) {
      const int c = std::clamp(counts[i], 0, opt.k_max);
      out.tokens.insert(out.tokens.end(), static_cast<std::size_t>(c), std::string(kPlh));
      out.protected_.insert(out.protected_.end(), static_cast<std::size_t>(c), false);
    }
  }
  if (static_cast<int>(out.tokens.size()) > opt.max_state_len)
    throw Error("edit state grew to " + std::to_string(out.tokens.size()) + " tokens, above the cap of " +
                std::to_string(opt.max_state_len));
  if (out.tokens.size() == state.tokens.size()) return out;
  const Tokens fills = policy.fill_tokens(ctx, out.tokens);
  std::size_t f = 0;
  for (auto& t : out.tokens) {
    if (t != kPlh) continue;
    if (f >= fills.size()) throw ShapeError("insert_and_fill: fewer fills than placeholders");
    t = fills[f++];
  }
  if (f != fills.size()) throw ShapeError("insert_and_fill: more fills than placeholders");
  return out;
}

struct DecodeResult {
  Tokens tokens;  // sentinels stripped
  DecodeTrace trace;
};

template <EditPolicy P>
DecodeResult iterate(const Table& table, const Tokens& skeleton, const P& policy, const DecodeOptions& opt) {
  const auto ctx = policy.prepare(table);
  EditState state = init_state(skeleton, opt.hard_constraints);
  DecodeResult result;
  result.trace.snapshots.push_back(state);
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Tokens before = state.tokens;
    state = masked_delete(state, policy.delete_probs(ctx, state.tokens));
    state = insert_and_fill(state, policy, ctx, opt);
    state.iteration = it;
    result.trace.snapshots.push_back(state);
    result.trace.iterations = it;
    if (state.tokens == before) {
      result.trace.termination = Termination::kFixedPoint;
      break;
    }
  }
  result.tokens.assign(state.tokens.begin() + 1, state.tokens.end() - 1);
  return result;
}

}  // namespace sana
