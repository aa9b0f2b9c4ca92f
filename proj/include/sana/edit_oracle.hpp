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

// Levenshtein expert policy for the edit realizer.
//
// The expert picks the action minimizing the edit distance to the reference.
// Restricted to pure insertion (from a subsequence of the reference) or pure
// deletion, an LCS alignment attains that minimum, so the oracle is built
// constructively from alignments:
//   insertion: align the current sequence into the reference; every gap of
//              unmatched reference tokens becomes one slot (count + tokens).
//   deletion:  keep exactly the positions on a leftmost LCS alignment.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sana/common.hpp"

namespace sana {

/// Minimal number of insertions, deletions and substitutions turning a into b.
template <typename T>
std::size_t levenshtein_distance(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

using Alignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Index pairs (i in a, j in b) of a longest common subsequence. Among all
/// longest ones this picks the lexicographically smallest pair sequence
/// (earliest index in a first, then in b).
template <typename T>
Alignment lcs_alignment(const std::vector<T>& a, const std::vector<T>& b) {
  const std::size_t n = a.size(), m = b.size();
  // suffix[i][j] = |LCS(a[i:], b[j:])|
  std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      suffix[i][j] = a[i] == b[j] ? suffix[i + 1][j + 1] + 1 : std::max(suffix[i + 1][j], suffix[i][j + 1]);
  Alignment out;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j] && suffix[i][j] == suffix[i + 1][j + 1] + 1) {
      out.emplace_back(i++, j++);
    } else if (suffix[i][j + 1] == suffix[i][j]) {
      ++j;
    } else {
      ++i;
    }
  }
  return out;
}

template <typename T>
std::vector<T> lcs(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  for (const auto& [i, j] : lcs_alignment(a, b)) out.push_back(a[i]);
  return out;
}

/// A corrupted copy of the reference (Y') with bookkeeping.
struct Intermediate {
  Tokens tokens;
  std::vector<std::size_t> source_pos;  // index of each token in the reference
  std::vector<bool> anchored;           // true for tokens of LCS(skeleton, reference)
  double keep_rate = 1.0;
};

/// Protects X = LCS(skeleton, reference) and deletes every other reference
/// token independently with probability 1 - rho, rho ~ U[0, 1) unless forced.
inline Intermediate make_intermediate(const Tokens& reference, const Tokens& skeleton, Rng& rng,
                                      std::optional<double> forced_keep_rate = std::nullopt) {
  std::vector<bool> anchored(reference.size(), false);
  for (const auto& [s, r] : lcs_alignment(skeleton, reference)) anchored[r] = true;
  Intermediate out;
  out.keep_rate = forced_keep_rate ? *forced_keep_rate : rng.uniform();
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const bool keep = anchored[j] || rng.uniform() < out.keep_rate;
    if (!keep) continue;
    out.tokens.push_back(reference[j]);
    out.source_pos.push_back(j);
    out.anchored.push_back(anchored[j]);
  }
  return out;
}

/// Per-slot insertion supervision: counts[k] tokens (fills[k]) go into slot k,
/// where slot k sits before current[k] and the last slot after the last token.
struct InsertionOracle {
  std::vector<int> counts;
  std::vector<Tokens> fills;
};

inline InsertionOracle oracle_insertion(const Tokens& current, const Tokens& reference) {
  InsertionOracle out;
  out.counts.reserve(current.size() + 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i <= current.size(); ++i) {
    Tokens gap;
    if (i < current.size()) {
      while (j < reference.size() && reference[j] != current[i]) gap.push_back(reference[j++]);
      if (j == reference.size())
        throw Error("oracle_insertion: current sequence is not a subsequence of the reference");
      ++j;
    } else {
      while (j < reference.size()) gap.push_back(reference[j++]);
    }
    out.counts.push_back(static_cast<int>(gap.size()));
    out.fills.push_back(std::move(gap));
  }
  return out;
}

/// Inserts counts[k] placeholders into slot k; |counts| must be |y| + 1.
inline Tokens apply_insertions(const Tokens& y, const std::vector<int>& counts,
                               const std::string& placeholder = std::string(kPlh)) {
  if (counts.size() != y.size() + 1)
    throw ShapeError("apply_insertions: " + std::to_string(counts.size()) + " slots for a sequence of " +
                     std::to_string(y.size()));
  Tokens out;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw ShapeError("apply_insertions: negative count");
    out.insert(out.end(), static_cast<std::size_t>(counts[k]), placeholder);
    if (k < y.size()) out.push_back(y[k]);
  }
  return out;
}

/// Inserts the given tokens into each slot.
inline Tokens apply_insertions(const Tokens& y, const std::vector<Tokens>& fills) {
  if (fills.size() != y.size() + 1)
    throw ShapeError("apply_insertions: " + std::to_string(fills.size()) + " slots for a sequence of " +
                     std::to_string(y.size()));
  Tokens out;
  for (std::size_t k = 0; k < fills.size(); ++k) {
    out.insert(out.end(), fills[k].begin(), fills[k].end());
    if (k < y.size()) out.push_back(y[k]);
  }
  return out;
}

/// Per-position labels: true = delete. Positions on a leftmost LCS alignment
/// with the reference are kept.
inline std::vector<bool> oracle_deletion(const Tokens& current, const Tokens& reference) {
  std::vector<bool> del(current.size(), true);
  for (const auto& [i, j] : lcs_alignment(current, reference)) del[i] = false;
  return del;
}

/// Like oracle_deletion, but the given (position in current, position in
/// reference) anchors must be kept: the alignment is an LCS of each segment
/// between consecutive anchors. Anchors must be strictly increasing in both.
inline std::vector<bool> oracle_deletion_anchored(const Tokens& current, const Tokens& reference,
                                                  const Alignment& anchors) {
  std::vector<bool> del(current.size(), true);
  std::size_t ci = 0, rj = 0;
  auto segment = [&](std::size_t c_end, std::size_t r_end) {
    const Tokens a(current.begin() + static_cast<std::ptrdiff_t>(ci), current.begin() + static_cast<std::ptrdiff_t>(c_end));
    const Tokens b(reference.begin() + static_cast<std::ptrdiff_t>(rj),
                   reference.begin() + static_cast<std::ptrdiff_t>(r_end));
    for (const auto& [i, j] : lcs_alignment(a, b)) del[ci + i] = false;
  };
  for (const auto& [c, r] : anchors) {
    if (c < ci || r < rj || c >= current.size() || r >= reference.size() || current[c] != reference[r])
      throw Error("oracle_deletion_anchored: invalid anchor");
    segment(c, r);
    del[c] = false;
    ci = c + 1;
    rj = r + 1;
  }
  segment(current.size(), reference.size());
  return del;
}

}  // namespace sana
