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

// Corpus BLEU-4, PARENT and PARENT-T.
//
// PARENT uses the word-overlap entailment model: an n-gram is entailed by the
// table to the degree its tokens occur among the table's values. Per order n:
//   precision  sum_g min(#h, #r) + (#h - min(#h, #r)) * w(g)  /  sum_g #h
//   recall     sum_g min(#r, #h) * w(g)                       /  sum_g #r * w(g)
// An order whose denominator is zero counts as 1. Each side is the geometric
// mean over n = 1..4; table recall is the mean per-attribute LCS coverage.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sana/common.hpp"
#include "sana/edit_oracle.hpp"
#include "sana/table.hpp"

namespace sana {

inline constexpr int kMaxOrder = 4;

using NgramCounts = std::map<Tokens, int>;

inline NgramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NgramCounts out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++out[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

/// Corpus-level BLEU-4 in [0, 100]. Unigram precision is unsmoothed; orders
/// 2..4 use add-one smoothing so short sentences do not collapse to zero.
inline double bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references) {
  if (hypotheses.empty()) throw Error("bleu: empty hypothesis set");
  if (hypotheses.size() != references.size())
    throw Error("bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                std::to_string(references.size()) + " references");
  double matches[kMaxOrder] = {}, totals[kMaxOrder] = {};
  double hyp_len = 0, ref_len = 0;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    hyp_len += static_cast<double>(hypotheses[k].size());
    ref_len += static_cast<double>(references[k].size());
    for (int n = 1; n <= kMaxOrder; ++n) {
      const NgramCounts h = ngram_counts(hypotheses[k], static_cast<std::size_t>(n));
      const NgramCounts r = ngram_counts(references[k], static_cast<std::size_t>(n));
      for (const auto& [g, c] : h) {
        totals[n - 1] += c;
        if (auto it = r.find(g); it != r.end()) matches[n - 1] += std::min(c, it->second);
      }
    }
  }
  if (matches[0] == 0 || hyp_len == 0) return 0.0;
  double log_sum = std::log(matches[0] / totals[0]);
  for (int n = 2; n <= kMaxOrder; ++n) log_sum += std::log((matches[n - 1] + 1) / (totals[n - 1] + 1));
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return std::min(100.0, 100.0 * bp * std::exp(log_sum / kMaxOrder));
}

/// Fraction of the n-gram's tokens that occur in some value of the table.
inline double table_entailment_weight(const Tokens& ngram, const std::unordered_set<std::string>& values) {
  if (ngram.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : ngram) hits += values.count(t);
  return static_cast<double>(hits) / static_cast<double>(ngram.size());
}

inline double table_entailment_weight(const Tokens& ngram, const Table& table) {
  return table_entailment_weight(ngram, table.value_token_set());
}

/// Mean over attributes of |LCS(value, hypothesis)| / |value|; 1 for an empty table.
inline double table_recall(const Tokens& hypothesis, const Table& table) {
  if (table.attributes.empty()) return 1.0;
  double sum = 0;
  for (const auto& a : table.attributes) {
    if (a.value_tokens.empty()) continue;
    sum += static_cast<double>(lcs_alignment(a.value_tokens, hypothesis).size()) /
           static_cast<double>(a.value_tokens.size());
  }
  return sum / static_cast<double>(table.attributes.size());
}

inline double f1_score(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

struct PrfScore {
  double precision = 0, recall = 0, f1 = 0;
};

/// Intermediate PARENT quantities, exposed for inspection and tests.
struct ParentDetail {
  double precision_n[kMaxOrder] = {};
  double ref_recall_n[kMaxOrder] = {};
  double precision = 0;
  double ref_recall = 0;
  double table_recall = 0;
  PrfScore score;
};

namespace detail {
inline double geometric_mean(const double* v) {
  double log_sum = 0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (v[n] <= 0) return 0.0;
    log_sum += std::log(v[n]);
  }
  return std::exp(log_sum / kMaxOrder);
}
}  // namespace detail

inline ParentDetail parent_detail(const Tokens& hypothesis, const Tokens& reference, const Table& table,
                                  double lambda_mix = 0.5) {
  const auto values = table.value_token_set();
  ParentDetail d;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const NgramCounts h = ngram_counts(hypothesis, static_cast<std::size_t>(n));
    const NgramCounts r = ngram_counts(reference, static_cast<std::size_t>(n));
    double num = 0, den = 0;
    for (const auto& [g, c] : h) {
      const auto it = r.find(g);
      const int matched = it == r.end() ? 0 : std::min(c, it->second);
      num += matched + (c - matched) * table_entailment_weight(g, values);
      den += c;
    }
    d.precision_n[n - 1] = den > 0 ? num / den : 1.0;
    num = den = 0;
    for (const auto& [g, c] : r) {
      const double w = table_entailment_weight(g, values);
      const auto it = h.find(g);
      const int matched = it == h.end() ? 0 : std::min(c, it->second);
      num += matched * w;
      den += c * w;
    }
    d.ref_recall_n[n - 1] = den > 0 ? num / den : 1.0;
  }
  d.precision = hypothesis.empty() ? 0.0 : detail::geometric_mean(d.precision_n);
  d.ref_recall = detail::geometric_mean(d.ref_recall_n);
  d.table_recall = table_recall(hypothesis, table);
  d.score.precision = d.precision;
  d.score.recall = std::pow(d.ref_recall, lambda_mix) * std::pow(d.table_recall, 1 - lambda_mix);
  d.score.f1 = f1_score(d.score.precision, d.score.recall);
  return d;
}

inline PrfScore parent(const Tokens& hypothesis, const Tokens& reference, const Table& table,
                       double lambda_mix = 0.5) {
  return parent_detail(hypothesis, reference, table, lambda_mix).score;
}

/// Table-only variant: no reference matching, recall is table recall alone.
inline PrfScore parent_t(const Tokens& hypothesis, const Table& table, double* precision_n = nullptr) {
  const auto values = table.value_token_set();
  double p[kMaxOrder];
  for (int n = 1; n <= kMaxOrder; ++n) {
    double num = 0, den = 0;
    for (const auto& [g, c] : ngram_counts(hypothesis, static_cast<std::size_t>(n))) {
      num += c * table_entailment_weight(g, values);
      den += c;
    }
    p[n - 1] = den > 0 ? num / den : 1.0;
    if (precision_n) precision_n[n - 1] = p[n - 1];
  }
  PrfScore s;
  s.precision = hypothesis.empty() ? 0.0 : detail::geometric_mean(p);
  s.recall = table_recall(hypothesis, table);
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

struct ExampleScore {
  PrfScore parent;
  PrfScore parent_t;
};

struct MetricReport {
  double bleu = 0;
  PrfScore parent;
  PrfScore parent_t;
  std::vector<ExampleScore> examples;

  nlohmann::json to_json() const {
    auto prf = [](const PrfScore& s) {
      return nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
    };
    nlohmann::json per = nlohmann::json::array();
    for (const auto& e : examples) per.push_back({{"parent", prf(e.parent)}, {"parent_t", prf(e.parent_t)}});
    return {{"bleu", bleu}, {"parent", prf(parent)}, {"parent_t", prf(parent_t)}, {"examples", per}};
  }
};

/// Scores hypotheses against the gold examples. Corpus precision and recall
/// are means over examples; corpus F1 is their harmonic mean.
inline MetricReport evaluate(const std::vector<Tokens>& hypotheses, const Corpus& gold, double lambda_mix = 0.5) {
  if (hypotheses.size() != gold.size())
    throw Error("evaluate: " + std::to_string(hypotheses.size()) + " outputs for " + std::to_string(gold.size()) +
                " gold examples");
  std::vector<Tokens> refs;
  refs.reserve(gold.size());
  for (const auto& ex : gold) refs.push_back(ex.reference);
  MetricReport report;
  report.bleu = bleu(hypotheses, refs);
  for (std::size_t k = 0; k < gold.size(); ++k) {
    ExampleScore s{parent(hypotheses[k], refs[k], gold[k].table, lambda_mix), parent_t(hypotheses[k], gold[k].table)};
    report.parent.precision += s.parent.precision;
    report.parent.recall += s.parent.recall;
    report.parent_t.precision += s.parent_t.precision;
    report.parent_t.recall += s.parent_t.recall;
    report.examples.push_back(s);
  }
  const double n = static_cast<double>(gold.size());
  for (PrfScore* s : {&report.parent, &report.parent_t}) {
    s->precision /= n;
    s->recall /= n;
    s->f1 = f1_score(s->precision, s->recall);
  }
  return report;
}

}  // namespace sana
