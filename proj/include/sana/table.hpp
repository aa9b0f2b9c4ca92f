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

// Tables, examples, corpora, tokenization, vocabularies and linearization.

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sana/common.hpp"

namespace sana {

/// Maximal runs of non-whitespace, in order.
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

struct Attribute {
  std::string key;
  Tokens value_tokens;

  bool operator==(const Attribute&) const = default;
};

/// Ordered attributes; the order is significant downstream.
struct Table {
  std::vector<Attribute> attributes;

  bool operator==(const Table&) const = default;

  /// Union of all value tokens.
  std::unordered_set<std::string> value_token_set() const {
    std::unordered_set<std::string> out;
    for (const auto& a : attributes) out.insert(a.value_tokens.begin(), a.value_tokens.end());
    return out;
  }
};

struct Example {
  Table table;
  Tokens reference;
  std::optional<Tokens> skeleton;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory

  bool operator==(const Example& o) const {
    return table == o.table && reference == o.reference && skeleton == o.skeleton;
  }
};

using Corpus = std::vector<Example>;

// Trims and replaces inner whitespace runs with '_'.
inline std::string normalize_key(std::string_view key) {
  return join(tokenize(key), "_");
}

inline Example example_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "expected a JSON object");
  if (!j.contains("table")) throw ParseError(line, "missing \"table\"");
  if (!j["table"].is_array()) throw ParseError(line, "\"table\" must be an array");
  if (!j.contains("text") || !j["text"].is_string())
    throw ParseError(line, "missing string field \"text\"");
  Example ex;
  ex.line = line;
  for (const auto& cell : j["table"]) {
    if (!cell.is_object() || !cell.contains("key") || !cell.contains("value") ||
        !cell["key"].is_string() || !cell["value"].is_string())
      throw ParseError(line, "table entries need string \"key\" and \"value\"");
    Attribute a{normalize_key(cell["key"].get<std::string>()),
                tokenize(cell["value"].get<std::string>())};
    if (a.key.empty()) throw ParseError(line, "attribute with empty key");
    // Attributes with empty values carry nothing to linearize.
    if (a.value_tokens.empty()) continue;
    ex.table.attributes.push_back(std::move(a));
  }
  if (ex.table.attributes.empty()) throw ParseError(line, "table has zero attributes");
  ex.reference = tokenize(j["text"].get<std::string>());
  if (j.contains("skeleton")) {
    if (!j["skeleton"].is_array()) throw ParseError(line, "\"skeleton\" must be an array");
    Tokens s;
    for (const auto& t : j["skeleton"]) {
      if (!t.is_string()) throw ParseError(line, "skeleton entries must be strings");
      s.push_back(t.get<std::string>());
    }
    ex.skeleton = std::move(s);
  }
  return ex;
}

inline nlohmann::json example_to_json(const Example& ex) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& a : ex.table.attributes)
    table.push_back({{"key", a.key}, {"value", join(a.value_tokens)}});
  nlohmann::json j = {{"table", std::move(table)}, {"text", join(ex.reference)}};
  if (ex.skeleton) j["skeleton"] = *ex.skeleton;
  return j;
}

/// Reads JSON Lines. Blank lines are skipped; line numbers are kept.
inline Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (tokenize(text).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    corpus.push_back(example_from_json(j, line));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus: " + path);
  return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& ex : corpus) out << example_to_json(ex).dump() << '\n';
}

inline void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus: " + path);
  write_corpus(out, corpus);
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  Vocabulary() {
    for (auto t : {kPad, kUnk, kBos, kEos, kPlh}) add(std::string(t));
  }

  /// Rebuilds from an id-ordered token list (as stored in checkpoints).
  explicit Vocabulary(const Tokens& id_to_token) {
    if (id_to_token.size() < kNumReserved || id_to_token[kPadId] != kPad ||
        id_to_token[kUnkId] != kUnk || id_to_token[kBosId] != kBos ||
        id_to_token[kEosId] != kEos || id_to_token[kPlhId] != kPlh)
      throw Error("vocabulary does not start with the reserved tokens");
    for (const auto& t : id_to_token) {
      if (index_.count(t)) throw Error("duplicate vocabulary entry: " + t);
      add(t);
    }
  }

  int id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkId : it->second;
  }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const Tokens& tokens() const { return tokens_; }

  std::vector<int> ids(const Tokens& toks) const {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(id(t));
    return out;
  }

  void add(const std::string& token) {
    if (index_.count(token)) return;
    index_.emplace(token, static_cast<int>(tokens_.size()));
    tokens_.push_back(token);
  }

 private:
  Tokens tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Keeps the (cap - 5) most frequent tokens; ties go to the earlier first occurrence.
inline Vocabulary vocabulary_from_stream(const Tokens& stream, std::size_t cap) {
  if (cap < kNumReserved) throw ConfigError("vocabulary cap must be at least 5");
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::pair<std::string, std::size_t>> counts;  // first-occurrence order
  for (const auto& t : stream) {
    auto [it, fresh] = slot.emplace(t, counts.size());
    if (fresh) counts.emplace_back(t, 0);
    ++counts[it->second].second;
  }
  std::stable_sort(counts.begin(), counts.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (const auto& [tok, n] : counts) {
    if (vocab.size() >= cap) break;
    vocab.add(tok);
  }
  return vocab;
}

/// Token vocabulary over table values and reference texts.
inline Vocabulary build_vocabulary(const Corpus& corpus, std::size_t cap) {
  Tokens stream;
  for (const auto& ex : corpus) {
    for (const auto& a : ex.table.attributes)
      stream.insert(stream.end(), a.value_tokens.begin(), a.value_tokens.end());
    stream.insert(stream.end(), ex.reference.begin(), ex.reference.end());
  }
  return vocabulary_from_stream(stream, cap);
}

/// Attribute-key vocabulary.
inline Vocabulary build_key_vocabulary(const Corpus& corpus, std::size_t cap) {
  Tokens stream;
  for (const auto& ex : corpus)
    for (const auto& a : ex.table.attributes) stream.push_back(a.key);
  return vocabulary_from_stream(stream, cap);
}

// ---------------------------------------------------------------------------
// Linearization

struct LinearizedCell {
  std::string token;
  std::string key;
  int fwd_pos = 1;
  int bwd_pos = 1;

  bool operator==(const LinearizedCell&) const = default;
  bool is_eos() const { return token == kEos && key == kEos; }
};

using LinearizedTable = std::vector<LinearizedCell>;

/// One 4-tuple per value token in table order, then the (EOS, EOS, 1, 1) tuple.
inline LinearizedTable linearize_table(const Table& table) {
  LinearizedTable cells;
  for (const auto& a : table.attributes) {
    const int len = static_cast<int>(a.value_tokens.size());
    for (int j = 0; j < len; ++j)
      cells.push_back({a.value_tokens[static_cast<std::size_t>(j)], a.key, j + 1, len - j});
  }
  cells.push_back({std::string(kEos), std::string(kEos), 1, 1});
  return cells;
}

// ---------------------------------------------------------------------------
// Stop words

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline constexpr const char* kDefaultStopWords[] = {
    "a",       "about",   "above",   "after",   "again",   "against", "all",     "also",
    "am",      "an",      "and",     "any",     "are",     "as",      "at",      "be",
    "because", "been",    "before",  "being",   "below",   "between", "both",    "but",
    "by",      "can",     "could",   "did",     "do",      "does",    "doing",   "down",
    "during",  "each",    "either",  "else",    "ever",    "every",   "few",     "for",
    "from",    "further", "had",     "has",     "have",    "having",  "he",      "her",
    "here",    "hers",    "herself", "him",     "himself", "his",     "how",     "however",
    "i",       "if",      "in",      "into",    "is",      "it",      "its",     "itself",
    "just",    "least",   "less",    "many",    "may",     "me",      "might",   "more",
    "most",    "much",    "must",    "my",      "myself",  "neither", "no",      "nor",
    "not",     "now",     "of",      "off",     "often",   "on",      "once",    "one",
    "only",    "or",      "other",   "ought",   "our",     "ours",    "out",     "over",
    "own",     "per",     "same",    "shall",   "she",     "should",  "since",   "so",
    "some",    "such",    "than",    "that",    "the",     "their",   "theirs",  "them",
    "then",    "there",   "these",   "they",    "this",    "those",   "though",  "through",
    "thus",    "to",      "too",     "under",   "until",   "up",      "upon",    "us",
    "very",    "via",     "was",     "we",      "were",    "what",    "when",    "where",
    "whether", "which",   "while",   "who",     "whom",    "whose",   "why",     "will",
    "with",    "within",  "without", "would",   "yet",     "you",     "your",    "yours",
    ",",       ".",       ";",       ":",       "(",       ")",       "-",       "--",
    "'s",      "\"",      "'",       "`",       "``",      "''",      "!",       "?",
};

class StopWordList {
 public:
  StopWordList() = default;
  explicit StopWordList(const Tokens& words) {
    for (const auto& w : words) add(w);
  }

  static StopWordList defaults() {
    StopWordList s;
    for (const char* w : kDefaultStopWords) s.add(w);
    return s;
  }

  /// One token per line; blank lines ignored.
  static StopWordList load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stop-word list: " + path);
    StopWordList s;
    std::string line;
    while (std::getline(in, line))
      for (const auto& t : tokenize(line)) s.add(t);
    return s;
  }

  void add(std::string_view w) { words_.insert(ascii_lower(w)); }
  bool contains(std::string_view w) const { return words_.count(ascii_lower(w)) > 0; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

}  // namespace sana
