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
#include <cctype>

#include "sana/table.hpp"

namespace sana {

using Skeleton = Tokens;

/// Digits with optional separators (",", ".", "-", "/") and at least one digit.
inline bool is_numeric_token(std::string_view t) {
  bool digit = false;
  for (char c : t) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != ',' && c != '.' && c != '-' && c != '/') {
      return false;
    }
  }
  return digit;
}

inline bool is_stop_word(std::string_view token, const StopWordList& stopwords) {
  return !is_numeric_token(token) && stopwords.contains(token);
}

/// Reference tokens, left to right, that occur among the table's value tokens
/// (exact match) and are not stop words. Repeated reference tokens repeat.
inline Skeleton annotate_skeleton(const Table& table, const Tokens& reference,
                                  const StopWordList& stopwords) {
  const auto values = table.value_token_set();
  Skeleton out;
  for (const auto& y : reference)
    if (values.count(y) && !is_stop_word(y, stopwords)) out.push_back(y);
  return out;
}

inline void annotate_corpus(Corpus& corpus, const StopWordList& stopwords) {
  for (auto& ex : corpus) ex.skeleton = annotate_skeleton(ex.table, ex.reference, stopwords);
}

}  // namespace sana
