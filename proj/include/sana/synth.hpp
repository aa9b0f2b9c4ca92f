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

// Synthetic biography corpus. Each attribute value is assembled from part
// pools (e.g. day, month, year), and the reference is the concatenation of
// every sentence template whose slots are satisfied by the table.
//
// Template tokens are literals or slots:
//   {key}         the full value of `key`
//   {key.last}    its last token
//   {key?}        the full value, or nothing if `key` is absent
//   {a:k1|k2}     "a" or "an" for the first present key among k1, k2
// A template applies when every non-optional slot key is present and none of
// its `forbids` keys are.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sana/common.hpp"
#include "sana/table.hpp"

namespace sana {

struct AttributeSource {
  std::string key;
  std::vector<Tokens> parts;  // one token drawn from each part
  double presence = 1.0;
  std::string group;          // attributes in one group appear together
};

struct SentenceTemplate {
  std::string text;
  Tokens forbids;
};

struct TemplateSpec {
  std::vector<AttributeSource> attributes;  // in table order
  std::vector<SentenceTemplate> templates;  // in reference order
  std::uint64_t seed = 1;
  std::size_t min_attributes = 4;
  std::size_t max_attributes = 8;
  std::size_t min_templates = 2;
  std::size_t max_templates = 4;

  static TemplateSpec defaults(std::uint64_t seed = 1);
  void validate() const;
};

namespace detail {

struct Slot {
  enum Kind { kLiteral, kFull, kLast, kOptional, kArticle } kind = kLiteral;
  std::string text;   // literal text
  Tokens keys;        // referenced keys
};

inline Slot parse_slot(const std::string& tok) {
  if (tok.size() < 3 || tok.front() != '{' || tok.back() != '}') return {Slot::kLiteral, tok, {}};
  std::string body = tok.substr(1, tok.size() - 2);
  if (body.rfind("a:", 0) == 0) {
    Slot s{Slot::kArticle, "", {}};
    std::size_t start = 2;
    while (start <= body.size()) {
      const std::size_t bar = std::min(body.find('|', start), body.size());
      s.keys.push_back(body.substr(start, bar - start));
      start = bar + 1;
    }
    return s;
  }
  if (body.back() == '?') return {Slot::kOptional, "", {body.substr(0, body.size() - 1)}};
  if (body.size() > 5 && body.compare(body.size() - 5, 5, ".last") == 0)
    return {Slot::kLast, "", {body.substr(0, body.size() - 5)}};
  return {Slot::kFull, "", {body}};
}

inline bool starts_with_vowel(const std::string& s) {
  return !s.empty() && std::string_view("aeiouAEIOU").find(s.front()) != std::string_view::npos;
}

}  // namespace detail

inline void TemplateSpec::validate() const {
  auto known = [&](const std::string& key) {
    return std::any_of(attributes.begin(), attributes.end(), [&](const auto& a) { return a.key == key; });
  };
  for (const auto& a : attributes) {
    if (a.key.empty() || tokenize(a.key).size() != 1) throw ConfigError("synth: bad attribute key '" + a.key + "'");
    if (a.parts.empty()) throw ConfigError("synth: attribute '" + a.key + "' has no parts");
    for (const auto& p : a.parts)
      if (p.empty()) throw ConfigError("synth: attribute '" + a.key + "' has an empty pool");
    if (!(a.presence >= 0 && a.presence <= 1)) throw ConfigError("synth: presence must lie in [0, 1]");
  }
  for (const auto& t : templates) {
    for (const auto& tok : tokenize(t.text))
      for (const auto& k : detail::parse_slot(tok).keys)
        if (!known(k)) throw ConfigError("synth: template slot names unknown attribute '" + k + "'");
    for (const auto& k : t.forbids)
      if (!known(k)) throw ConfigError("synth: template forbids unknown attribute '" + k + "'");
  }
  if (min_attributes < 1 || min_attributes > max_attributes || min_templates > max_templates)
    throw ConfigError("synth: inconsistent bounds");
}

inline TemplateSpec TemplateSpec::defaults(std::uint64_t seed) {
  const Tokens first = {"Anna",  "Marco", "Elena", "Pierre", "Sofia", "Lucas", "Ingrid", "Tomas", "Clara", "Hugo",
                        "Nadia", "Felix", "Irene", "Oscar",  "Lena",  "Victor", "Maya",  "Julian", "Rosa", "Anton",
                        "Mila",  "Emil",  "Alba",  "Bruno",  "Carla", "Dario", "Greta", "Henrik", "Ida",  "Jonas"};
  const Tokens last = {"Moreau", "Rossi",   "Novak",  "Schmidt", "Silva",  "Costa",    "Berg",      "Weber",
                       "Jansen", "Horvat",  "Dubois", "Ferrari", "Petrov", "Santos",   "Fischer",   "Bauer",
                       "Romano", "Keller",  "Vidal",  "Marino",  "Nagy",   "Ortega",   "Larsen",    "Ricci",
                       "Blanco", "Wagner",  "Molnar", "Castro",  "Greco",  "Lindqvist"};
  Tokens days, birth_years, death_years;
  for (int d = 1; d <= 28; ++d) days.push_back(std::to_string(d));
  for (int y = 1900; y < 1960; ++y) birth_years.push_back(std::to_string(y));
  for (int y = 1960; y < 2020; ++y) death_years.push_back(std::to_string(y));
  const Tokens months = {"January", "February", "March",     "April",   "May",      "June",
                         "July",    "August",   "September", "October", "November", "December"};
  const Tokens cities = {"Lyon",   "Turin",  "Porto",  "Graz",    "Leiden", "Krakow", "Uppsala", "Seville",
                         "Bremen", "Ghent",  "Bergen", "Zagreb",  "Padua",  "Nantes", "Aarhus",  "Brno",
                         "Bilbao", "Lund",   "Tartu",  "Debrecen", "Genoa", "Lille",  "Basel",   "Cork"};
  const Tokens nationalities = {"French",  "Italian", "Portuguese", "Austrian", "Dutch",     "Polish",
                                "Swedish", "Spanish", "German",     "Belgian",  "Norwegian", "Irish"};
  const Tokens occupations = {"actor",    "singer",    "painter",    "architect",  "engineer",   "novelist",
                              "poet",     "composer",  "physicist",  "chemist",    "journalist", "sculptor",
                              "economist", "historian", "director",  "photographer"};
  TemplateSpec s;
  s.seed = seed;
  s.attributes = {
      {"name", {first, last}, 1.0, ""},
      {"birth_date", {days, months, birth_years}, 1.0, ""},
      {"birth_place", {cities}, 1.0, ""},
      {"death_date", {days, months, death_years}, 0.5, "death"},
      {"death_place", {cities}, 0.5, "death"},
      {"nationality", {nationalities}, 0.6, ""},
      {"occupation", {occupations}, 1.0, ""},
      {"alma_mater", {{"University"}, {"of"}, cities}, 0.4, ""},
      {"spouse", {first, last}, 0.4, ""},
      {"award", {{"Golden", "Silver", "Royal", "National", "Grand", "Honorary"},
                 {"Lion", "Medal", "Prize", "Star", "Cross", "Laurel"}},
       0.4, ""},
  };
  s.templates = {
      {"{name} ( born {birth_date} ) is {a:nationality|occupation} {nationality?} {occupation} .", {"death_date"}},
      {"{name} ( {birth_date} – {death_date} ) was {a:nationality|occupation} {nationality?} {occupation} .", {}},
      {"{name.last} was born in {birth_place} .", {"death_place"}},
      {"{name.last} was born in {birth_place} and died in {death_place} .", {}},
      {"{name.last} studied at the {alma_mater} .", {}},
      {"{name.last} married {spouse} .", {}},
      {"{name.last} received the {award} .", {}},
  };
  s.validate();
  return s;
}

/// Renders one template against the drawn values; empty if it does not apply.
inline Tokens render_template(const SentenceTemplate& t, const std::map<std::string, Tokens>& values) {
  for (const auto& k : t.forbids)
    if (values.count(k)) return {};
  Tokens out;
  for (const auto& tok : tokenize(t.text)) {
    const detail::Slot slot = detail::parse_slot(tok);
    switch (slot.kind) {
      case detail::Slot::kLiteral:
        out.push_back(slot.text);
        break;
      case detail::Slot::kFull:
      case detail::Slot::kLast:
      case detail::Slot::kOptional: {
        const auto it = values.find(slot.keys[0]);
        if (it == values.end()) {
          if (slot.kind == detail::Slot::kOptional) break;
          return {};
        }
        if (slot.kind == detail::Slot::kLast) {
          out.push_back(it->second.back());
        } else {
          out.insert(out.end(), it->second.begin(), it->second.end());
        }
        break;
      }
      case detail::Slot::kArticle: {
        const Tokens* first = nullptr;
        for (const auto& k : slot.keys)
          if (auto it = values.find(k); it != values.end()) {
            first = &it->second;
            break;
          }
        if (!first) return {};
        out.push_back(detail::starts_with_vowel(first->front()) ? "an" : "a");
        break;
      }
    }
  }
  return out;
}

/// Example `index` of the corpus; a pure function of (spec, index).
inline Example generate_example(const TemplateSpec& spec, std::uint64_t index) {
  Rng rng = Rng::derive(spec.seed, index);
  std::vector<bool> present(spec.attributes.size());
  std::map<std::string, bool> group_draw;
  for (std::size_t i = 0; i < spec.attributes.size(); ++i) {
    const auto& a = spec.attributes[i];
    const double u = rng.uniform();
    if (a.group.empty()) {
      present[i] = u < a.presence;
    } else {
      auto [it, fresh] = group_draw.emplace(a.group, u < a.presence);
      present[i] = it->second;
    }
  }
  std::map<std::string, Tokens> all_values;
  for (const auto& a : spec.attributes) {
    Tokens v;
    for (const auto& part : a.parts) v.push_back(part[rng.below(part.size())]);
    all_values[a.key] = std::move(v);
  }
  // Drop optional attributes from the back until the bounds hold.
  for (;;) {
    std::map<std::string, Tokens> values;
    std::size_t count = 0;
    for (std::size_t i = 0; i < spec.attributes.size(); ++i)
      if (present[i]) {
        values[spec.attributes[i].key] = all_values[spec.attributes[i].key];
        ++count;
      }
    Tokens reference;
    std::size_t used = 0;
    for (const auto& t : spec.templates) {
      Tokens s = render_template(t, values);
      if (s.empty()) continue;
      ++used;
      reference.insert(reference.end(), s.begin(), s.end());
    }
    if (count <= spec.max_attributes && used <= spec.max_templates) {
      if (count < spec.min_attributes || used < spec.min_templates)
        throw Error("synth: spec cannot satisfy the attribute/template minimums");
      Example ex;
      for (std::size_t i = 0; i < spec.attributes.size(); ++i)
        if (present[i]) ex.table.attributes.push_back({spec.attributes[i].key, values[spec.attributes[i].key]});
      ex.reference = std::move(reference);
      return ex;
    }
    std::size_t drop = spec.attributes.size();
    while (drop-- > 0)
      if (present[drop] && spec.attributes[drop].presence < 1.0) break;
    if (drop >= spec.attributes.size()) throw Error("synth: spec cannot satisfy the attribute/template maximums");
    for (std::size_t i = 0; i < spec.attributes.size(); ++i)
      if (!spec.attributes[drop].group.empty() && spec.attributes[i].group == spec.attributes[drop].group)
        present[i] = false;
    present[drop] = false;
  }
}

inline Corpus generate(const TemplateSpec& spec, std::size_t n) {
  if (n < 1) throw Error("synth: n must be at least 1");
  spec.validate();
  Corpus out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_example(spec, i));
  return out;
}

}  // namespace sana
