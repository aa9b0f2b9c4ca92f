#include <set>

#include <gtest/gtest.h>

#include "sana/skeleton.hpp"
#include "sana/synth.hpp"

namespace sana {
namespace {

bool contains_run(const Tokens& seq, const Tokens& run) {
  return std::search(seq.begin(), seq.end(), run.begin(), run.end()) != seq.end();
}

TEST(Synth, Deterministic) {
  const TemplateSpec spec = TemplateSpec::defaults(7);
  const Corpus a = generate(spec, 50);
  EXPECT_EQ(a, generate(spec, 50));
  EXPECT_EQ(a[17], generate_example(spec, 17));
  // Prefixes agree, so corpora of different sizes share examples.
  const Corpus b = generate(spec, 20);
  EXPECT_TRUE(std::equal(b.begin(), b.end(), a.begin()));
  EXPECT_NE(a, generate(TemplateSpec::defaults(8), 50));
}

TEST(Synth, VocabularyAroundThreeHundred) {
  const Corpus c = generate(TemplateSpec::defaults(1), 2000);
  const std::size_t v = build_vocabulary(c, 50000).size() - kNumReserved;
  EXPECT_GE(v, 250u);
  EXPECT_LE(v, 350u);
}

TEST(Synth, ShapeBounds) {
  const Corpus c = generate(TemplateSpec::defaults(3), 500);
  double len = 0;
  for (const auto& ex : c) {
    EXPECT_GE(ex.table.attributes.size(), 4u);
    EXPECT_LE(ex.table.attributes.size(), 8u);
    const auto periods = std::count(ex.reference.begin(), ex.reference.end(), ".");
    EXPECT_GE(periods, 2);
    EXPECT_LE(periods, 4);
    len += static_cast<double>(ex.reference.size());
  }
  len /= static_cast<double>(c.size());
  EXPECT_GT(len, 20);
  EXPECT_LT(len, 40);
}

TEST(Synth, ReferencesAreFaithful) {
  const std::set<std::string> literals{"(", ")", "born", "is", "a", "an", "–", "was", ".", "in", "and", "died",
                                       "studied", "at", "the", "married", "received"};
  const Corpus c = generate(TemplateSpec::defaults(4), 300);
  for (const auto& ex : c) {
    const auto values = ex.table.value_token_set();
    for (const auto& t : ex.reference) EXPECT_TRUE(values.count(t) || literals.count(t)) << t;
    for (const auto& a : ex.table.attributes)
      EXPECT_TRUE(contains_run(ex.reference, a.value_tokens)) << a.key << " missing from " << join(ex.reference);
    EXPECT_FALSE(annotate_skeleton(ex.table, ex.reference, StopWordList::defaults()).empty());
  }
}

TEST(Synth, DeathAttributesTravelTogether) {
  for (const auto& ex : generate(TemplateSpec::defaults(5), 300)) {
    bool date = false, place = false;
    for (const auto& a : ex.table.attributes) {
      date |= a.key == "death_date";
      place |= a.key == "death_place";
    }
    EXPECT_EQ(date, place);
  }
}

TEST(Synth, TemplateSlots) {
  const std::map<std::string, Tokens> v{{"name", {"Anna", "Berg"}}, {"occupation", {"engineer"}}};
  EXPECT_EQ(render_template({"{name.last} is {a:nationality|occupation} {nationality?} {occupation} .", {}}, v),
            tokenize("Berg is an engineer ."));
  EXPECT_TRUE(render_template({"{name} married {spouse} .", {}}, v).empty());
  EXPECT_TRUE(render_template({"{name} .", {"occupation"}}, v).empty());
}

TEST(Synth, ValidationErrors) {
  TemplateSpec s = TemplateSpec::defaults();
  s.templates.push_back({"{nobody} .", {}});
  EXPECT_THROW(s.validate(), ConfigError);
  s = TemplateSpec::defaults();
  s.attributes[0].presence = 2;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(generate(TemplateSpec::defaults(), 0), Error);
}

}  // namespace
}  // namespace sana
