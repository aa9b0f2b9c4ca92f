#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sana/edit_oracle.hpp"
#include "sana/table.hpp"

namespace sana {
namespace {

Tokens split(const std::string& s) { return tokenize(s); }

TEST(Levenshtein, KnownDistances) {
  EXPECT_EQ(levenshtein_distance(split("k i t t e n"), split("s i t t i n g")), 3u);
  EXPECT_EQ(levenshtein_distance(Tokens{}, split("a b c")), 3u);
  EXPECT_EQ(levenshtein_distance(split("a b"), split("a b")), 0u);
}

TEST(Levenshtein, MatchesSearchOnRandomPairs) {
  Rng rng(12);
  const Tokens alphabet{"a", "b", "c"};
  for (int trial = 0; trial < 60; ++trial) {
    Tokens a, b;
    for (std::size_t i = rng.below(5); i > 0; --i) a.push_back(alphabet[rng.below(3)]);
    for (std::size_t i = rng.below(5); i > 0; --i) b.push_back(alphabet[rng.below(3)]);
    EXPECT_EQ(levenshtein_distance(a, b), oracle::edit_script_distance(a, b));
  }
}

TEST(Lcs, AlignmentIsLeftmost) {
  const Alignment al = lcs_alignment(split("a b a"), split("a a b"));
  ASSERT_EQ(al.size(), 2u);
  EXPECT_EQ(al[0], std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_EQ(lcs(split("x y z"), split("y q z")), split("y z"));
}

TEST(InsertionOracle, SlotsAndFills) {
  const InsertionOracle o = oracle_insertion(split("B D"), split("A B C C D E"));
  EXPECT_EQ(o.counts, (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(o.fills[1], split("C C"));
  EXPECT_EQ(apply_insertions(split("B D"), o.fills), split("A B C C D E"));
  EXPECT_EQ(apply_insertions(split("B D"), o.counts), (Tokens{"<plh>", "B", "<plh>", "<plh>", "D", "<plh>"}));
  EXPECT_THROW(oracle_insertion(split("E A"), split("A E")), Error);
  EXPECT_THROW(apply_insertions(split("B"), std::vector<int>{1}), ShapeError);
}

TEST(InsertionOracle, EmptyCurrent) {
  const InsertionOracle o = oracle_insertion({}, split("x y"));
  EXPECT_EQ(o.counts, std::vector<int>{2});
  EXPECT_EQ(oracle_insertion(split("x y"), split("x y")).counts, (std::vector<int>{0, 0, 0}));
}

TEST(DeletionOracle, KeepsAnLcs) {
  const std::vector<bool> del = oracle_deletion(split("A X B Y"), split("A B C"));
  EXPECT_EQ(del, (std::vector<bool>{false, true, false, true}));
}

TEST(DeletionOracle, AnchorsAreKept) {
  // Without the anchor the leftmost LCS keeps the first "a"; the anchor forces the second.
  const Tokens cur = split("a a b");
  const Tokens ref = split("a b");
  EXPECT_EQ(oracle_deletion(cur, ref), (std::vector<bool>{false, true, false}));
  EXPECT_EQ(oracle_deletion_anchored(cur, ref, {{1, 0}}), (std::vector<bool>{true, false, false}));
  EXPECT_THROW(oracle_deletion_anchored(cur, ref, {{2, 0}}), Error);
}

TEST(MakeIntermediate, Properties) {
  const Tokens ref = split("Ada Lovelace was born on 10 December 1815 in London and studied maths .");
  const Tokens skel = split("Ada Lovelace 10 December 1815 London maths");
  Rng rng(21);
  double rho_sum = 0;
  std::size_t full = 0, bare = 0;
  for (int i = 0; i < 1000; ++i) {
    const Intermediate y = make_intermediate(ref, skel, rng);
    ASSERT_TRUE(is_subsequence(skel, y.tokens));
    ASSERT_TRUE(is_subsequence(y.tokens, ref));
    ASSERT_EQ(y.tokens.size(), y.source_pos.size());
    for (std::size_t k = 0; k < y.tokens.size(); ++k) {
      ASSERT_EQ(y.tokens[k], ref[y.source_pos[k]]);
      if (k > 0) ASSERT_LT(y.source_pos[k - 1], y.source_pos[k]);
    }
    ASSERT_GE(y.keep_rate, 0.0);
    ASSERT_LT(y.keep_rate, 1.0);
    rho_sum += y.keep_rate;
    full += y.tokens == ref;
    bare += y.tokens == skel;
  }
  EXPECT_NEAR(rho_sum / 1000, 0.5, 0.05);
  EXPECT_GT(full, 0u);
  EXPECT_GT(bare, 0u);
}

TEST(MakeIntermediate, ForcedRates) {
  const Tokens ref = split("a b c d");
  Rng rng(1);
  EXPECT_EQ(make_intermediate(ref, split("b d"), rng, 0.0).tokens, split("b d"));
  EXPECT_EQ(make_intermediate(ref, split("b d"), rng, 1.0).tokens, ref);
  const Intermediate y = make_intermediate(ref, split("b d"), rng, 0.0);
  EXPECT_EQ(y.anchored, (std::vector<bool>{true, true}));
}

TEST(Oracles, SubsetSearchAgreesOnSmallCases) {
  const Tokens y = split("a c b c");
  const Tokens target = split("a b c");
  std::size_t kept_dist = oracle::edit_script_distance([&] {
    Tokens kept;
    const auto del = oracle_deletion(y, target);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!del[i]) kept.push_back(y[i]);
    return kept;
  }(), target);
  EXPECT_EQ(kept_dist, oracle::best_deletion_distance(y, target));
  EXPECT_EQ(lcs(y, target).size(), oracle::lcs_length_bruteforce(y, target));
}

}  // namespace
}  // namespace sana
