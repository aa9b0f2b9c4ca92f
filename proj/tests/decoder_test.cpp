#include <optional>

#include <gtest/gtest.h>

#include "sana/constrained_decoder.hpp"

namespace sana {
namespace {

struct StubContext {};

// Deletes every unplanned token and appends the next `plan` token before EOS,
// one per round.
struct PlanPolicy {
  using Context = StubContext;
  Tokens plan;

  Context prepare(const Table&) const { return {}; }
  std::vector<double> delete_probs(const Context&, const Tokens& s) const {
    std::vector<double> p;
    for (const auto& t : s) p.push_back(t == kBos || t == kEos || is_planned(t) ? 0.0 : 1.0);
    return p;
  }
  std::vector<int> placeholder_counts(const Context&, const Tokens& s) const {
    std::vector<int> c(s.size() - 1, 0);
    if (next(s)) c.back() = 1;
    return c;
  }
  Tokens fill_tokens(const Context&, const Tokens& s) const {
    Tokens without(s.begin(), s.end());
    without.erase(std::find(without.begin(), without.end(), std::string(kPlh)));
    return {*next(without)};
  }

 private:
  bool is_planned(const std::string& t) const { return std::find(plan.begin(), plan.end(), t) != plan.end(); }
  std::optional<std::string> next(const Tokens& s) const {
    std::size_t have = 0;
    for (const auto& t : s) have += is_planned(t);
    return have < plan.size() ? std::optional<std::string>(plan[have]) : std::nullopt;
  }
};

// Wants to delete everything (P = `del`) and insert `count` copies of "x" into every slot.
struct AdversarialPolicy {
  using Context = StubContext;
  int count = 1;
  double del = 1.0;
  Context prepare(const Table&) const { return {}; }
  std::vector<double> delete_probs(const Context&, const Tokens& s) const { return std::vector<double>(s.size(), del); }
  std::vector<int> placeholder_counts(const Context&, const Tokens& s) const {
    return std::vector<int>(s.size() - 1, count);
  }
  Tokens fill_tokens(const Context&, const Tokens& s) const {
    return Tokens(static_cast<std::size_t>(std::count(s.begin(), s.end(), std::string(kPlh))), "x");
  }
};

struct IdlePolicy {
  using Context = StubContext;
  Context prepare(const Table&) const { return {}; }
  std::vector<double> delete_probs(const Context&, const Tokens& s) const { return std::vector<double>(s.size(), 0.0); }
  std::vector<int> placeholder_counts(const Context&, const Tokens& s) const { return std::vector<int>(s.size() - 1, 0); }
  Tokens fill_tokens(const Context&, const Tokens&) const { return {}; }
};

const Table kTable{{{"name", {"Ada"}}}};

TEST(InitState, SentinelsAndProtection) {
  const EditState hard = init_state({"Ada", "1815"});
  EXPECT_EQ(hard.tokens, (Tokens{"<s>", "Ada", "1815", "</s>"}));
  EXPECT_EQ(hard.protected_, (std::vector<bool>(4, true)));
  EXPECT_TRUE(hard.valid());
  const EditState soft = init_state({"Ada"}, false);
  EXPECT_EQ(soft.protected_, (std::vector<bool>{true, false, true}));
}

TEST(MaskedDelete, ProtectedSurviveThreshold) {
  EditState s = init_state({"a"}, false);
  s.tokens.insert(s.tokens.begin() + 2, "b");
  s.protected_.insert(s.protected_.begin() + 2, false);
  const EditState out = masked_delete(s, {1.0, 0.5, 0.51, 1.0});
  EXPECT_EQ(out.tokens, (Tokens{"<s>", "a", "</s>"}));
  EXPECT_THROW(masked_delete(s, {1.0}), ShapeError);
}

TEST(Iterate, ReachesFixedPoint) {
  const PlanPolicy p{{"was", "born"}};
  const DecodeResult r = iterate(kTable, {"Ada"}, p, DecodeOptions{10, 4, 64, true});
  EXPECT_EQ(r.tokens, (Tokens{"Ada", "was", "born"}));
  EXPECT_EQ(r.trace.termination, Termination::kFixedPoint);
  EXPECT_EQ(r.trace.iterations, 3);
  EXPECT_EQ(r.trace.snapshots.size(), 4u);
  for (const auto& s : r.trace.snapshots) EXPECT_TRUE(s.valid());
}

TEST(Iterate, MaxIterations) {
  const PlanPolicy p{{"a", "b", "c"}};
  const DecodeResult r = iterate(kTable, {"Ada"}, p, DecodeOptions{2, 4, 64, true});
  EXPECT_EQ(r.tokens, (Tokens{"Ada", "a", "b"}));
  EXPECT_EQ(r.trace.termination, Termination::kMaxIterations);
  const DecodeResult zero = iterate(kTable, {"Ada"}, p, DecodeOptions{0, 4, 64, true});
  EXPECT_EQ(zero.tokens, Tokens{"Ada"});
  EXPECT_EQ(zero.trace.iterations, 0);
  EXPECT_EQ(zero.trace.termination, Termination::kMaxIterations);
}

TEST(Iterate, IdleIsImmediateFixedPoint) {
  const DecodeResult r = iterate(kTable, {"Ada", "London"}, IdlePolicy{}, DecodeOptions{});
  EXPECT_EQ(r.tokens, (Tokens{"Ada", "London"}));
  EXPECT_EQ(r.trace.iterations, 1);
  EXPECT_EQ(r.trace.termination, Termination::kFixedPoint);
}

TEST(Iterate, HardConstraintsKeepTheSkeleton) {
  const AdversarialPolicy p;
  const Tokens skel{"Ada", "London"};
  const DecodeResult hard = iterate(kTable, skel, p, DecodeOptions{3, 4, 512, true});
  EXPECT_TRUE(is_subsequence(skel, hard.tokens));
  for (const auto& s : hard.trace.snapshots) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
      if (s.tokens[i] == "Ada" || s.tokens[i] == "London") EXPECT_TRUE(s.protected_[i]);
  }
  const DecodeResult soft = iterate(kTable, skel, p, DecodeOptions{3, 4, 512, false});
  EXPECT_FALSE(is_subsequence(skel, soft.tokens));
  EXPECT_NE(hard.tokens, soft.tokens);
}

TEST(Iterate, CountsAreClampedAndCapped) {
  AdversarialPolicy p;
  p.count = 100;
  const DecodeResult r = iterate(kTable, {"Ada"}, p, DecodeOptions{1, 2, 512, true});
  // Two slots around the protected "Ada", each clamped to two insertions.
  EXPECT_EQ(r.tokens, (Tokens{"x", "x", "Ada", "x", "x"}));
  p.del = 0.0;
  EXPECT_THROW(iterate(kTable, {"Ada"}, p, DecodeOptions{10, 8, 40, true}), Error);
}

}  // namespace
}  // namespace sana
