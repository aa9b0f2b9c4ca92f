#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sana/realizer.hpp"

namespace sana {
namespace {

struct RealizerFixture : ::testing::Test {
  Corpus corpus = fixture::annotated_corpus(4);
  RunConfig cfg = fixture::small_config();
  EditRealizer model{cfg, build_vocabulary(corpus, 1000), build_key_vocabulary(corpus, 1000)};
  const Example& ex = corpus[0];
  TableContext ctx = model.prepare(ex.table);
  Tokens state = with_sentinels(ex.reference);

  static Tokens with_sentinels(const Tokens& inner) {
    Tokens s{std::string(kBos)};
    s.insert(s.end(), inner.begin(), inner.end());
    s.emplace_back(kEos);
    return s;
  }
};

TEST_F(RealizerFixture, DecoderSeesTheFuture) {
  // Changing the last inner token moves the first position's output under
  // full self-attention and leaves it untouched under a causal mask.
  Tokens changed = state;
  changed[changed.size() - 2] = ex.table.attributes[0].value_tokens[0] == changed[changed.size() - 2]
                                    ? std::string(kUnk)
                                    : ex.table.attributes[0].value_tokens[0];
  const nn::Matrix full = model.decode(ctx, state), full2 = model.decode(ctx, changed);
  const nn::Matrix causal = model.decode(ctx, state, true), causal2 = model.decode(ctx, changed, true);
  EXPECT_GT((full.row(1) - full2.row(1)).norm(), 1e-9);
  EXPECT_LT((causal.row(1) - causal2.row(1)).norm(), 1e-12);
}

TEST_F(RealizerFixture, HeadArities) {
  nn::Graph g(false);
  nn::Var z = model.decode_hidden(g, model.state_ids(state), g.constant(ctx.hidden));
  const auto n = static_cast<nn::Index>(state.size());
  EXPECT_EQ(model.deletion_logits(g, z).cols(), 2);
  EXPECT_EQ(model.deletion_logits(g, z).rows(), n);
  EXPECT_EQ(model.placeholder_logits(g, z).rows(), n - 1);
  EXPECT_EQ(model.placeholder_logits(g, z).cols(), cfg.k_max + 1);
  EXPECT_EQ(model.token_logits(g, z, {1, 2}).cols(), static_cast<nn::Index>(model.tokens().size()));
  EXPECT_EQ(model.placeholder_counts(ctx, state).size(), state.size() - 1);
  EXPECT_EQ(model.delete_probs(ctx, state).size(), state.size());
}

TEST_F(RealizerFixture, ZeroDeletionWeightsGiveOneHalf) {
  model.w_del().weight->value.setZero();
  for (double p : model.delete_probs(ctx, state)) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST_F(RealizerFixture, FillsSkipReservedTokens) {
  nn::Matrix logits = nn::Matrix::Zero(1, static_cast<nn::Index>(model.tokens().size()));
  logits(0, kEosId) = 10;
  logits(0, kPlhId) = 9;
  logits(0, 7) = 1;
  EXPECT_EQ(model.argmax_tokens(logits), Tokens{model.tokens().token(7)});
  Tokens with_plh = state;
  with_plh.insert(with_plh.begin() + 2, std::string(kPlh));
  with_plh.insert(with_plh.begin() + 4, std::string(kPlh));
  EXPECT_EQ(model.fill_tokens(ctx, with_plh).size(), 2u);
  EXPECT_TRUE(model.fill_tokens(ctx, state).empty());
}

TEST_F(RealizerFixture, EveryHeadReceivesGradient) {
  Rng rng(2);
  const Intermediate y = make_intermediate(ex.reference, *ex.skeleton, rng, 0.3);
  model.parameters().zero_grad();
  nn::Graph g;
  g.backward(model.edit_loss(g, ex.table, ex.reference, y, 1.0));
  for (const nn::Linear* head : {&model.w_del(), &model.w_plh(), &model.w_tok()})
    EXPECT_GT(head->weight->grad.norm(), 0.0) << head->weight->name;
  EXPECT_GT(model.encoder().token_embedding().grad.norm(), 0.0);
  EXPECT_GT(model.encoder().fuse().weight->grad.norm(), 0.0);
}

TEST_F(RealizerFixture, LossDecomposes) {
  Rng rng(4);
  const Intermediate y = make_intermediate(ex.reference, *ex.skeleton, rng, 0.4);
  EditLossParts parts;
  nn::Graph g(false);
  const double at_one = model.edit_loss(g, ex.table, ex.reference, y, 1.0, &parts).scalar();
  EXPECT_NEAR(at_one, parts.placeholder + parts.token + parts.deletion, 1e-9);
  const double at_two = model.edit_loss(g, ex.table, ex.reference, y, 2.0).scalar();
  EXPECT_NEAR(at_two, parts.ins() + 2 * parts.deletion, 1e-9);
  EditLossParts zero;
  const double at_zero = model.edit_loss(g, ex.table, ex.reference, y, 0.0, &zero).scalar();
  EXPECT_NEAR(at_zero, parts.ins(), 1e-9);
  EXPECT_DOUBLE_EQ(zero.deletion, 0.0);
  EXPECT_GT(parts.placeholder, 0.0);
  EXPECT_GT(parts.token, 0.0);
}

TEST_F(RealizerFixture, ClampsOversizedSlots) {
  Intermediate y;
  y.tokens = {ex.reference.front()};
  y.source_pos = {0};
  y.anchored = {false};
  EditLossParts parts;
  nn::Graph g(false);
  model.edit_loss(g, ex.table, ex.reference, y, 1.0, &parts);
  EXPECT_EQ(parts.clamped_slots, ex.reference.size() - 1 > static_cast<std::size_t>(cfg.k_max) ? 1 : 0);
}

TEST_F(RealizerFixture, StateCapIsEnforced) {
  RunConfig small = cfg;
  small.max_state_len = 8;
  EditRealizer tiny(small, model.tokens(), model.keys());
  EXPECT_THROW(tiny.decode(tiny.prepare(ex.table), Tokens(9, "x")), Error);
}

TEST(RealizerTied, UsesTheTokenEmbedding) {
  const Corpus c = fixture::annotated_corpus(2);
  RunConfig cfg = fixture::small_config();
  cfg.tie_token_head = true;
  EditRealizer m(cfg, build_vocabulary(c, 1000), build_key_vocabulary(c, 1000));
  EXPECT_FALSE(m.parameters().contains("editor.w_tok.w"));
  cfg.dims.token_emb = cfg.dims.width / 2;
  EXPECT_THROW(EditRealizer(cfg, m.tokens(), m.keys()), ConfigError);
}

}  // namespace
}  // namespace sana
