#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sana/table_encoder.hpp"

namespace sana {
namespace {

struct EncoderFixture : ::testing::Test {
  Corpus corpus = fixture::annotated_corpus(4);
  Vocabulary tokens = build_vocabulary(corpus, 1000);
  Vocabulary keys = build_key_vocabulary(corpus, 1000);
  ModelDims dims = fixture::small_config().dims;
  nn::ParameterStore store;
  Rng rng{5};
  TableEncoder enc{store, "enc", dims, tokens.size(), keys.size(), rng};
  CellIds ids = cell_ids(linearize_table(corpus[0].table), tokens, keys, dims.max_pos);
};

TEST_F(EncoderFixture, ZeroFusionGivesZeroCells) {
  enc.fuse().weight->value.setZero();
  enc.fuse().bias->value.setZero();
  nn::Graph g;
  const nn::Matrix f = enc.embed_cells(g, ids).value();
  EXPECT_EQ(f.rows(), static_cast<nn::Index>(ids.token.size()));
  EXPECT_EQ(f, nn::Matrix::Zero(f.rows(), dims.width));
}

TEST_F(EncoderFixture, FusionIsClampedByRelu) {
  nn::Graph g;
  const nn::Matrix f = enc.embed_cells(g, ids).value();
  EXPECT_GE(f.minCoeff(), 0.0);
  EXPECT_GT(f.maxCoeff(), 0.0);
  enc.fuse().bias->value.setConstant(-1e6);
  nn::Graph g2;
  EXPECT_EQ(enc.embed_cells(g2, ids).value().maxCoeff(), 0.0);
}

TEST_F(EncoderFixture, FusedInputConcatenatesFourEmbeddings) {
  // With W_f the identity on the token block, f equals relu(token embedding).
  ASSERT_EQ(dims.token_emb, dims.width);
  enc.fuse().weight->value.setZero();
  enc.fuse().weight->value.topRows(dims.token_emb) = nn::Matrix::Identity(dims.token_emb, dims.width);
  enc.fuse().bias->value.setZero();
  nn::Graph g;
  const nn::Matrix f = enc.embed_cells(g, ids).value();
  for (std::size_t i = 0; i < ids.token.size(); ++i) {
    const nn::Matrix expect = enc.token_embedding().value.row(ids.token[i]).cwiseMax(0.0);
    EXPECT_EQ(f.row(static_cast<nn::Index>(i)), expect);
  }
}

TEST_F(EncoderFixture, PermutationEquivariant) {
  std::vector<std::size_t> perm(ids.token.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffle_rng(8);
  shuffle_rng.shuffle(perm);
  CellIds shuffled;
  for (std::size_t i : perm) {
    shuffled.token.push_back(ids.token[i]);
    shuffled.key.push_back(ids.key[i]);
    shuffled.fwd.push_back(ids.fwd[i]);
    shuffled.bwd.push_back(ids.bwd[i]);
  }
  nn::Graph g;
  const nn::Matrix h = enc.encode_ids(g, ids).value();
  const nn::Matrix hp = enc.encode_ids(g, shuffled).value();
  for (std::size_t r = 0; r < perm.size(); ++r)
    EXPECT_LT((hp.row(static_cast<nn::Index>(r)) - h.row(static_cast<nn::Index>(perm[r]))).norm(), 1e-10);
}

TEST_F(EncoderFixture, PositionsAreClamped) {
  Table long_value{{{"name", Tokens(40, "x")}}};
  const CellIds c = cell_ids(linearize_table(long_value), tokens, keys, dims.max_pos);
  EXPECT_EQ(*std::max_element(c.fwd.begin(), c.fwd.end()), dims.max_pos);
  EXPECT_EQ(c.token.back(), kEosId);
  EXPECT_EQ(c.key.back(), kEosId);
  EXPECT_EQ(c.token.front(), kUnkId);
}

}  // namespace
}  // namespace sana
