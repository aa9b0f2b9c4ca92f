#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "sana/checkpoint.hpp"
#include "sana/config.hpp"
#include "sana/gradcheck_suite.hpp"
#include "sana/layers.hpp"
#include "sana/optim.hpp"

namespace sana::nn {
namespace {

Matrix row(std::initializer_list<double> xs) {
  Matrix m(1, static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) m(0, i++) = x;
  return m;
}

TEST(Softmax, KnownValues) {
  Graph g;
  const Matrix p = softmax_rows(g.constant(row({0, 0, 0, 0}))).value();
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p(0, i), 0.25);
  const Matrix q = softmax_rows(g.constant(row({std::log(3.0), 0}))).value();
  EXPECT_NEAR(q(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(q(0, 1), 0.25, 1e-12);
}

TEST(Softmax, StableForLargeLogits) {
  Graph g;
  const Matrix p = softmax_rows(g.constant(row({1000, 1000}))).value();
  EXPECT_NEAR(p(0, 0), 0.5, 1e-12);
  EXPECT_TRUE(std::isfinite(p(0, 1)));
}

TEST(Relu, ClampsNegatives) {
  Graph g;
  const Matrix r = relu(g.constant(row({-2, 0, 3}))).value();
  EXPECT_EQ(r, row({0, 0, 3}));
}

TEST(Matmul, IdentityIsNoOp) {
  Graph g;
  Rng rng(3);
  const Matrix a = suite::random_matrix(3, 4, rng);
  EXPECT_EQ(matmul(g.constant(a), g.constant(Matrix::Identity(4, 4))).value(), a);
  EXPECT_THROW(matmul(g.constant(a), g.constant(Matrix::Identity(3, 3))), ShapeError);
}

TEST(Attention, UniformKeysAverageValues) {
  Graph g;
  Matrix q = Matrix::Ones(1, 2);
  Matrix k = Matrix::Ones(3, 2);
  Matrix v(3, 2);
  v << 1, 2, 3, 4, 5, 6;
  const Matrix out = attention(g.constant(q), g.constant(k), g.constant(v), 1, false).value();
  EXPECT_NEAR(out(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(out(0, 1), 4.0, 1e-12);
}

TEST(Attention, CausalFirstRowSeesOnlyItself) {
  Graph g;
  Rng rng(4);
  const Matrix x = suite::random_matrix(3, 4, rng);
  const Matrix out = attention(g.constant(x), g.constant(x), g.constant(x), 2, true).value();
  EXPECT_NEAR((out.row(0) - x.row(0)).norm(), 0.0, 1e-12);
}

TEST(Attention, ScoresAreScaled) {
  // One head of width 4: logits q.k / 2. With q.k = 2 ln 3 vs 0 the weights are 3/4 and 1/4.
  Graph g;
  const double a = std::log(3.0);
  Matrix q = row({a, a, a, a});
  Matrix k(2, 4);
  k << 0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0;
  Matrix v(2, 4);
  v << 1, 0, 0, 0, 0, 1, 0, 0;
  const Matrix out = attention(g.constant(q), g.constant(k), g.constant(v), 1, false).value();
  EXPECT_NEAR(out(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(out(0, 1), 0.25, 1e-12);
}

TEST(Attention, RejectsBadHeads) {
  Graph g;
  const Matrix x = Matrix::Ones(2, 6);
  EXPECT_THROW(attention(g.constant(x), g.constant(x), g.constant(x), 4, false), ConfigError);
}

TEST(CrossEntropy, UniformIsLogClasses) {
  Graph g;
  EXPECT_NEAR(cross_entropy(g.constant(Matrix::Zero(2, 4)), {0, 3}).scalar(), std::log(4.0), 1e-12);
  EXPECT_THROW(cross_entropy(g.constant(Matrix::Zero(1, 4)), {4}), ShapeError);
}

TEST(PooledNll, SumsMassOverGoldColumns) {
  Graph g;
  // Probabilities 0.3, 0.2, 0.5 from logs; pooling the first two gives -ln 0.5.
  const Matrix s = row({std::log(0.3), std::log(0.2), std::log(0.5)});
  EXPECT_NEAR(pooled_nll(g.constant(s), {{0, 1}}).scalar(), -std::log(0.5), 1e-12);
}

TEST(LayerNorm, ZeroMeanUnitVariance) {
  Graph g;
  Rng rng(5);
  const Matrix x = suite::random_matrix(4, 6, rng) * 10.0;
  const Matrix y = layer_norm(g.constant(x), g.constant(Matrix::Ones(1, 6)), g.constant(Matrix::Zero(1, 6))).value();
  for (Index r = 0; r < y.rows(); ++r) {
    const double mean = y.row(r).mean();
    const double var = (y.row(r).array() - mean).square().mean();
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(var, 1.0, 1e-8);
  }
}

TEST(Schedule, WarmupThenInverseSqrt) {
  InverseSqrtSchedule s{2e-3, 100};
  EXPECT_DOUBLE_EQ(s(0), 0.0);
  EXPECT_DOUBLE_EQ(s(50), 1e-3);
  EXPECT_DOUBLE_EQ(s(100), 2e-3);
  EXPECT_DOUBLE_EQ(s(400), 1e-3);
  EXPECT_LT(s(401), s(400));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // The bias-corrected first step is lr * g / |g| per coordinate.
  ParameterStore store;
  Rng rng(1);
  Parameter& p = store.create("p", 1, 2, Init::kZeros, rng);
  p.grad = row({3.0, -0.5});
  Adam opt(store, InverseSqrtSchedule{0.1, 1});
  opt.step();
  EXPECT_NEAR(p.value(0, 0), -0.1, 1e-9);
  EXPECT_NEAR(p.value(0, 1), 0.1, 1e-9);
  EXPECT_EQ(p.grad, Matrix::Zero(1, 2));
}

TEST(Checkpoint, RoundTripsParametersAndOptimizer) {
  const auto dir = std::filesystem::temp_directory_path() / "sana_ckpt_test";
  std::filesystem::remove_all(dir);
  ParameterStore store;
  Rng rng(9);
  Linear lin = Linear::create(store, "lin", 3, 4, rng);
  lin.bias->value = suite::random_matrix(1, 4, rng);
  Adam opt(store, InverseSqrtSchedule{1e-3, 10});
  for (auto& p : store) p.grad.setOnes();
  opt.step();
  save_checkpoint(dir, store, &opt.state());

  ParameterStore other;
  Rng rng2(77);
  Linear::create(other, "lin", 3, 4, rng2);
  OptimizerState state;
  load_checkpoint(dir, other, &state);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Matrix as_float = store[i].value.cast<float>().cast<double>();
    EXPECT_EQ(other[i].value, as_float);
  }
  EXPECT_EQ(state.step, 1);

  ParameterStore wrong;
  Linear::create(wrong, "lin", 3, 5, rng2);
  EXPECT_THROW(load_checkpoint(dir, wrong), ShapeError);
  std::filesystem::remove_all(dir);
}

TEST(Config, UnknownFieldsAreRejected) {
  const nlohmann::json ok = {{"k_max", 3}, {"dims", {{"width", 16}}}};
  const RunConfig c = ok.get<RunConfig>();
  EXPECT_EQ(c.k_max, 3);
  EXPECT_EQ(c.dims.width, 16);
  EXPECT_EQ(c.dims.hidden, RunConfig{}.dims.hidden);
  EXPECT_THROW((nlohmann::json{{"k_maks", 3}}.get<RunConfig>()), ConfigError);
  EXPECT_THROW((nlohmann::json{{"dims", {{"depth", 3}}}}.get<RunConfig>()), ConfigError);
  EXPECT_THROW((nlohmann::json{{"k_max", "three"}}.get<RunConfig>()), ConfigError);
}

TEST(Config, RoundTripAndValidation) {
  RunConfig c;
  c.parent_lambda = 0.25;
  c.seed = 42;
  EXPECT_EQ(nlohmann::json(nlohmann::json(c).get<RunConfig>()), nlohmann::json(c));
  RunConfig bad;
  bad.dims.heads = 3;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = RunConfig{};
  bad.parent_lambda = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(GradCheck, SuitePasses) {
  const auto entries = run_gradcheck_suite();
  EXPECT_EQ(entries.size(), 14u);
  for (const auto& e : entries) {
    EXPECT_TRUE(e.passed()) << e.name << " max_rel_error=" << e.result.max_rel_error << " at " << e.result.worst_param;
    EXPECT_GT(e.result.coords_checked, 0u) << e.name;
  }
}

TEST(GradCheck, DetectsAWrongGradient) {
  // A forward of 2x whose backward claims 3x must be flagged.
  ParameterStore store;
  Rng rng(2);
  Parameter& p = store.create("p", 1, 3, Init::kXavier, rng);
  auto broken = [&](Graph& g) {
    Var x = g.param(p);
    Var y = g.push(2.0 * x.value(), {x}, [x](Graph& gr, int self) { gr.grad(x) += 3.0 * gr.grad(self); });
    return sum(y);
  };
  EXPECT_GT(finite_difference_check(store, broken).max_rel_error, 0.1);
}

}  // namespace
}  // namespace sana::nn
