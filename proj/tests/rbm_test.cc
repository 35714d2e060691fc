// avfusion/tests/rbm_test.cc

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "avfusion/error.h"
#include "avfusion/rbm.h"
#include "test_util.h"

namespace avf {
namespace {

// n samples around `clusters` random centres in `dims` dimensions,
// z-normalized.
Matrix cluster_data(Rng& rng, std::size_t n, std::size_t dims, std::size_t clusters) {
  const Matrix centres = gaussian_sample(rng, clusters, dims, 0.0, 2.0);
  Matrix x(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % clusters;
    for (std::size_t d = 0; d < dims; ++d) x(i, d) = centres(c, d) + 0.5 * rng.normal();
  }
  return znormalize(x).data;
}

TEST(Znormalize, HandExample) {
  const Matrix x = Matrix::from_rows({{1.0, 7.0}, {2.0, 7.0}, {3.0, 7.0}});
  const ZNormalized z = znormalize(x);
  const double s = std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(z.data(0, 0), -1.0 / s, 1e-12);
  EXPECT_NEAR(z.data(0, 0), -1.2247, 1e-4);
  EXPECT_EQ(z.data(1, 0), 0.0);
  EXPECT_NEAR(z.data(2, 0), 1.0 / s, 1e-12);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(z.data(r, 1), 0.0);
  EXPECT_EQ(z.stddev[1], 1.0);
}

TEST(Znormalize, MomentsAndIdempotence) {
  Rng rng(5);
  const Matrix x = gaussian_sample(rng, 50, 6, 3.0, 4.0);
  const ZNormalized z = znormalize(x);
  for (std::size_t c = 0; c < 6; ++c) {
    double m = 0.0, v = 0.0;
    for (std::size_t r = 0; r < 50; ++r) m += z.data(r, c);
    m /= 50;
    for (std::size_t r = 0; r < 50; ++r) v += (z.data(r, c) - m) * (z.data(r, c) - m);
    EXPECT_NEAR(m, 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt(v / 50), 1.0, 1e-10);
  }
  const ZNormalized again = znormalize(z.data);
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_NEAR(again.data.values()[i], z.data.values()[i], 1e-10);
}

TEST(Znormalize, NeedsTwoRows) {
  EXPECT_THROW(znormalize(Matrix(1, 3)), ArgumentError);
  EXPECT_THROW(apply_znorm(Matrix(2, 3), Vector(2), Vector(3)), ShapeError);
}

TEST(Rbm, HiddenMeanMatchesDenseLayer) {
  Rng rng(7);
  for (HiddenKind kind : {HiddenKind::kNoisyRelu, HiddenKind::kLinear}) {
    GaussianRbm rbm = GaussianRbm::random(rng, 5, 3, kind);
    for (double& b : rbm.hidden_bias) b = rng.normal();
    const Matrix v = testing::random_matrix(rng, 4, 5);
    EXPECT_EQ(rbm_hidden_mean(rbm, v), dense_forward(rbm.to_dense_layer(), v));
  }
}

TEST(Rbm, ZeroLearningRateLeavesParameters) {
  Rng rng(8);
  GaussianRbm rbm = GaussianRbm::random(rng, 6, 4, HiddenKind::kNoisyRelu);
  const GaussianRbm before = rbm;
  CdConfig cfg;
  cfg.learning_rate = 0.0;
  cd1_update(rbm, cluster_data(rng, 20, 6, 2), cfg, rng);
  EXPECT_EQ(rbm.weights, before.weights);
  EXPECT_EQ(rbm.visible_bias, before.visible_bias);
  EXPECT_EQ(rbm.hidden_bias, before.hidden_bias);
}

TEST(Rbm, WeightDecayContributesMinusLambdaW) {
  Rng data_rng(9);
  const Matrix batch = cluster_data(data_rng, 30, 6, 3);
  Rng init(10);
  const GaussianRbm start = GaussianRbm::random(init, 6, 4, HiddenKind::kNoisyRelu);

  CdConfig with;
  with.l2 = 0.01;
  CdConfig without = with;
  without.l2 = 0.0;
  GaussianRbm a = start, b = start;
  Rng ra(11), rb(11);
  cd1_update(a, batch, with, ra);
  cd1_update(b, batch, without, rb);
  for (std::size_t k = 0; k < start.weights.size(); ++k) {
    const double decay = (a.weights.values()[k] - b.weights.values()[k]) / with.learning_rate;
    EXPECT_NEAR(decay, -with.l2 * start.weights.values()[k], 1e-12);
  }
  EXPECT_EQ(a.visible_bias, b.visible_bias);
  EXPECT_EQ(a.hidden_bias, b.hidden_bias);
}

TEST(Rbm, DivergenceThrowsAndKeepsParameters) {
  Rng rng(12);
  GaussianRbm rbm = GaussianRbm::random(rng, 4, 3, HiddenKind::kLinear);
  const GaussianRbm before = rbm;
  Matrix batch = cluster_data(rng, 10, 4, 2);
  batch(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(cd1_update(rbm, batch, CdConfig{}, rng), TrainingError);
  EXPECT_EQ(rbm.weights, before.weights);

  CdConfig cfg;
  cfg.batch_size = 5;
  try {
    train_rbm(rbm, batch, cfg, rng);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(Rbm, RejectsMismatchedBatch) {
  Rng rng(13);
  GaussianRbm rbm = GaussianRbm::random(rng, 4, 3, HiddenKind::kLinear);
  EXPECT_THROW(cd1_update(rbm, Matrix(5, 3), CdConfig{}, rng), ShapeError);
}

TEST(Rbm, RepeatedPatternReconstructionImproves) {
  Rng rng(14);
  GaussianRbm rbm = GaussianRbm::random(rng, 8, 6, HiddenKind::kNoisyRelu);
  Matrix batch(20, 8);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 8; ++c) batch(r, c) = (c % 2 ? 1.0 : -1.0);
  CdConfig cfg;
  cfg.learning_rate = 0.01;
  std::vector<double> err;
  for (int i = 0; i < 200; ++i) err.push_back(cd1_update(rbm, batch, cfg, rng));
  auto smooth = [&](std::size_t at) {
    double s = 0.0;
    for (std::size_t k = at; k < at + 5; ++k) s += err[k];
    return s / 5;
  };
  EXPECT_LT(smooth(195), smooth(0));
  EXPECT_LT(smooth(100), smooth(0));
}

TEST(Rbm, TrainingIsDeterministicAndReducesError) {
  auto run = [] {
    Rng rng(15);
    const Matrix data = cluster_data(rng, 500, 16, 5);
    GaussianRbm rbm = GaussianRbm::random(rng, 16, 12, HiddenKind::kNoisyRelu);
    return train_rbm(rbm, data, CdConfig{}, rng);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 20u);
  EXPECT_LT(a.back(), a.front());
}

TEST(PretrainStack, ShapesFollowLayerSizes) {
  Rng rng(16);
  const Matrix data = cluster_data(rng, 40, 6, 2);
  CdConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 10;
  const std::vector<std::size_t> sizes = {8, 4, 2};
  const PretrainResult r = pretrain_stack(sizes, data, cfg, rng);
  ASSERT_EQ(r.layers.size(), 3u);
  EXPECT_EQ(shape_string(r.layers[0].weights), "8x6");
  EXPECT_EQ(shape_string(r.layers[1].weights), "4x8");
  EXPECT_EQ(shape_string(r.layers[2].weights), "2x4");
  EXPECT_EQ(r.layers[0].activation, Activation::kRelu);
  EXPECT_EQ(r.layers[2].activation, Activation::kLinear);
  EXPECT_EQ(r.epoch_errors[1].size(), 2u);
}

TEST(PretrainStack, ZeroEpochsReturnsInitialWeights) {
  Rng data_rng(17);
  const Matrix data = cluster_data(data_rng, 10, 5, 2);
  CdConfig cfg;
  cfg.epochs = 0;
  Rng rng(18), ref(18);
  const std::vector<std::size_t> sizes = {3};
  const PretrainResult r = pretrain_stack(sizes, data, cfg, rng);
  const DenseLayer expected = GaussianRbm::random(ref, 5, 3, HiddenKind::kLinear).to_dense_layer();
  EXPECT_EQ(r.layers[0].weights, expected.weights);
  EXPECT_EQ(r.layers[0].bias, expected.bias);
}

TEST(PretrainStack, TwoLayerStackReducesFinalLayerError) {
  Rng rng(19);
  const Matrix data = cluster_data(rng, 200, 12, 4);
  CdConfig cfg;
  cfg.batch_size = 20;
  const std::vector<std::size_t> sizes = {10, 6};
  const PretrainResult r = pretrain_stack(sizes, data, cfg, rng);
  const auto& last = r.epoch_errors.back();
  EXPECT_LE(last.back(), 0.8 * last.front());
}

}  // namespace
}  // namespace avf
