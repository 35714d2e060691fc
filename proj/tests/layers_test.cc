// avfusion/tests/layers_test.cc

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
#include "avfusion/layers.h"
#include "test_util.h"

namespace avf {
namespace {

using testing::gradient_error;
using testing::random_matrix;
using testing::weighted_sum;

constexpr double kTol = 1e-4;

// Direct evaluation of the regression formula with clamped frame indices.
Matrix delta_oracle(std::size_t window, const Matrix& x) {
  const long t_max = static_cast<long>(x.rows()) - 1;
  double norm = 0.0;
  for (std::size_t k = 1; k <= window; ++k) norm += 2.0 * double(k * k);
  Matrix d(x.rows(), x.cols());
  for (long t = 0; t <= t_max; ++t)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (long k = 1; k <= long(window); ++k) {
        const long hi = std::min(t + k, t_max), lo = std::max(t - k, 0L);
        s += k * (x(hi, c) - x(lo, c));
      }
      d(t, c) = s / norm;
    }
  return d;
}

TEST(Dense, ForwardMatchesDefinition) {
  DenseLayer l;
  l.weights = Matrix::from_rows({{1, -1}, {2, 0.5}});
  l.bias = {0.5, -3.0};
  l.activation = Activation::kRelu;
  const Matrix y = dense_forward(l, Matrix::from_rows({{1, 2}, {3, -1}}));
  EXPECT_EQ(y, Matrix::from_rows({{0.0, 0.0}, {4.5, 2.5}}));
  EXPECT_THROW(dense_forward(l, Matrix(2, 3)), ShapeError);
}

TEST(Dense, GradientCheck) {
  Rng rng(17);
  for (Activation act : {Activation::kRelu, Activation::kLinear}) {
    DenseLayer l = DenseLayer::glorot(rng, 5, 4, act);
    for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
    Matrix x = random_matrix(rng, 6, 5);
    const Matrix r = random_matrix(rng, 6, 4);
    auto f = [&] { return weighted_sum(dense_forward(l, x), r); };
    const LayerGradients g = dense_backward(l, x, r);
    EXPECT_LT(gradient_error(l.weights.values(), g.d_weights.values(), f), kTol);
    EXPECT_LT(gradient_error(l.bias, g.d_bias, f), kTol);
    EXPECT_LT(gradient_error(x.values(), g.d_input.values(), f), kTol);

    const LayerGradients g2 = dense_backward(l, x, dense_forward(l, x), r);
    EXPECT_EQ(g2.d_weights, g.d_weights);
  }
}

TEST(Activation, NamesRoundTrip) {
  for (Activation a : {Activation::kRelu, Activation::kLinear})
    EXPECT_EQ(parse_activation(activation_name(a)), a);
  EXPECT_THROW(parse_activation("tanh"), FormatError);
}

TEST(Delta, MatchesOracle) {
  Rng rng(23);
  for (std::size_t window : {1u, 2u, 3u}) {
    for (std::size_t t : {1u, 2u, 5u, 9u}) {
      const Matrix x = random_matrix(rng, t, 3);
      const Matrix got = regression_delta({window}, x);
      const Matrix want = delta_oracle(window, x);
      for (std::size_t i = 0; i < got.size(); ++i)
        EXPECT_NEAR(got.values()[i], want.values()[i], 1e-12);
    }
  }
}

TEST(Delta, ConstantGivesZero) {
  const Matrix x(7, 3, 4.25);
  const Matrix d = regression_delta({2}, x);
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
  const Matrix full = delta_forward({2}, x);
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t c = 3; c < 9; ++c) EXPECT_EQ(full(t, c), 0.0);
}

TEST(Delta, RampHasUnitSlope) {
  Matrix x(12, 2);
  for (std::size_t t = 0; t < 12; ++t) {
    x(t, 0) = double(t);
    x(t, 1) = 3.0 - 2.0 * double(t);
  }
  const Matrix full = delta_forward({2}, x);
  for (std::size_t t = 2; t + 2 < 12; ++t) {
    EXPECT_NEAR(full(t, 2), 1.0, 1e-15);
    EXPECT_NEAR(full(t, 3), -2.0, 1e-15);
  }
  // Second derivative of a ramp vanishes where the first is flat.
  for (std::size_t t = 4; t + 4 < 12; ++t) {
    EXPECT_NEAR(full(t, 4), 0.0, 1e-15);
    EXPECT_NEAR(full(t, 5), 0.0, 1e-15);
  }
  // Edge replication: d_0 = (1*(1-0) + 2*(2-0)) / 10.
  EXPECT_NEAR(full(0, 2), 0.5, 1e-15);
}

TEST(Delta, IsLinear) {
  Rng rng(29);
  const Matrix x = random_matrix(rng, 8, 4);
  const Matrix y = random_matrix(rng, 8, 4);
  const double a = 1.7, b = -0.3;
  Matrix comb(8, 4);
  for (std::size_t i = 0; i < comb.size(); ++i)
    comb.values()[i] = a * x.values()[i] + b * y.values()[i];
  const Matrix lhs = delta_forward({2}, comb);
  const Matrix dx = delta_forward({2}, x), dy = delta_forward({2}, y);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    EXPECT_NEAR(lhs.values()[i], a * dx.values()[i] + b * dy.values()[i], 1e-12);
}

TEST(Delta, AdjointConsistency) {
  Rng rng(31);
  for (std::size_t t : {1u, 3u, 6u, 15u}) {
    const Matrix x = random_matrix(rng, t, 3);
    const Matrix u = random_matrix(rng, t, 3);
    const double lhs = dot(regression_delta({2}, x).values(), u.values());
    const double rhs = dot(x.values(), regression_delta_adjoint({2}, u).values());
    EXPECT_NEAR(lhs, rhs, 1e-10);

    const Matrix u3 = random_matrix(rng, t, 9);
    EXPECT_NEAR(dot(delta_forward({2}, x).values(), u3.values()),
                dot(x.values(), delta_backward({2}, u3).values()), 1e-10);
  }
}

TEST(Delta, GradientCheck) {
  Rng rng(37);
  Matrix x = random_matrix(rng, 6, 4);
  const Matrix r = random_matrix(rng, 6, 12);
  auto f = [&] { return weighted_sum(delta_forward({2}, x), r); };
  EXPECT_LT(gradient_error(x.values(), delta_backward({2}, r).values(), f), kTol);
}

TEST(Softmax, RowsAreDistributions) {
  Rng rng(41);
  Matrix logits = random_matrix(rng, 5, 4, 10.0);
  logits(0, 0) = 800.0;  // must not overflow
  const Matrix p = softmax(logits);
  for (std::size_t t = 0; t < 5; ++t) {
    double s = 0.0;
    for (double v : p.row(t)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_NEAR(p(0, 0), 1.0, 1e-12);
}

TEST(SoftmaxXent, LossIsMeanNegativeLogLikelihood) {
  const Matrix logits = Matrix::from_rows({{0.0, 0.0}, {std::log(3.0), 0.0}});
  const std::vector<int> labels = {0, 0};
  const XentResult r = softmax_xent(logits, labels);
  EXPECT_NEAR(r.loss, 0.5 * (std::log(2.0) + std::log(4.0 / 3.0)), 1e-12);
}

TEST(SoftmaxXent, GradientCheck) {
  Rng rng(43);
  Matrix logits = random_matrix(rng, 6, 5, 2.0);
  std::vector<int> labels;
  for (int t = 0; t < 6; ++t) labels.push_back(int(rng.below(5)));
  const XentResult r = softmax_xent(logits, labels);
  auto f = [&] { return softmax_xent(logits, labels).loss; };
  EXPECT_LT(gradient_error(logits.values(), r.d_logits.values(), f), kTol);
}

TEST(SoftmaxXent, RejectsBadLabels) {
  const Matrix logits(2, 3);
  const std::vector<int> high = {0, 3};
  const std::vector<int> negative = {-1, 0};
  const std::vector<int> short_labels = {0};
  EXPECT_THROW(softmax_xent(logits, high), DataError);
  EXPECT_THROW(softmax_xent(logits, negative), DataError);
  EXPECT_THROW(softmax_xent(logits, short_labels), ShapeError);
}

}  // namespace
}  // namespace avf
