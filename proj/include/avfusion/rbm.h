// avfusion/include/avfusion/rbm.h

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

#pragma once

#include <span>
#include <vector>

#include "avfusion/layers.h"
#include "avfusion/tensor.h"

namespace avf {

enum class HiddenKind {
  kNoisyRelu,  // max(0, x + N(0, logistic(x)))
  kLinear,     // x + N(0, 1)
};

// RBM with real-valued, unit-variance Gaussian visible units. Inputs are
// expected to be z-normalized.
struct GaussianRbm {
  Matrix weights;  // visible x hidden
  Vector visible_bias;
  Vector hidden_bias;
  HiddenKind hidden_kind = HiddenKind::kNoisyRelu;

  std::size_t visible_dim() const { return weights.rows(); }
  std::size_t hidden_dim() const { return weights.cols(); }

  // Glorot-initialized weights, zero biases.
  static GaussianRbm random(Rng& rng, std::size_t visible, std::size_t hidden, HiddenKind kind);

  // Encoder layer computing the mean hidden activation.
  DenseLayer to_dense_layer() const;
};

struct CdConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 100;
  double l2 = 0.0002;
  double learning_rate = 0.001;
  std::size_t cd_steps = 1;
};

// Mean hidden activation for each row of v.
Matrix rbm_hidden_mean(const GaussianRbm& rbm, const Matrix& v);
// Mean visible reconstruction for each row of h.
Matrix rbm_visible_mean(const GaussianRbm& rbm, const Matrix& h);

// One CD-1 step on a mini-batch (rows are samples):
//   W += lr * ((v0' h0 - v1' h1) / B - l2 * W), biases without decay.
// Returns the mean squared reconstruction error of the batch. A non-finite
// update leaves the RBM untouched and throws TrainingError.
double cd1_update(GaussianRbm& rbm, const Matrix& batch, const CdConfig& cfg, Rng& rng);

// Epoch-mean reconstruction error, one entry per epoch.
std::vector<double> train_rbm(GaussianRbm& rbm, const Matrix& data, const CdConfig& cfg,
                              Rng& rng);

struct PretrainResult {
  std::vector<DenseLayer> layers;
  std::vector<std::vector<double>> epoch_errors;  // per layer
};

// Greedy layer-wise pretraining. All layers but the last use noisy-ReLU
// hidden units; the last (bottleneck) is linear. Each RBM trains on the mean
// hidden representation of the one below it.
PretrainResult pretrain_stack(std::span<const std::size_t> layer_sizes, const Matrix& data,
                              const CdConfig& cfg, Rng& rng);

struct ZNormalized {
  Matrix data;
  Vector mean;
  Vector stddev;  // population std, 1 where a column is constant
};

ZNormalized znormalize(const Matrix& data);
Matrix apply_znorm(const Matrix& x, std::span<const double> mean, std::span<const double> stddev);

}  // namespace avf
