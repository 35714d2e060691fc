// avfusion/src/rbm.cc

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

#include "avfusion/rbm.h"

#include <cmath>
#include <numeric>
#include <string>

#include "avfusion/error.h"

namespace avf {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix sample_hidden(const GaussianRbm& rbm, const Matrix& pre, Rng& rng) {
  Matrix h = pre;
  for (double& v : h.values()) {
    if (rbm.hidden_kind == HiddenKind::kNoisyRelu) {
      v = std::max(0.0, v + std::sqrt(logistic(v)) * rng.normal());
    } else {
      v += rng.normal();
    }
  }
  return h;
}

Matrix hidden_pre(const GaussianRbm& rbm, const Matrix& v) {
  Matrix pre = matmul(v, rbm.weights);
  for (std::size_t r = 0; r < pre.rows(); ++r) axpy(1.0, rbm.hidden_bias, pre.row(r));
  return pre;
}

Vector column_mean(const Matrix& m) {
  Vector mean(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) axpy(1.0, m.row(r), mean);
  for (double& v : mean) v /= static_cast<double>(m.rows());
  return mean;
}

}  // namespace

GaussianRbm GaussianRbm::random(Rng& rng, std::size_t visible, std::size_t hidden,
                                HiddenKind kind) {
  GaussianRbm rbm;
  rbm.weights = transpose(glorot_init(rng, visible, hidden));
  rbm.visible_bias.assign(visible, 0.0);
  rbm.hidden_bias.assign(hidden, 0.0);
  rbm.hidden_kind = kind;
  return rbm;
}

DenseLayer GaussianRbm::to_dense_layer() const {
  return DenseLayer{transpose(weights), hidden_bias,
                    hidden_kind == HiddenKind::kNoisyRelu ? Activation::kRelu
                                                          : Activation::kLinear};
}

Matrix rbm_hidden_mean(const GaussianRbm& rbm, const Matrix& v) {
  Matrix pre = hidden_pre(rbm, v);
  return rbm.hidden_kind == HiddenKind::kNoisyRelu ? relu(pre) : pre;
}

Matrix rbm_visible_mean(const GaussianRbm& rbm, const Matrix& h) {
  Matrix v = matmul_bt(h, rbm.weights);
  for (std::size_t r = 0; r < v.rows(); ++r) axpy(1.0, rbm.visible_bias, v.row(r));
  return v;
}

double cd1_update(GaussianRbm& rbm, const Matrix& batch, const CdConfig& cfg, Rng& rng) {
  if (batch.cols() != rbm.visible_dim())
    throw ShapeError("cd1_update: batch " + shape_string(batch) + " for " +
                     std::to_string(rbm.visible_dim()) + " visible units");
  if (batch.rows() == 0) throw ArgumentError("cd1_update: empty batch");
  if (cfg.cd_steps != 1) throw ArgumentError("only CD-1 is supported");

  const Matrix& v0 = batch;
  const Matrix h0_pre = hidden_pre(rbm, v0);
  const Matrix h0_mean =
      rbm.hidden_kind == HiddenKind::kNoisyRelu ? relu(h0_pre) : h0_pre;
  const Matrix h0_sample = sample_hidden(rbm, h0_pre, rng);
  const Matrix v1 = rbm_visible_mean(rbm, h0_sample);
  const Matrix h1_mean = rbm_hidden_mean(rbm, v1);

  const double inv_b = 1.0 / static_cast<double>(batch.rows());
  Matrix d_w = matmul_at(v0, h0_mean);
  Matrix neg = matmul_at(v1, h1_mean);
  axpy(-1.0, neg.values(), d_w.values());

  GaussianRbm next = rbm;
  auto w = next.weights.values();
  auto g = d_w.values();
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] += cfg.learning_rate * (g[k] * inv_b - cfg.l2 * rbm.weights.values()[k]);

  Vector vb_grad = column_mean(v0);
  axpy(-1.0, column_mean(v1), vb_grad);
  axpy(cfg.learning_rate, vb_grad, next.visible_bias);
  Vector hb_grad = column_mean(h0_mean);
  axpy(-1.0, column_mean(h1_mean), hb_grad);
  axpy(cfg.learning_rate, hb_grad, next.hidden_bias);

  double err = 0.0;
  for (std::size_t k = 0; k < v0.size(); ++k) {
    const double d = v0.values()[k] - v1.values()[k];
    err += d * d;
  }
  err /= static_cast<double>(v0.size());

  if (!std::isfinite(err) || !all_finite(next.weights.values()) ||
      !all_finite(next.visible_bias) || !all_finite(next.hidden_bias))
    throw TrainingError("RBM update diverged (non-finite parameters)");
  rbm = std::move(next);
  return err;
}

std::vector<double> train_rbm(GaussianRbm& rbm, const Matrix& data, const CdConfig& cfg,
                              Rng& rng) {
  if (cfg.batch_size == 0) throw ArgumentError("RBM batch size must be positive");
  if (data.rows() == 0) throw ArgumentError("RBM training data is empty");
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_errors;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      Matrix batch(count, data.cols());
      for (std::size_t r = 0; r < count; ++r) {
        auto src = data.row(order[start + r]);
        std::copy(src.begin(), src.end(), batch.row(r).begin());
      }
      try {
        total += cd1_update(rbm, batch, cfg, rng);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) +
                            ", batch " + std::to_string(batches + 1));
      }
      ++batches;
    }
    epoch_errors.push_back(total / static_cast<double>(batches));
  }
  return epoch_errors;
}

PretrainResult pretrain_stack(std::span<const std::size_t> layer_sizes, const Matrix& data,
                              const CdConfig& cfg, Rng& rng) {
  if (layer_sizes.empty()) throw ArgumentError("pretrain_stack: no layers");
  PretrainResult result;
  Matrix input = data;
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    if (layer_sizes[l] == 0) throw ArgumentError("pretrain_stack: zero-width layer");
    const bool bottleneck = l + 1 == layer_sizes.size();
    GaussianRbm rbm = GaussianRbm::random(rng, input.cols(), layer_sizes[l],
                                          bottleneck ? HiddenKind::kLinear
                                                     : HiddenKind::kNoisyRelu);
    result.epoch_errors.push_back(train_rbm(rbm, input, cfg, rng));
    if (!bottleneck) input = rbm_hidden_mean(rbm, input);
    result.layers.push_back(rbm.to_dense_layer());
  }
  return result;
}

ZNormalized znormalize(const Matrix& data) {
  if (data.rows() < 2) throw ArgumentError("znormalize needs at least 2 rows");
  ZNormalized z;
  z.mean = column_mean(data);
  z.stddev.assign(data.cols(), 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto row = data.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double d = row[c] - z.mean[c];
      z.stddev[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < data.cols(); ++c) {
    double& s = z.stddev[c];
    s = std::sqrt(s / static_cast<double>(data.rows()));
    // Numerically constant columns map to zero.
    if (!(s > 1e-12)) {
      s = 1.0;
      z.mean[c] = data(0, c);
    }
  }
  z.data = apply_znorm(data, z.mean, z.stddev);
  return z;
}

Matrix apply_znorm(const Matrix& x, std::span<const double> mean,
                   std::span<const double> stddev) {
  if (mean.size() != x.cols() || stddev.size() != x.cols())
    throw ShapeError("apply_znorm: statistics of length " + std::to_string(mean.size()) +
                     " for " + shape_string(x));
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / stddev[c];
  }
  return out;
}

}  // namespace avf
