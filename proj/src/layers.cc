// avfusion/src/layers.cc

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

#include "avfusion/layers.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "avfusion/error.h"

namespace avf {

std::string_view activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "linear";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "linear") return Activation::kLinear;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

DenseLayer DenseLayer::glorot(Rng& rng, std::size_t in, std::size_t out, Activation act) {
  return DenseLayer{glorot_init(rng, in, out), Vector(out, 0.0), act};
}

DenseLayer DenseLayer::zeros_like() const {
  return DenseLayer{Matrix(weights.rows(), weights.cols()), Vector(bias.size(), 0.0),
                    activation};
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
  if (x.cols() != layer.in_dim())
    throw ShapeError("dense_forward: input dim " + std::to_string(x.cols()) +
                     " != layer input dim " + std::to_string(layer.in_dim()));
  Matrix y = matmul_bt(x, layer.weights);
  for (std::size_t t = 0; t < y.rows(); ++t) {
    auto row = y.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] += layer.bias[j];
      if (layer.activation == Activation::kRelu && row[j] < 0.0) row[j] = 0.0;
    }
  }
  return y;
}

LayerGradients dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& d_out) {
  return dense_backward(layer, x, dense_forward(layer, x), d_out);
}

LayerGradients dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& y,
                              const Matrix& d_out) {
  if (x.cols() != layer.in_dim() || d_out.cols() != layer.out_dim() ||
      d_out.rows() != x.rows() || y.rows() != x.rows() || y.cols() != layer.out_dim())
    throw ShapeError("dense_backward: x " + shape_string(x) + ", dOut " +
                     shape_string(d_out) + " for layer " + shape_string(layer.weights));
  Matrix d_pre = d_out;
  if (layer.activation == Activation::kRelu) {
    auto g = d_pre.values();
    auto out = y.values();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (out[i] <= 0.0) g[i] = 0.0;
  }
  LayerGradients grads;
  grads.d_weights = matmul_at(d_pre, x);
  grads.d_bias.assign(layer.out_dim(), 0.0);
  for (std::size_t t = 0; t < d_pre.rows(); ++t) axpy(1.0, d_pre.row(t), grads.d_bias);
  grads.d_input = matmul(d_pre, layer.weights);
  return grads;
}

Matrix relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values()) v = std::max(v, 0.0);
  return y;
}

namespace {

double delta_norm(std::size_t window) {
  double s = 0.0;
  for (std::size_t k = 1; k <= window; ++k) s += static_cast<double>(k * k);
  return 2.0 * s;
}

std::size_t clamp_frame(long t, std::size_t frames) {
  if (t < 0) return 0;
  if (t >= static_cast<long>(frames)) return frames - 1;
  return static_cast<std::size_t>(t);
}

void check_window(const DeltaConfig& cfg) {
  if (cfg.window < 1) throw ArgumentError("delta window must be >= 1");
}

}  // namespace

Matrix regression_delta(const DeltaConfig& cfg, const Matrix& x) {
  check_window(cfg);
  const std::size_t frames = x.rows();
  if (frames == 0) throw ArgumentError("delta of an empty sequence");
  const double norm = delta_norm(cfg.window);
  Matrix d(frames, x.cols());
  for (std::size_t t = 0; t < frames; ++t) {
    auto out = d.row(t);
    for (std::size_t k = 1; k <= cfg.window; ++k) {
      const long lt = static_cast<long>(t);
      const long lk = static_cast<long>(k);
      auto ahead = x.row(clamp_frame(lt + lk, frames));
      auto behind = x.row(clamp_frame(lt - lk, frames));
      const double w = static_cast<double>(k) / norm;
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * (ahead[j] - behind[j]);
    }
  }
  return d;
}

Matrix regression_delta_adjoint(const DeltaConfig& cfg, const Matrix& u) {
  check_window(cfg);
  const std::size_t frames = u.rows();
  if (frames == 0) throw ArgumentError("delta of an empty sequence");
  const double norm = delta_norm(cfg.window);
  Matrix g(frames, u.cols());
  for (std::size_t t = 0; t < frames; ++t) {
    auto src = u.row(t);
    for (std::size_t k = 1; k <= cfg.window; ++k) {
      const long lt = static_cast<long>(t);
      const long lk = static_cast<long>(k);
      const double w = static_cast<double>(k) / norm;
      axpy(w, src, g.row(clamp_frame(lt + lk, frames)));
      axpy(-w, src, g.row(clamp_frame(lt - lk, frames)));
    }
  }
  return g;
}

Matrix delta_forward(const DeltaConfig& cfg, const Matrix& x) {
  Matrix d1 = regression_delta(cfg, x);
  Matrix d2 = regression_delta(cfg, d1);
  const Matrix parts[] = {x, d1, d2};
  return hconcat(parts);
}

Matrix delta_backward(const DeltaConfig& cfg, const Matrix& d_out) {
  if (d_out.cols() % 3 != 0)
    throw ShapeError("delta_backward: gradient width " + std::to_string(d_out.cols()) +
                     " is not a multiple of 3");
  const std::size_t dim = d_out.cols() / 3;
  Matrix grad = column_block(d_out, 0, dim);
  // Fold the second-order branch into the first-order one, then apply the
  // first-order adjoint once.
  Matrix d1 = column_block(d_out, dim, dim);
  Matrix through_d2 = regression_delta_adjoint(cfg, column_block(d_out, 2 * dim, dim));
  axpy(1.0, through_d2.values(), d1.values());
  Matrix through_d1 = regression_delta_adjoint(cfg, d1);
  axpy(1.0, through_d1.values(), grad.values());
  return grad;
}

Matrix softmax(const Matrix& logits) {
  Matrix p = logits;
  for (std::size_t t = 0; t < p.rows(); ++t) {
    auto row = p.row(t);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return p;
}

XentResult softmax_xent(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows())
    throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(logits.rows()) + " frames");
  if (logits.rows() == 0) throw ArgumentError("softmax_xent: empty sequence");
  const std::size_t classes = logits.cols();
  XentResult r;
  r.probabilities = softmax(logits);
  r.d_logits = r.probabilities;
  const double inv_t = 1.0 / static_cast<double>(logits.rows());
  double total = 0.0;
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    const int label = labels[t];
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      throw DataError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(classes) + ")");
    // log-softmax computed directly from logits to stay finite when the
    // probability underflows.
    auto row = logits.row(t);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - peak);
    total += std::log(z) + peak - row[label];
    r.d_logits(t, label) -= 1.0;
  }
  for (double& g : r.d_logits.values()) g *= inv_t;
  r.loss = total * inv_t;
  return r;
}

}  // namespace avf
