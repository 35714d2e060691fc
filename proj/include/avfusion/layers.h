// avfusion/include/avfusion/layers.h

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
#include <string_view>

#include "avfusion/tensor.h"

namespace avf {

enum class Activation { kRelu, kLinear };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

// y = act(W x + b) applied to each frame (row) of a T x in sequence.
struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::kLinear;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  static DenseLayer glorot(Rng& rng, std::size_t in, std::size_t out, Activation act);
  // Same shapes and activation, all parameters zero (gradient accumulator).
  DenseLayer zeros_like() const;
};

struct LayerGradients {
  Matrix d_weights;
  Vector d_bias;
  Matrix d_input;
};

Matrix dense_forward(const DenseLayer& layer, const Matrix& x);

LayerGradients dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& d_out);
// As above but reuses the forward output to recover the ReLU mask.
LayerGradients dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& y,
                              const Matrix& d_out);

Matrix relu(const Matrix& x);

// HTK regression deltas with edge replication:
//   d_t = sum_{k=1..K} k (c_{t+k} - c_{t-k}) / (2 sum_k k^2)
struct DeltaConfig {
  std::size_t window = 2;
};

// First-order regression delta of every column of x.
Matrix regression_delta(const DeltaConfig& cfg, const Matrix& x);
// Adjoint of regression_delta, including the edge-replication fold-back.
Matrix regression_delta_adjoint(const DeltaConfig& cfg, const Matrix& u);

// [x | delta(x) | delta(delta(x))], T x 3D.
Matrix delta_forward(const DeltaConfig& cfg, const Matrix& x);
// Gradient w.r.t. the input of delta_forward; d_out is T x 3D.
Matrix delta_backward(const DeltaConfig& cfg, const Matrix& d_out);

// Row-wise softmax.
Matrix softmax(const Matrix& logits);

struct XentResult {
  double loss = 0.0;  // mean over frames
  Matrix d_logits;    // (softmax - onehot) / T
  Matrix probabilities;
};

// Per-frame softmax cross-entropy averaged over frames. Labels outside
// [0, C) raise DataError.
XentResult softmax_xent(const Matrix& logits, std::span<const int> labels);

}  // namespace avf
