// avfusion/include/avfusion/recurrent.h

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

#include <array>

#include "avfusion/tensor.h"

namespace avf {

enum class Gate : std::size_t { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };
inline constexpr std::size_t kGateCount = 4;

struct LstmGate {
  Matrix input_weights;      // hidden x input
  Matrix recurrent_weights;  // hidden x hidden
  Vector bias;               // hidden
};

// Standard LSTM with forget gate and no peepholes:
//   i, f, o = logistic(W x_t + U h_{t-1} + b), g = tanh(...)
//   c_t = f * c_{t-1} + i * g,  h_t = o * tanh(c_t)
struct LstmParams {
  std::array<LstmGate, kGateCount> gates;

  LstmGate& gate(Gate g) { return gates[static_cast<std::size_t>(g)]; }
  const LstmGate& gate(Gate g) const { return gates[static_cast<std::size_t>(g)]; }

  std::size_t hidden_size() const { return gates[0].bias.size(); }
  std::size_t input_dim() const { return gates[0].input_weights.cols(); }

  // Glorot weights, zero biases except the forget gate at 1.
  static LstmParams glorot(Rng& rng, std::size_t input_dim, std::size_t hidden);
  static LstmParams zeros(std::size_t input_dim, std::size_t hidden);
  LstmParams zeros_like() const { return zeros(input_dim(), hidden_size()); }
};

struct LstmCache {
  Matrix input;
  std::array<Matrix, kGateCount> activations;  // T x hidden each
  Matrix cell;
  Matrix cell_tanh;
  Matrix hidden;
};

struct LstmResult {
  Matrix hidden;  // T x hidden
  LstmCache cache;
};

struct LstmBackward {
  LstmParams grads;
  Matrix d_input;
};

// Runs from h_0 = c_0 = 0.
LstmResult lstm_forward(const LstmParams& p, const Matrix& x);
LstmBackward lstm_backward(const LstmParams& p, const LstmCache& cache, const Matrix& d_hidden);

struct BlstmParams {
  LstmParams forward;
  LstmParams backward;

  std::size_t hidden_size() const { return forward.hidden_size(); }
  std::size_t input_dim() const { return forward.input_dim(); }
  std::size_t output_dim() const { return 2 * hidden_size(); }

  static BlstmParams glorot(Rng& rng, std::size_t input_dim, std::size_t hidden);
  BlstmParams zeros_like() const { return {forward.zeros_like(), backward.zeros_like()}; }
};

struct BlstmCache {
  LstmCache forward;
  LstmCache backward;  // over the time-reversed input
};

struct BlstmResult {
  Matrix output;  // T x 2*hidden, [forward | backward]
  BlstmCache cache;
};

struct BlstmBackward {
  BlstmParams grads;
  Matrix d_input;
};

BlstmResult blstm_forward(const BlstmParams& p, const Matrix& x);
BlstmBackward blstm_backward(const BlstmParams& p, const BlstmCache& cache,
                             const Matrix& d_output);

Matrix reverse_frames(const Matrix& x);

}  // namespace avf
