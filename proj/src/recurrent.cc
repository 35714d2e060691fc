// avfusion/src/recurrent.cc

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

#include "avfusion/recurrent.h"

#include <cmath>
#include <string>

#include "avfusion/error.h"

namespace avf {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_params(const LstmParams& p) {
  const std::size_t h = p.hidden_size();
  const std::size_t d = p.input_dim();
  for (const auto& g : p.gates) {
    if (g.bias.size() != h || g.input_weights.rows() != h || g.input_weights.cols() != d ||
        g.recurrent_weights.rows() != h || g.recurrent_weights.cols() != h)
      throw ShapeError("inconsistent LSTM gate shapes");
  }
}

}  // namespace

LstmParams LstmParams::glorot(Rng& rng, std::size_t input_dim, std::size_t hidden) {
  LstmParams p;
  for (std::size_t k = 0; k < kGateCount; ++k) {
    p.gates[k].input_weights = glorot_init(rng, input_dim, hidden);
    p.gates[k].recurrent_weights = glorot_init(rng, hidden, hidden);
    p.gates[k].bias.assign(hidden, 0.0);
  }
  p.gate(Gate::kForget).bias.assign(hidden, 1.0);
  return p;
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden) {
  LstmParams p;
  for (auto& g : p.gates) {
    g.input_weights = Matrix(hidden, input_dim);
    g.recurrent_weights = Matrix(hidden, hidden);
    g.bias.assign(hidden, 0.0);
  }
  return p;
}

LstmResult lstm_forward(const LstmParams& p, const Matrix& x) {
  check_params(p);
  if (x.cols() != p.input_dim())
    throw ShapeError("lstm_forward: input dim " + std::to_string(x.cols()) +
                     " != LSTM input dim " + std::to_string(p.input_dim()));
  const std::size_t frames = x.rows();
  const std::size_t hidden = p.hidden_size();

  LstmResult r;
  LstmCache& c = r.cache;
  c.input = x;
  // Input projections for every frame at once; the recurrent part is added
  // step by step below.
  for (std::size_t k = 0; k < kGateCount; ++k)
    c.activations[k] = matmul_bt(x, p.gates[k].input_weights);
  c.cell = Matrix(frames, hidden);
  c.cell_tanh = Matrix(frames, hidden);
  c.hidden = Matrix(frames, hidden);

  Vector h_prev(hidden, 0.0);
  Vector c_prev(hidden, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < kGateCount; ++k) {
      auto a = c.activations[k].row(t);
      const LstmGate& g = p.gates[k];
      for (std::size_t j = 0; j < hidden; ++j) {
        double v = a[j] + g.bias[j] + dot(g.recurrent_weights.row(j), h_prev);
        a[j] = (k == static_cast<std::size_t>(Gate::kCell)) ? std::tanh(v) : logistic(v);
      }
    }
    auto i = c.activations[0].row(t);
    auto f = c.activations[1].row(t);
    auto g = c.activations[2].row(t);
    auto o = c.activations[3].row(t);
    auto cell = c.cell.row(t);
    auto ctanh = c.cell_tanh.row(t);
    auto h = c.hidden.row(t);
    for (std::size_t j = 0; j < hidden; ++j) {
      cell[j] = f[j] * c_prev[j] + i[j] * g[j];
      ctanh[j] = std::tanh(cell[j]);
      h[j] = o[j] * ctanh[j];
      c_prev[j] = cell[j];
      h_prev[j] = h[j];
    }
  }
  r.hidden = c.hidden;
  return r;
}

LstmBackward lstm_backward(const LstmParams& p, const LstmCache& cache, const Matrix& d_hidden) {
  check_params(p);
  const std::size_t frames = cache.hidden.rows();
  const std::size_t hidden = p.hidden_size();
  if (d_hidden.rows() != frames || d_hidden.cols() != hidden)
    throw ShapeError("lstm_backward: dH " + shape_string(d_hidden) + " vs hidden " +
                     shape_string(cache.hidden));

  // Pre-activation gradients of every gate, T x hidden.
  std::array<Matrix, kGateCount> d_pre;
  for (auto& m : d_pre) m = Matrix(frames, hidden);

  Vector dh_next(hidden, 0.0);
  Vector dc_next(hidden, 0.0);
  for (std::size_t step = frames; step-- > 0;) {
    const std::size_t t = step;
    auto i = cache.activations[0].row(t);
    auto f = cache.activations[1].row(t);
    auto g = cache.activations[2].row(t);
    auto o = cache.activations[3].row(t);
    auto ctanh = cache.cell_tanh.row(t);
    auto dh_in = d_hidden.row(t);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double c_prev = t > 0 ? cache.cell(t - 1, j) : 0.0;
      const double dh = dh_in[j] + dh_next[j];
      const double d_o = dh * ctanh[j];
      const double dc = dh * o[j] * (1.0 - ctanh[j] * ctanh[j]) + dc_next[j];
      d_pre[0](t, j) = dc * g[j] * i[j] * (1.0 - i[j]);
      d_pre[1](t, j) = dc * c_prev * f[j] * (1.0 - f[j]);
      d_pre[2](t, j) = dc * i[j] * (1.0 - g[j] * g[j]);
      d_pre[3](t, j) = d_o * o[j] * (1.0 - o[j]);
      dc_next[j] = dc * f[j];
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t k = 0; k < kGateCount; ++k) {
      const Matrix& u = p.gates[k].recurrent_weights;
      auto da = d_pre[k].row(t);
      for (std::size_t j = 0; j < hidden; ++j)
        if (da[j] != 0.0) axpy(da[j], u.row(j), dh_next);
    }
  }

  // h_{t-1} for every frame, zero at t = 0.
  Matrix h_prev(frames, hidden);
  for (std::size_t t = 1; t < frames; ++t) {
    auto src = cache.hidden.row(t - 1);
    std::copy(src.begin(), src.end(), h_prev.row(t).begin());
  }

  LstmBackward out;
  out.d_input = Matrix(frames, p.input_dim());
  for (std::size_t k = 0; k < kGateCount; ++k) {
    LstmGate& gg = out.grads.gates[k];
    gg.input_weights = matmul_at(d_pre[k], cache.input);
    gg.recurrent_weights = matmul_at(d_pre[k], h_prev);
    gg.bias.assign(hidden, 0.0);
    for (std::size_t t = 0; t < frames; ++t) axpy(1.0, d_pre[k].row(t), gg.bias);
    Matrix dx = matmul(d_pre[k], p.gates[k].input_weights);
    axpy(1.0, dx.values(), out.d_input.values());
  }
  return out;
}

BlstmParams BlstmParams::glorot(Rng& rng, std::size_t input_dim, std::size_t hidden) {
  BlstmParams p;
  p.forward = LstmParams::glorot(rng, input_dim, hidden);
  p.backward = LstmParams::glorot(rng, input_dim, hidden);
  return p;
}

Matrix reverse_frames(const Matrix& x) {
  Matrix r(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto src = x.row(x.rows() - 1 - t);
    std::copy(src.begin(), src.end(), r.row(t).begin());
  }
  return r;
}

BlstmResult blstm_forward(const BlstmParams& p, const Matrix& x) {
  if (p.forward.input_dim() != p.backward.input_dim() ||
      p.forward.hidden_size() != p.backward.hidden_size())
    throw ShapeError("BLSTM directions disagree on shape");
  LstmResult fwd = lstm_forward(p.forward, x);
  LstmResult bwd = lstm_forward(p.backward, reverse_frames(x));
  BlstmResult r;
  const Matrix parts[] = {fwd.hidden, reverse_frames(bwd.hidden)};
  r.output = hconcat(parts);
  r.cache.forward = std::move(fwd.cache);
  r.cache.backward = std::move(bwd.cache);
  return r;
}

BlstmBackward blstm_backward(const BlstmParams& p, const BlstmCache& cache,
                             const Matrix& d_output) {
  const std::size_t hidden = p.hidden_size();
  if (d_output.cols() != 2 * hidden)
    throw ShapeError("blstm_backward: gradient " + shape_string(d_output) +
                     " for hidden size " + std::to_string(hidden));
  LstmBackward fwd = lstm_backward(p.forward, cache.forward, column_block(d_output, 0, hidden));
  LstmBackward bwd = lstm_backward(p.backward, cache.backward,
                                   reverse_frames(column_block(d_output, hidden, hidden)));
  BlstmBackward out;
  out.grads.forward = std::move(fwd.grads);
  out.grads.backward = std::move(bwd.grads);
  out.d_input = std::move(fwd.d_input);
  Matrix d_rev = reverse_frames(bwd.d_input);
  axpy(1.0, d_rev.values(), out.d_input.values());
  return out;
}

}  // namespace avf
