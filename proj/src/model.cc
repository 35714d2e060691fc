// avfusion/src/model.cc

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

#include "avfusion/model.h"

#include <string>

#include "avfusion/error.h"
#include "avfusion/rbm.h"

namespace avf {

namespace {

void add_dense(DenseLayer& acc, const LayerGradients& g) {
  axpy(1.0, g.d_weights.values(), acc.weights.values());
  axpy(1.0, g.d_bias, acc.bias);
}

void add_lstm(LstmParams& acc, const LstmParams& g) {
  for (std::size_t k = 0; k < kGateCount; ++k) {
    axpy(1.0, g.gates[k].input_weights.values(), acc.gates[k].input_weights.values());
    axpy(1.0, g.gates[k].recurrent_weights.values(), acc.gates[k].recurrent_weights.values());
    axpy(1.0, g.gates[k].bias, acc.gates[k].bias);
  }
}

void add_blstm(BlstmParams& acc, const BlstmParams& g) {
  add_lstm(acc.forward, g.forward);
  add_lstm(acc.backward, g.backward);
}

void push_matrix(std::vector<ParamBlock>& out, std::string name, Matrix& m, ParamGroup group) {
  out.push_back({std::move(name), m.values(), m.rows(), m.cols(), group});
}

void push_vector(std::vector<ParamBlock>& out, std::string name, Vector& v, ParamGroup group) {
  out.push_back({std::move(name), std::span<double>(v), 1, v.size(), group});
}

void push_dense(std::vector<ParamBlock>& out, const std::string& prefix, DenseLayer& d) {
  push_matrix(out, prefix + ".weights", d.weights, ParamGroup::kDense);
  push_vector(out, prefix + ".bias", d.bias, ParamGroup::kDense);
}

void push_lstm(std::vector<ParamBlock>& out, const std::string& prefix, LstmParams& p) {
  static constexpr const char* kGateNames[kGateCount] = {"input", "forget", "cell", "output"};
  for (std::size_t k = 0; k < kGateCount; ++k) {
    const std::string g = prefix + "." + kGateNames[k];
    push_matrix(out, g + ".W", p.gates[k].input_weights, ParamGroup::kLstm);
    push_matrix(out, g + ".U", p.gates[k].recurrent_weights, ParamGroup::kLstm);
    push_vector(out, g + ".b", p.gates[k].bias, ParamGroup::kLstm);
  }
}

void push_blstm(std::vector<ParamBlock>& out, const std::string& prefix, BlstmParams& p) {
  push_lstm(out, prefix + ".fwd", p.forward);
  push_lstm(out, prefix + ".bwd", p.backward);
}

}  // namespace

StreamParams StreamParams::create(Rng& rng, std::size_t input_dim,
                                  std::span<const std::size_t> encoder_sizes,
                                  std::size_t hidden, DeltaConfig delta) {
  if (encoder_sizes.empty()) throw ArgumentError("stream encoder needs at least one layer");
  StreamParams s;
  s.delta = delta;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < encoder_sizes.size(); ++l) {
    const bool bottleneck = l + 1 == encoder_sizes.size();
    s.encoder.push_back(DenseLayer::glorot(rng, in, encoder_sizes[l],
                                           bottleneck ? Activation::kLinear : Activation::kRelu));
    in = encoder_sizes[l];
  }
  s.blstm = BlstmParams::glorot(rng, 3 * in, hidden);
  return s;
}

StreamParams StreamParams::zeros_like() const {
  StreamParams z;
  z.input_mean = input_mean;
  z.input_stddev = input_stddev;
  z.delta = delta;
  for (const auto& layer : encoder) z.encoder.push_back(layer.zeros_like());
  z.blstm = blstm.zeros_like();
  return z;
}

void StreamParams::validate() const {
  if (encoder.empty()) throw ShapeError("stream has no encoder layers");
  for (std::size_t l = 1; l < encoder.size(); ++l) {
    if (encoder[l].in_dim() != encoder[l - 1].out_dim())
      throw ShapeError("encoder layer " + std::to_string(l) + " expects " +
                       std::to_string(encoder[l].in_dim()) + " inputs but layer " +
                       std::to_string(l - 1) + " produces " +
                       std::to_string(encoder[l - 1].out_dim()));
  }
  for (const auto& layer : encoder)
    if (layer.bias.size() != layer.out_dim()) throw ShapeError("encoder bias length mismatch");
  if (3 * bottleneck_dim() != blstm.input_dim())
    throw ShapeError("stream BLSTM input dim " + std::to_string(blstm.input_dim()) +
                     " != 3 x bottleneck " + std::to_string(bottleneck_dim()));
  if (!input_mean.empty() &&
      (input_mean.size() != input_dim() || input_stddev.size() != input_dim()))
    throw ShapeError("stream normalization statistics do not match the input dim");
}

StreamModel StreamModel::create(Rng& rng, std::size_t input_dim,
                                std::span<const std::size_t> encoder_sizes, std::size_t hidden,
                                std::size_t classes, DeltaConfig delta) {
  StreamModel m;
  m.stream = StreamParams::create(rng, input_dim, encoder_sizes, hidden, delta);
  m.output = DenseLayer::glorot(rng, m.stream.output_dim(), classes, Activation::kLinear);
  return m;
}

StreamModel StreamModel::zeros_like() const { return {stream.zeros_like(), output.zeros_like()}; }

FusionModel FusionModel::create(Rng& rng, std::vector<StreamParams> streams, std::size_t hidden,
                                std::size_t classes) {
  FusionModel m;
  m.streams = std::move(streams);
  std::size_t in = 0;
  for (const auto& s : m.streams) in += s.output_dim();
  m.fusion = BlstmParams::glorot(rng, in, hidden);
  m.output = DenseLayer::glorot(rng, m.fusion.output_dim(), classes, Activation::kLinear);
  return m;
}

FusionModel FusionModel::zeros_like() const {
  FusionModel z;
  for (const auto& s : streams) z.streams.push_back(s.zeros_like());
  z.fusion = fusion.zeros_like();
  z.output = output.zeros_like();
  return z;
}

void FusionModel::validate() const {
  if (streams.empty()) throw ShapeError("fusion model has no streams");
  std::size_t in = 0;
  for (const auto& s : streams) {
    s.validate();
    in += s.output_dim();
  }
  if (fusion.input_dim() != in)
    throw ShapeError("fusion BLSTM input dim " + std::to_string(fusion.input_dim()) +
                     " != concatenated stream outputs " + std::to_string(in));
  if (output.in_dim() != fusion.output_dim())
    throw ShapeError("output layer does not match the fusion BLSTM width");
}

StreamResult stream_forward(const StreamParams& s, const Matrix& x) {
  if (s.encoder.empty()) throw ShapeError("stream has no encoder layers");
  if (x.cols() != s.input_dim())
    throw ShapeError("stream input dim " + std::to_string(x.cols()) + " != encoder input dim " +
                     std::to_string(s.input_dim()));
  StreamResult r;
  r.cache.activations.reserve(s.encoder.size() + 1);
  r.cache.activations.push_back(s.input_mean.empty()
                                    ? x
                                    : apply_znorm(x, s.input_mean, s.input_stddev));
  for (const auto& layer : s.encoder)
    r.cache.activations.push_back(dense_forward(layer, r.cache.activations.back()));
  r.cache.delta_output = delta_forward(s.delta, r.cache.activations.back());
  BlstmResult b = blstm_forward(s.blstm, r.cache.delta_output);
  r.output = std::move(b.output);
  r.cache.blstm = std::move(b.cache);
  return r;
}

Matrix stream_backward(const StreamParams& s, const StreamCache& cache, const Matrix& d_output,
                       StreamParams& grad) {
  BlstmBackward b = blstm_backward(s.blstm, cache.blstm, d_output);
  add_blstm(grad.blstm, b.grads);
  Matrix d = delta_backward(s.delta, b.d_input);
  for (std::size_t l = s.encoder.size(); l-- > 0;) {
    LayerGradients g =
        dense_backward(s.encoder[l], cache.activations[l], cache.activations[l + 1], d);
    add_dense(grad.encoder[l], g);
    d = std::move(g.d_input);
  }
  if (!s.input_stddev.empty()) {
    for (std::size_t t = 0; t < d.rows(); ++t) {
      auto row = d.row(t);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] /= s.input_stddev[c];
    }
  }
  return d;
}

FramePredictions make_predictions(Matrix posteriors) {
  FramePredictions p;
  p.labels.resize(posteriors.rows());
  for (std::size_t t = 0; t < posteriors.rows(); ++t) {
    auto row = posteriors.row(t);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    p.labels[t] = static_cast<int>(best);
  }
  p.posteriors = std::move(posteriors);
  return p;
}

FramePredictions predict(const StreamModel& m, const Matrix& x) {
  StreamResult s = stream_forward(m.stream, x);
  return make_predictions(softmax(dense_forward(m.output, s.output)));
}

namespace {

void check_fusion_inputs(const FusionModel& m, std::span<const Matrix> inputs) {
  if (inputs.size() != m.streams.size())
    throw ShapeError("fusion model has " + std::to_string(m.streams.size()) +
                     " streams but got " + std::to_string(inputs.size()) + " inputs");
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    if (inputs[k].rows() != inputs[0].rows())
      throw SyncError("stream " + std::to_string(k) + " has " +
                      std::to_string(inputs[k].rows()) + " frames, stream 0 has " +
                      std::to_string(inputs[0].rows()));
  }
}

struct FusionPass {
  std::vector<StreamResult> streams;
  BlstmResult fusion;
  Matrix fused_input;
  Matrix logits;
};

FusionPass fusion_pass(const FusionModel& m, std::span<const Matrix> inputs) {
  check_fusion_inputs(m, inputs);
  FusionPass pass;
  std::vector<Matrix> outputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    pass.streams.push_back(stream_forward(m.streams[k], inputs[k]));
    outputs.push_back(pass.streams.back().output);
  }
  pass.fused_input = hconcat(outputs);
  pass.fusion = blstm_forward(m.fusion, pass.fused_input);
  pass.logits = dense_forward(m.output, pass.fusion.output);
  return pass;
}

}  // namespace

FramePredictions fusion_forward(const FusionModel& m, std::span<const Matrix> inputs) {
  return make_predictions(softmax(fusion_pass(m, inputs).logits));
}

int majority_vote(const FramePredictions& p) {
  const std::size_t classes = p.posteriors.cols();
  if (p.labels.empty() || classes == 0) throw ArgumentError("majority_vote: no frames");
  std::vector<std::size_t> counts(classes, 0);
  Vector mean(classes, 0.0);
  for (std::size_t t = 0; t < p.labels.size(); ++t) {
    ++counts[static_cast<std::size_t>(p.labels[t])];
    axpy(1.0, p.posteriors.row(t), mean);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (counts[c] > counts[best] || (counts[c] == counts[best] && mean[c] > mean[best]))
      best = c;
  }
  return static_cast<int>(best);
}

double stream_loss(const StreamModel& m, const Matrix& x, int label, StreamModel* grad) {
  StreamResult s = stream_forward(m.stream, x);
  Matrix logits = dense_forward(m.output, s.output);
  const std::vector<int> labels(x.rows(), label);
  XentResult xent = softmax_xent(logits, labels);
  if (grad != nullptr) {
    LayerGradients og = dense_backward(m.output, s.output, logits, xent.d_logits);
    add_dense(grad->output, og);
    stream_backward(m.stream, s.cache, og.d_input, grad->stream);
  }
  return xent.loss;
}

double fusion_loss(const FusionModel& m, std::span<const Matrix> inputs, int label,
                   FusionModel* grad) {
  FusionPass pass = fusion_pass(m, inputs);
  const std::vector<int> labels(pass.logits.rows(), label);
  XentResult xent = softmax_xent(pass.logits, labels);
  if (grad != nullptr) {
    LayerGradients og = dense_backward(m.output, pass.fusion.output, pass.logits, xent.d_logits);
    add_dense(grad->output, og);
    BlstmBackward fb = blstm_backward(m.fusion, pass.fusion.cache, og.d_input);
    add_blstm(grad->fusion, fb.grads);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < m.streams.size(); ++k) {
      const std::size_t width = m.streams[k].output_dim();
      stream_backward(m.streams[k], pass.streams[k].cache,
                      column_block(fb.d_input, offset, width), grad->streams[k]);
      offset += width;
    }
  }
  return xent.loss;
}

std::vector<ParamBlock> param_blocks(StreamParams& s, const std::string& prefix) {
  std::vector<ParamBlock> out;
  for (std::size_t l = 0; l < s.encoder.size(); ++l)
    push_dense(out, prefix + ".encoder." + std::to_string(l), s.encoder[l]);
  push_blstm(out, prefix + ".blstm", s.blstm);
  return out;
}

std::vector<ParamBlock> param_blocks(StreamModel& m) {
  std::vector<ParamBlock> out = param_blocks(m.stream, "stream");
  push_dense(out, "output", m.output);
  return out;
}

std::vector<ParamBlock> param_blocks(FusionModel& m) {
  std::vector<ParamBlock> out;
  for (std::size_t k = 0; k < m.streams.size(); ++k) {
    auto s = param_blocks(m.streams[k], "streams." + std::to_string(k));
    out.insert(out.end(), s.begin(), s.end());
  }
  push_blstm(out, "fusion", m.fusion);
  push_dense(out, "output", m.output);
  return out;
}

}  // namespace avf
