// avfusion/include/avfusion/model.h

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
#include <string>
#include <vector>

#include "avfusion/layers.h"
#include "avfusion/recurrent.h"
#include "avfusion/tensor.h"

namespace avf {

// Which optimizer-side treatment a parameter block gets; gradient clipping
// applies to LSTM blocks only.
enum class ParamGroup { kDense, kLstm };

// One modality: z-normalization -> bottleneck encoder -> [x | delta | delta2]
// -> BLSTM. The normalization statistics are fixed at training start and are
// not trained; empty statistics mean identity.
struct StreamParams {
  Vector input_mean;
  Vector input_stddev;
  std::vector<DenseLayer> encoder;
  DeltaConfig delta;
  BlstmParams blstm;

  std::size_t input_dim() const { return encoder.front().in_dim(); }
  std::size_t bottleneck_dim() const { return encoder.back().out_dim(); }
  std::size_t output_dim() const { return blstm.output_dim(); }

  // Hidden layers ReLU, last layer linear, all Glorot; BLSTM Glorot.
  static StreamParams create(Rng& rng, std::size_t input_dim,
                             std::span<const std::size_t> encoder_sizes, std::size_t hidden,
                             DeltaConfig delta = {});
  StreamParams zeros_like() const;
  // Throws ShapeError when the encoder, delta and BLSTM do not chain.
  void validate() const;
};

// Single-modality classifier used for the first training phase.
struct StreamModel {
  StreamParams stream;
  DenseLayer output;  // linear, classes outputs

  std::size_t classes() const { return output.out_dim(); }
  static StreamModel create(Rng& rng, std::size_t input_dim,
                            std::span<const std::size_t> encoder_sizes, std::size_t hidden,
                            std::size_t classes, DeltaConfig delta = {});
  StreamModel zeros_like() const;
};

// Streams (audio, video, ...) whose per-frame outputs are concatenated and fed
// to a fusion BLSTM followed by a per-frame linear + softmax output.
struct FusionModel {
  std::vector<StreamParams> streams;
  BlstmParams fusion;
  DenseLayer output;

  std::size_t classes() const { return output.out_dim(); }
  // Fresh fusion BLSTM and output layer (Glorot) over already-built streams.
  static FusionModel create(Rng& rng, std::vector<StreamParams> streams, std::size_t hidden,
                            std::size_t classes);
  FusionModel zeros_like() const;
  void validate() const;
};

struct StreamCache {
  std::vector<Matrix> activations;  // normalized input, then each layer output
  Matrix delta_output;
  BlstmCache blstm;
};

struct StreamResult {
  Matrix output;
  StreamCache cache;
};

StreamResult stream_forward(const StreamParams& s, const Matrix& x);
// Adds parameter gradients into grad and returns the gradient w.r.t. the raw
// (pre-normalization) input.
Matrix stream_backward(const StreamParams& s, const StreamCache& cache, const Matrix& d_output,
                       StreamParams& grad);

struct FramePredictions {
  Matrix posteriors;        // T x C, rows sum to 1
  std::vector<int> labels;  // per-frame argmax
};

FramePredictions make_predictions(Matrix posteriors);

FramePredictions predict(const StreamModel& m, const Matrix& x);
// One input per stream, all with the same frame count (SyncError otherwise).
FramePredictions fusion_forward(const FusionModel& m, std::span<const Matrix> inputs);

// Most frequent per-frame label; ties go to the tied class with the higher
// mean posterior, then to the lower class id.
int majority_vote(const FramePredictions& p);

// Frame-level cross-entropy with every frame labeled `label`. When grad is
// non-null the parameter gradients are added into it.
double stream_loss(const StreamModel& m, const Matrix& x, int label, StreamModel* grad);
double fusion_loss(const FusionModel& m, std::span<const Matrix> inputs, int label,
                   FusionModel* grad);

// Mutable view over one parameter block.
struct ParamBlock {
  std::string name;
  std::span<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  ParamGroup group = ParamGroup::kDense;
};

// Blocks in a fixed order; two models of identical structure yield aligned
// lists, which is how gradients and optimizer state are matched to
// parameters. Normalization statistics are not included.
std::vector<ParamBlock> param_blocks(StreamParams& s, const std::string& prefix);
std::vector<ParamBlock> param_blocks(StreamModel& m);
std::vector<ParamBlock> param_blocks(FusionModel& m);

}  // namespace avf
