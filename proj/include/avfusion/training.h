// avfusion/include/avfusion/training.h

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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "avfusion/eval.h"
#include "avfusion/model.h"

namespace avf {

struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Vector> m;  // first moments, one per parameter block
  std::vector<Vector> v;  // second moments
};

// theta -= lr * m_hat / (sqrt(v_hat) + eps) for every block. Moments are
// allocated on the first call. A non-finite gradient throws TrainingError
// naming the block, before any parameter is modified.
void adam_step(AdamState& state, const std::vector<ParamBlock>& params,
               const std::vector<ParamBlock>& grads);

// Rescales every LSTM gradient block whose L2 norm exceeds threshold to norm
// threshold. Dense blocks are never touched. Returns the number of blocks
// rescaled.
std::size_t clip_lstm_gradients(const std::vector<ParamBlock>& grads, double threshold);

class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t delay) : delay_(delay) {}

  // Records the validation loss of a finished epoch; true when it is a new
  // best.
  bool observe(std::size_t epoch, double validation_loss);
  bool should_stop() const { return since_improvement_ >= delay_; }

  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  std::size_t epochs_since_improvement() const { return since_improvement_; }

 private:
  std::size_t delay_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  bool has_best_ = false;
  std::size_t since_improvement_ = 0;
};

struct EpochLoop {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  bool stopped_early = false;
};

// Calls run_epoch(epoch) for epoch = 1, 2, ... which returns the validation
// loss; on_best(epoch) fires on every improvement. Stops after max_epochs or
// once `delay` epochs pass without improvement.
EpochLoop run_epoch_loop(std::size_t max_epochs, std::size_t delay,
                         const std::function<double(std::size_t)>& run_epoch,
                         const std::function<void(std::size_t)>& on_best);

struct TrainConfig {
  std::size_t batch_utterances = 10;
  double learning_rate = 0.0003;
  std::size_t early_stop_delay = 5;
  double clip_threshold = 5.0;
  std::size_t max_epochs = 50;
};

inline constexpr double kStreamLearningRate = 0.0003;
inline constexpr double kFusionLearningRate = 0.0001;

// One utterance after feature extraction: one T x D matrix per stream
// (a single entry for stream training) and the utterance class.
struct Sample {
  std::vector<Matrix> inputs;
  int label = 0;
};

struct LogRow {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  Metrics metrics;
};

void write_log_csv(std::ostream& os, const std::vector<LogRow>& rows);

struct Evaluation {
  double loss = 0.0;  // mean over utterances of per-frame mean cross-entropy
  ConfusionMatrix confusion;
  std::vector<int> predictions;  // majority-vote label per sample
};

Evaluation evaluate(const StreamModel& m, const std::vector<Sample>& samples);
Evaluation evaluate(const FusionModel& m, const std::vector<Sample>& samples);

template <class Model>
struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<LogRow> log;
  EpochLoop loop;
};

// Adam with mini-batches of cfg.batch_utterances shuffled utterances, batch
// loss the mean of per-utterance frame-mean cross-entropies, LSTM gradient
// clipping, early stopping on validation loss.
TrainResult<StreamModel> train_stream(StreamModel init, const std::vector<Sample>& train,
                                      const std::vector<Sample>& validation,
                                      const TrainConfig& cfg, Rng& rng);
TrainResult<FusionModel> train_fusion(FusionModel init, const std::vector<Sample>& train,
                                      const std::vector<Sample>& validation,
                                      const TrainConfig& cfg, Rng& rng);

}  // namespace avf
