// avfusion/src/training.cc

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

#include "avfusion/training.h"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "avfusion/error.h"

namespace avf {

void adam_step(AdamState& state, const std::vector<ParamBlock>& params,
               const std::vector<ParamBlock>& grads) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameter blocks but " +
                     std::to_string(grads.size()) + " gradient blocks");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].values.size() != grads[k].values.size())
      throw ShapeError("adam_step: gradient shape mismatch for '" + params[k].name + "'");
    if (!all_finite(grads[k].values))
      throw TrainingError("non-finite gradient in parameter block '" + params[k].name + "'");
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.values.size(), 0.0);
      state.v.emplace_back(p.values.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state mismatch");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].values;
    auto g = grads[k].values;
    Vector& m = state.m[k];
    Vector& v = state.v[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      theta[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

std::size_t clip_lstm_gradients(const std::vector<ParamBlock>& grads, double threshold) {
  if (!(threshold > 0.0)) throw ArgumentError("clip threshold must be positive");
  std::size_t clipped = 0;
  for (const auto& g : grads) {
    if (g.group != ParamGroup::kLstm) continue;
    const double norm = l2_norm(g.values);
    if (norm > threshold) {
      const double scale = threshold / norm;
      for (double& v : g.values) v *= scale;
      ++clipped;
    }
  }
  return clipped;
}

bool EarlyStopping::observe(std::size_t epoch, double validation_loss) {
  if (!has_best_ || validation_loss < best_loss_) {
    has_best_ = true;
    best_loss_ = validation_loss;
    best_epoch_ = epoch;
    since_improvement_ = 0;
    return true;
  }
  ++since_improvement_;
  return false;
}

EpochLoop run_epoch_loop(std::size_t max_epochs, std::size_t delay,
                         const std::function<double(std::size_t)>& run_epoch,
                         const std::function<void(std::size_t)>& on_best) {
  EarlyStopping stopper(delay);
  EpochLoop loop;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const double loss = run_epoch(epoch);
    loop.epochs_run = epoch;
    if (stopper.observe(epoch, loss)) on_best(epoch);
    if (stopper.should_stop()) {
      loop.stopped_early = true;
      break;
    }
  }
  loop.best_epoch = stopper.best_epoch();
  loop.best_loss = stopper.best_loss();
  return loop;
}

void write_log_csv(std::ostream& os, const std::vector<LogRow>& rows) {
  os << "epoch,split,loss,CR,UAR,meanF1\n";
  const auto old_precision = os.precision(10);
  for (const auto& r : rows)
    os << r.epoch << ',' << r.split << ',' << r.loss << ',' << r.metrics.cr << ','
       << r.metrics.uar << ',' << r.metrics.mean_f1 << '\n';
  os.precision(old_precision);
}

namespace {

double sample_loss(const StreamModel& m, const Sample& s, StreamModel* grad) {
  return stream_loss(m, s.inputs.at(0), s.label, grad);
}

double sample_loss(const FusionModel& m, const Sample& s, FusionModel* grad) {
  return fusion_loss(m, s.inputs, s.label, grad);
}

FramePredictions sample_predict(const StreamModel& m, const Sample& s) {
  return predict(m, s.inputs.at(0));
}

FramePredictions sample_predict(const FusionModel& m, const Sample& s) {
  return fusion_forward(m, s.inputs);
}

template <class Model>
Evaluation evaluate_impl(const Model& m, const std::vector<Sample>& samples) {
  if (samples.empty()) throw ArgumentError("evaluation set is empty");
  Evaluation e{0.0, ConfusionMatrix(m.classes()), {}};
  for (const auto& s : samples) {
    FramePredictions p = sample_predict(m, s);
    double loss = 0.0;
    for (std::size_t t = 0; t < p.posteriors.rows(); ++t)
      loss -= std::log(std::max(p.posteriors(t, static_cast<std::size_t>(s.label)), 1e-300));
    e.loss += loss / static_cast<double>(p.posteriors.rows());
    const int predicted = majority_vote(p);
    e.confusion.add(s.label, predicted);
    e.predictions.push_back(predicted);
  }
  e.loss /= static_cast<double>(samples.size());
  return e;
}

template <class Model>
TrainResult<Model> fit(Model init, const std::vector<Sample>& train,
                       const std::vector<Sample>& validation, const TrainConfig& cfg, Rng& rng) {
  if (train.empty()) throw ArgumentError("training split is empty");
  if (validation.empty()) throw ArgumentError("validation split is empty");
  if (cfg.batch_utterances == 0) throw ArgumentError("batch size must be positive");

  TrainResult<Model> result{init, {}, {}};
  if (cfg.max_epochs == 0) return result;

  Model model = std::move(init);
  AdamState adam;
  adam.learning_rate = cfg.learning_rate;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  auto run_epoch = [&](std::size_t epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_utterances) {
      const std::size_t count = std::min(cfg.batch_utterances, order.size() - start);
      Model grad = model.zeros_like();
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < count; ++k)
        batch_loss += sample_loss(model, train[order[start + k]], &grad);
      if (!std::isfinite(batch_loss))
        throw TrainingError("training diverged: non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(start / cfg.batch_utterances + 1));
      const auto grad_blocks = param_blocks(grad);
      const double inv = 1.0 / static_cast<double>(count);
      for (const auto& b : grad_blocks)
        for (double& v : b.values) v *= inv;
      clip_lstm_gradients(grad_blocks, cfg.clip_threshold);
      adam_step(adam, param_blocks(model), grad_blocks);
    }
    const Evaluation tr = evaluate_impl(model, train);
    const Evaluation va = evaluate_impl(model, validation);
    if (!std::isfinite(va.loss) || !std::isfinite(tr.loss))
      throw TrainingError("training diverged: non-finite loss after epoch " +
                          std::to_string(epoch));
    result.log.push_back({epoch, "train", tr.loss, metrics(tr.confusion)});
    result.log.push_back({epoch, "validation", va.loss, metrics(va.confusion)});
    return va.loss;
  };
  result.loop = run_epoch_loop(cfg.max_epochs, cfg.early_stop_delay, run_epoch,
                               [&](std::size_t) { result.model = model; });
  return result;
}

void check_stream_inputs(const StreamParams& s, const std::vector<Sample>& samples,
                         std::size_t slot) {
  for (const auto& sample : samples) {
    if (sample.inputs.size() <= slot)
      throw ConfigError("sample lacks input for stream " + std::to_string(slot));
    if (sample.inputs[slot].cols() != s.input_dim())
      throw ConfigError("stream " + std::to_string(slot) + " expects " +
                        std::to_string(s.input_dim()) + "-dim input but data has " +
                        std::to_string(sample.inputs[slot].cols()));
  }
}

}  // namespace

Evaluation evaluate(const StreamModel& m, const std::vector<Sample>& samples) {
  return evaluate_impl(m, samples);
}

Evaluation evaluate(const FusionModel& m, const std::vector<Sample>& samples) {
  return evaluate_impl(m, samples);
}

TrainResult<StreamModel> train_stream(StreamModel init, const std::vector<Sample>& train,
                                      const std::vector<Sample>& validation,
                                      const TrainConfig& cfg, Rng& rng) {
  init.stream.validate();
  check_stream_inputs(init.stream, train, 0);
  check_stream_inputs(init.stream, validation, 0);
  return fit(std::move(init), train, validation, cfg, rng);
}

TrainResult<FusionModel> train_fusion(FusionModel init, const std::vector<Sample>& train,
                                      const std::vector<Sample>& validation,
                                      const TrainConfig& cfg, Rng& rng) {
  try {
    init.validate();
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t k = 0; k < init.streams.size(); ++k) {
    check_stream_inputs(init.streams[k], train, k);
    check_stream_inputs(init.streams[k], validation, k);
  }
  return fit(std::move(init), train, validation, cfg, rng);
}

}  // namespace avf
