// avfusion/include/avfusion/sweep.h

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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avfusion/dataset.h"
#include "avfusion/eval.h"
#include "avfusion/model.h"

namespace avf {

// Source of additive acoustic noise for the test audio.
class NoiseSource {
 public:
  // Built-in babble synthesizer.
  NoiseSource() = default;
  // Random excerpts of a recording (looped when shorter than the request).
  explicit NoiseSource(Waveform recording);

  Waveform excerpt(std::size_t samples, int sample_rate, Rng& rng) const;

 private:
  std::optional<Waveform> recording_;
};

// Models under evaluation; absent entries are skipped.
struct SweepModels {
  std::optional<StreamModel> audio;
  std::optional<StreamModel> video;
  std::optional<FusionModel> fused;
};

struct SweepRow {
  std::optional<double> snr_db;  // empty for the clean condition
  std::string stream;            // audio | video | fused
  RunReport report;
};

// Evaluates every model on clean test audio and at each SNR level. Only the
// audio is corrupted; the video features are shared across conditions. The
// clean condition is evaluated once per run without mixing. Each of the
// `runs` repetitions draws fresh noise from Rng(seed).fork(run).
std::vector<SweepRow> snr_sweep(const SweepModels& models, std::span<const Utterance> test,
                                const NoiseSource& noise, std::span<const double> snr_levels,
                                std::size_t runs, std::uint64_t seed,
                                const FeatureConfig& features);

// Header `snr_db,stream,cr_mean,cr_std,uar_mean,uar_std,f1_mean,f1_std`;
// the clean condition is written as `clean`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void print_sweep_table(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace avf
