// avfusion/include/avfusion/config.h

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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "avfusion/dataset.h"
#include "avfusion/layers.h"
#include "avfusion/rbm.h"
#include "avfusion/synth.h"
#include "avfusion/training.h"

namespace avf {

// Fully resolved configuration of a run. Serialized as an INI document with
// sections [run], [paths], [data], [features], [model], [rbm], [train] and
// [eval].
struct RunConfig {
  std::string preset = "desk";
  std::uint64_t seed = 1;
  std::size_t runs = 10;

  std::filesystem::path out_dir = "run";
  // Dataset directory holding manifest.csv; empty means <out>/data.
  std::filesystem::path data_dir;

  SynthConfig synth;
  FeatureConfig features;
  DeltaConfig delta;

  std::vector<std::size_t> encoder_hidden = {64, 32, 16};
  std::size_t bottleneck = 8;
  std::size_t stream_hidden = 16;
  std::size_t fusion_hidden = 16;

  CdConfig rbm;
  bool skip_pretrain = false;

  TrainConfig train;  // learning_rate unused; see lr_stream / lr_fusion
  double lr_stream = kStreamLearningRate;
  double lr_fusion = kFusionLearningRate;

  std::vector<double> snr_levels = {20, 15, 10, 5, 0};
  std::vector<std::string> eval_streams = {"audio", "video", "fused"};
  // WAV file used as the noise source; empty selects the built-in babble.
  std::filesystem::path noise_path;

  static RunConfig preset_config(const std::string& name);

  std::vector<std::size_t> encoder_sizes() const;
  std::filesystem::path resolved_data_dir() const;
  TrainConfig stream_train_config() const;
  TrainConfig fusion_train_config() const;

  // Throws ConfigError on any inconsistency; runs before any data is touched.
  void validate() const;
};

// Applies `section.key = value` to cfg; unknown keys are a ConfigError.
void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

// Reads an INI file. The [run] preset key (if any) selects the base values;
// every other key then overrides them.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& is);
void write_config(std::ostream& os, const RunConfig& cfg);

}  // namespace avf
