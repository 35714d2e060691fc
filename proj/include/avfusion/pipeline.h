// avfusion/include/avfusion/pipeline.h

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

#include <filesystem>
#include <string>
#include <vector>

#include "avfusion/checkpoint.h"
#include "avfusion/config.h"
#include "avfusion/sweep.h"

namespace avf {

enum class Modality { kAudio = 0, kVideo = 1 };

std::string modality_name(Modality m);
Modality parse_modality(const std::string& s);

// Output layout under RunConfig::out_dir:
//   data/           synthesized dataset (unless paths.data points elsewhere)
//   checkpoints/    pretrain_{audio,video}.ckpt, stream_{audio,video}.ckpt, fusion.ckpt
//   logs/           per-phase CSV logs
//   reports/        eval.csv
//   resolved_config.ini
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path pretrain_checkpoint(Modality m) const;
  std::filesystem::path stream_checkpoint(Modality m) const;
  std::filesystem::path fusion_checkpoint() const { return checkpoints() / "fusion.ckpt"; }
};

struct SynthSummary {
  std::size_t classes = 0;
  std::size_t subjects = 0;
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// Refuses (ConfigError) to write into a non-empty dataset directory unless
// force is set, in which case the directory is replaced.
SynthSummary cmd_synth(const RunConfig& cfg, bool force);

// RBM-pretrains both encoders on the training split.
void cmd_pretrain(const RunConfig& cfg);

// Needs the modality's pretrain checkpoint unless rbm.skip is set
// (DependencyError otherwise). Returns the best-epoch validation loss.
double cmd_train_stream(const RunConfig& cfg, Modality modality);

// Needs both stream checkpoints (DependencyError naming the missing phase).
double cmd_train_fusion(const RunConfig& cfg);

// Evaluates the requested streams on the test split at clean + each SNR
// level and writes reports/eval.csv.
std::vector<SweepRow> cmd_eval(const RunConfig& cfg);

// Writes the fully resolved configuration to <out>/resolved_config.ini.
void echo_config(const RunConfig& cfg);

// Loads every utterance of a split from the dataset directory.
std::vector<Utterance> load_split(const RunConfig& cfg, Split split);

}  // namespace avf
