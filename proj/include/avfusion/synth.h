// avfusion/include/avfusion/synth.h

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

#include "avfusion/dataset.h"

namespace avf {

// Desk-scale audiovisual stand-in dataset. Every class owns a latent 2-D
// trajectory traversed over the utterance. The video renders it as a moving
// bright blob; the audio renders it as the path of two formants over a
// harmonic source. Subjects differ in background texture, blob size and
// brightness, fundamental frequency and formant scale.
struct SynthConfig {
  std::size_t classes = 3;
  std::size_t subjects = 9;
  std::size_t utterances_per_subject = 10;
  std::size_t train_subjects = 5;
  std::size_t validation_subjects = 2;
  std::size_t test_subjects = 2;
  std::size_t image_width = 12;
  std::size_t image_height = 12;
  double video_fps = 25.0;
  int sample_rate = 8000;
  std::size_t min_video_frames = 20;
  std::size_t max_video_frames = 30;
  // Fraction of the class trajectory that reaches each modality; 0 removes
  // all class information from that modality.
  double video_strength = 1.0;
  double audio_strength = 1.0;
  // SNR (dB) of the white background hiss in the clean audio; each utterance
  // draws its level within +-5 dB of this.
  double audio_floor_snr_db = 25.0;

  void validate() const;
};

Utterance synth_utterance(const SynthConfig& cfg, int label, int subject, std::uint64_t seed,
                          Rng& rng);

// Writes one directory per utterance plus manifest.csv under out_dir and
// returns the manifest. Subjects are assigned to train, validation and test
// in that order, so splits are subject-disjoint. Utterance k of subject s has
// label (k + s) mod classes.
DatasetManifest synth_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                              Rng& rng);

}  // namespace avf
