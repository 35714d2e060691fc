// avfusion/include/avfusion/audio.h

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
#include <vector>

#include "avfusion/tensor.h"

namespace avf {

// Mono audio; samples are in [-1, 1) (16-bit PCM divided by 32768).
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// RIFF/WAVE, PCM 16-bit mono. Samples are clipped to the int16 range on write.
void write_wav(const std::filesystem::path& path, const Waveform& w);
Waveform read_wav(const std::filesystem::path& path);

struct SpectrogramConfig {
  double window_ms = 40.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 0;  // 0: next power of two >= window length

  std::size_t window_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
  std::size_t resolved_fft_size(int sample_rate) const;
  std::size_t bins(int sample_rate) const { return resolved_fft_size(sample_rate) / 2 + 1; }
  double frame_rate(int sample_rate) const {
    return static_cast<double>(sample_rate) / static_cast<double>(hop_samples(sample_rate));
  }
};

inline std::size_t spectrogram_frames(std::size_t samples, std::size_t window, std::size_t hop) {
  return samples < window ? 0 : (samples - window) / hop + 1;
}

// log(1 + |DFT|) of Hann-windowed frames; frame t covers samples
// [t*hop, t*hop + window). Rows are frames, columns the fft_size/2 + 1 bins.
Matrix spectrogram(const Waveform& w, const SpectrogramConfig& cfg);

double mean_power(std::span<const double> x);

// clean + alpha * noise with alpha chosen so that
// 10 log10(P_clean / P(alpha * noise)) == snr_db over the clean length. The
// noise is repeated if it is shorter than the clean signal.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db);

// Babble-like noise: sum of `sources` band-passed noise sources in the speech
// band, each amplitude-modulated at a syllabic rate. Unit mean power.
Waveform synth_babble(std::size_t samples, int sample_rate, Rng& rng, std::size_t sources = 8);

}  // namespace avf
