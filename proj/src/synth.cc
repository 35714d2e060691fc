// avfusion/src/synth.cc

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

#include "avfusion/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "avfusion/audio.h"
#include "avfusion/error.h"

namespace avf {

namespace {

struct SubjectTraits {
  std::vector<double> background;  // per pixel
  double blob_radius;
  double blob_gain;
  double centre_x, centre_y;  // pixel offsets of the trajectory centre
  double f0;                  // Hz
  double formant_scale;
};

SubjectTraits subject_traits(const SynthConfig& cfg, int subject, std::uint64_t seed) {
  Rng rng = Rng(seed).fork(0x5b7ec7 + static_cast<std::uint64_t>(subject));
  SubjectTraits s;
  const std::size_t w = cfg.image_width, h = cfg.image_height;
  // Smooth background: a few random low-frequency cosines around mid gray.
  s.background.assign(w * h, 0.0);
  const double base = rng.uniform(70.0, 110.0);
  for (int k = 0; k < 3; ++k) {
    const double fx = rng.uniform(0.3, 1.5), fy = rng.uniform(0.3, 1.5);
    const double amp = rng.uniform(5.0, 15.0), ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        s.background[y * w + x] +=
            amp * std::cos(2.0 * std::numbers::pi * (fx * x / w + fy * y / h) + ph);
  }
  for (double& v : s.background) v += base;
  s.blob_radius = rng.uniform(1.2, 2.0) * static_cast<double>(std::min(w, h)) / 12.0;
  s.blob_gain = rng.uniform(70.0, 110.0);
  s.centre_x = rng.uniform(-0.5, 0.5);
  s.centre_y = rng.uniform(-0.5, 0.5);
  s.f0 = rng.uniform(120.0, 160.0);
  s.formant_scale = rng.uniform(0.95, 1.05);
  return s;
}

// Position on the class trajectory at progress u in [0, 1], in [-1, 1]^2.
void trajectory(int label, std::size_t classes, double u, double& x, double& y) {
  const double angle = 2.0 * std::numbers::pi * label / static_cast<double>(classes);
  const double along = 2.0 * u - 1.0;
  x = along * std::cos(angle);
  y = along * std::sin(angle);
}

}  // namespace

void SynthConfig::validate() const {
  if (classes == 0) throw ArgumentError("synthetic dataset needs at least one class");
  if (subjects == 0 || utterances_per_subject == 0)
    throw ArgumentError("synthetic dataset needs subjects and utterances");
  if (train_subjects + validation_subjects + test_subjects != subjects)
    throw ArgumentError("split subject counts must add up to the subject count");
  if (train_subjects == 0) throw ArgumentError("synthetic dataset needs training subjects");
  if (image_width < 4 || image_height < 4) throw ArgumentError("images must be at least 4x4");
  if (min_video_frames < 2 || max_video_frames < min_video_frames)
    throw ArgumentError("invalid video frame range");
  if (!(video_fps > 0.0) || sample_rate < 8000)
    throw ArgumentError("invalid frame or sample rate");
  if (!std::isfinite(audio_floor_snr_db))
    throw ArgumentError("audio floor SNR must be finite");
  if (video_strength < 0.0 || video_strength > 1.0 || audio_strength < 0.0 ||
      audio_strength > 1.0)
    throw ArgumentError("modality strengths must lie in [0, 1]");
}

Utterance synth_utterance(const SynthConfig& cfg, int label, int subject, std::uint64_t seed,
                          Rng& rng) {
  const SubjectTraits traits = subject_traits(cfg, subject, seed);
  Utterance u;
  u.label = label;
  u.subject = subject;
  u.video_fps = cfg.video_fps;

  const std::size_t frames =
      cfg.min_video_frames + rng.below(cfg.max_video_frames - cfg.min_video_frames + 1);
  // Per-utterance speaking-rate warp shared by both modalities.
  const double warp = std::exp(rng.uniform(-0.3, 0.3));
  const double duration = static_cast<double>(frames) / cfg.video_fps;
  auto progress = [&](double t) { return std::pow(std::clamp(t / duration, 0.0, 1.0), warp); };

  const std::size_t w = cfg.image_width, h = cfg.image_height;
  const double reach = 0.35 * static_cast<double>(std::min(w, h));
  for (std::size_t f = 0; f < frames; ++f) {
    double tx, ty;
    trajectory(label, cfg.classes, progress((f + 0.5) / cfg.video_fps), tx, ty);
    const double cx = 0.5 * (w - 1) + traits.centre_x + cfg.video_strength * reach * tx;
    const double cy = 0.5 * (h - 1) + traits.centre_y + cfg.video_strength * reach * ty;
    GrayImage img{w, h, std::vector<std::uint8_t>(w * h)};
    const double r2 = 2.0 * traits.blob_radius * traits.blob_radius;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        double v = traits.background[y * w + x] + traits.blob_gain * std::exp(-d2 / r2) +
                   6.0 * rng.normal();
        img.pixels[y * w + x] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
      }
    }
    u.frames.push_back(std::move(img));
  }

  // Harmonic source at f0 plus a breathy partial grid, both shaped by two
  // moving formant resonances.
  const int fs = cfg.sample_rate;
  const auto samples = static_cast<std::size_t>(std::llround(duration * fs));
  u.audio.sample_rate = fs;
  u.audio.samples.assign(samples, 0.0);
  const double top = 0.45 * fs;
  const double jitter = rng.uniform(0.97, 1.03);
  struct Partial {
    double freq, gain, phase;
  };
  std::vector<Partial> partials;
  for (double f = traits.f0 * jitter; f < top; f += traits.f0 * jitter)
    partials.push_back({f, 1.0, rng.uniform(0.0, 2.0 * std::numbers::pi)});
  for (double f = 12.5; f < top; f += 25.0)
    partials.push_back({f, 0.5, rng.uniform(0.0, 2.0 * std::numbers::pi)});
  const double bandwidth = 150.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = static_cast<double>(n) / fs;
    double tx, ty;
    trajectory(label, cfg.classes, progress(t), tx, ty);
    const double f1 = traits.formant_scale * (550.0 + 300.0 * cfg.audio_strength * tx);
    const double f2 = traits.formant_scale * (1700.0 + 600.0 * cfg.audio_strength * ty);
    double s = 0.0;
    for (const Partial& p : partials) {
      const double a = (p.freq - f1) / bandwidth, b = (p.freq - f2) / bandwidth;
      const double g = 1.0 / (1.0 + a * a) + 0.7 / (1.0 + b * b);
      s += p.gain * g * std::sin(2.0 * std::numbers::pi * p.freq * t + p.phase);
    }
    u.audio.samples[n] = s;
  }
  // Background hiss at a per-utterance level around audio_floor_snr_db.
  Waveform hiss;
  hiss.sample_rate = fs;
  hiss.samples.resize(samples);
  for (double& v : hiss.samples) v = rng.normal();
  u.audio = mix_at_snr(u.audio, hiss, cfg.audio_floor_snr_db + rng.uniform(-5.0, 5.0));
  double peak = 0.0;
  for (double v : u.audio.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : u.audio.samples) v *= 0.5 / peak;
  return u;
}

DatasetManifest synth_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                              Rng& rng) {
  cfg.validate();
  const std::uint64_t seed = rng.next_u64();
  DatasetManifest manifest;
  for (std::size_t s = 0; s < cfg.subjects; ++s) {
    const Split split = s < cfg.train_subjects ? Split::kTrain
                        : s < cfg.train_subjects + cfg.validation_subjects ? Split::kValidation
                                                                           : Split::kTest;
    for (std::size_t k = 0; k < cfg.utterances_per_subject; ++k) {
      const int label = static_cast<int>((k + s) % cfg.classes);
      char name[64];
      std::snprintf(name, sizeof name, "s%02zu_u%02zu", s, k);
      Utterance u = synth_utterance(cfg, label, static_cast<int>(s), seed, rng);
      save_utterance(out_dir / name, u);
      manifest.entries.push_back({name, label, static_cast<int>(s), split});
    }
  }
  save_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace avf
