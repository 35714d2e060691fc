// avfusion/src/sweep.cc

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

#include "avfusion/sweep.h"

#include <cstdio>
#include <map>
#include <ostream>

#include "avfusion/audio.h"
#include "avfusion/error.h"
#include "avfusion/training.h"

namespace avf {

NoiseSource::NoiseSource(Waveform recording) : recording_(std::move(recording)) {
  if (recording_->samples.empty()) throw ArgumentError("noise recording is empty");
}

Waveform NoiseSource::excerpt(std::size_t samples, int sample_rate, Rng& rng) const {
  if (!recording_) return synth_babble(samples, sample_rate, rng);
  if (recording_->sample_rate != sample_rate)
    throw DataError("noise recording is sampled at " + std::to_string(recording_->sample_rate) +
                    " Hz but the test audio at " + std::to_string(sample_rate) + " Hz");
  const auto& src = recording_->samples;
  const std::size_t offset = rng.below(src.size());
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) w.samples[i] = src[(offset + i) % src.size()];
  return w;
}

namespace {

struct Condition {
  std::vector<Sample> audio;
  std::vector<Sample> video;
  std::vector<Sample> fused;
};

// Mixing keeps the waveform length, so the video features are identical in
// every condition.
Condition make_condition(std::span<const Utterance> test, const FeatureConfig& features,
                         const std::vector<Waveform>* noisy) {
  Condition c;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Utterance& u = test[i];
    AvFeatures f = extract_features(u.frames, u.video_fps, noisy ? (*noisy)[i] : u.audio, features);
    c.audio.push_back({{f.audio}, u.label});
    c.video.push_back({{f.video}, u.label});
    c.fused.push_back({{f.audio, f.video}, u.label});
  }
  return c;
}

}  // namespace

std::vector<SweepRow> snr_sweep(const SweepModels& models, std::span<const Utterance> test,
                                const NoiseSource& noise, std::span<const double> snr_levels,
                                std::size_t runs, std::uint64_t seed,
                                const FeatureConfig& features) {
  if (test.empty()) throw ArgumentError("snr_sweep: empty test set");
  if (runs == 0) throw ArgumentError("snr_sweep: runs must be at least 1");

  // (condition index, stream) -> per-run metrics; condition 0 is clean.
  std::map<std::pair<std::size_t, std::string>, std::vector<Metrics>> results;
  auto score = [&](std::size_t cond, const Condition& c) {
    if (models.audio) results[{cond, "audio"}].push_back(metrics(evaluate(*models.audio, c.audio).confusion));
    if (models.video) results[{cond, "video"}].push_back(metrics(evaluate(*models.video, c.video).confusion));
    if (models.fused) results[{cond, "fused"}].push_back(metrics(evaluate(*models.fused, c.fused).confusion));
  };

  const Condition clean = make_condition(test, features, nullptr);
  for (std::size_t run = 0; run < runs; ++run) {
    score(0, clean);
    const Rng run_rng = Rng(seed).fork(run);
    for (std::size_t l = 0; l < snr_levels.size(); ++l) {
      Rng rng = run_rng.fork(l);
      std::vector<Waveform> noisy;
      for (const auto& u : test) {
        const Waveform n = noise.excerpt(u.audio.samples.size(), u.audio.sample_rate, rng);
        noisy.push_back(mix_at_snr(u.audio, n, snr_levels[l]));
      }
      score(l + 1, make_condition(test, features, &noisy));
    }
  }

  std::vector<SweepRow> rows;
  static const char* kStreams[] = {"audio", "video", "fused"};
  for (std::size_t cond = 0; cond <= snr_levels.size(); ++cond) {
    for (const char* s : kStreams) {
      auto it = results.find({cond, s});
      if (it == results.end()) continue;
      SweepRow row;
      if (cond > 0) row.snr_db = snr_levels[cond - 1];
      row.stream = s;
      row.report = aggregate_runs(it->second);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string snr_label(const SweepRow& r) {
  if (!r.snr_db) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", *r.snr_db);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "snr_db,stream,cr_mean,cr_std,uar_mean,uar_std,f1_mean,f1_std\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", snr_label(r).c_str(),
                  r.stream.c_str(), r.report.cr.mean, r.report.cr.stddev, r.report.uar.mean,
                  r.report.uar.stddev, r.report.mean_f1.mean, r.report.mean_f1.stddev);
    os << buf;
  }
}

void print_sweep_table(std::ostream& os, const std::vector<SweepRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-6s %-16s %-16s %-16s\n", "SNR", "stream", "CR",
                "UAR", "mean F1");
  os << buf;
  for (const auto& r : rows) {
    auto cell = [](const Summary& s) {
      char c[32];
      std::snprintf(c, sizeof c, "%5.1f (%4.1f)", 100.0 * s.mean, 100.0 * s.stddev);
      return std::string(c);
    };
    std::snprintf(buf, sizeof buf, "%-8s %-6s %-16s %-16s %-16s\n", snr_label(r).c_str(),
                  r.stream.c_str(), cell(r.report.cr).c_str(), cell(r.report.uar).c_str(),
                  cell(r.report.mean_f1).c_str());
    os << buf;
  }
}

}  // namespace avf
