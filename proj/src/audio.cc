// avfusion/src/audio.cc

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

#include "avfusion/audio.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <string>

#include "avfusion/error.h"

namespace avf {

namespace {

void put_u16(std::vector<char>& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::vector<char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::vector<char>& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

std::uint16_t get_u16(const std::vector<char>& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw ArgumentError("write_wav: invalid sample rate");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<char> b;
  b.reserve(44 + data_bytes);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put_u32(b, 36 + data_bytes);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(b, 16);
  put_u16(b, 1);  // PCM
  put_u16(b, 1);  // mono
  put_u32(b, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(b, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(b, 2);
  put_u16(b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put_u32(b, data_bytes);
  for (double s : w.samples) {
    const double scaled = std::round(s * 32768.0);
    const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(b, static_cast<std::uint16_t>(q));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::vector<char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    throw DataError("'" + name + "' is not a RIFF/WAVE file");
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (size > b.size() - body) throw DataError("'" + name + "': chunk overruns the file");
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("'" + name + "': short fmt chunk");
      const std::uint16_t format = get_u16(b, body);
      const std::uint16_t channels = get_u16(b, body + 2);
      const std::uint16_t bits = get_u16(b, body + 14);
      if (format != 1 || bits != 16 || channels != 1)
        throw DataError("'" + name + "': only 16-bit mono PCM is supported");
      w.sample_rate = static_cast<int>(get_u32(b, body + 4));
      have_fmt = true;
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      if (!have_fmt) throw DataError("'" + name + "': data chunk before fmt chunk");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] = static_cast<std::int16_t>(get_u16(b, body + 2 * i)) / 32768.0;
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw DataError("'" + name + "' has no data chunk");
}

std::size_t SpectrogramConfig::window_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(sample_rate * window_ms / 1000.0));
}

std::size_t SpectrogramConfig::hop_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(sample_rate * hop_ms / 1000.0));
}

std::size_t SpectrogramConfig::resolved_fft_size(int sample_rate) const {
  if (fft_size != 0) return fft_size;
  std::size_t n = 1;
  while (n < window_samples(sample_rate)) n <<= 1;
  return n;
}

Matrix spectrogram(const Waveform& w, const SpectrogramConfig& cfg) {
  if (w.sample_rate < 8000)
    throw DataError("spectrogram needs a sample rate of at least 8 kHz, got " +
                    std::to_string(w.sample_rate));
  const std::size_t window = cfg.window_samples(w.sample_rate);
  const std::size_t hop = cfg.hop_samples(w.sample_rate);
  const std::size_t n_fft = cfg.resolved_fft_size(w.sample_rate);
  if (hop == 0 || hop > window) throw ArgumentError("spectrogram hop must be in (0, window]");
  if (n_fft < window) throw ArgumentError("fft size smaller than the window");
  if (w.samples.size() < window)
    throw DataError("waveform of " + std::to_string(w.samples.size()) +
                    " samples is shorter than one " + std::to_string(window) +
                    "-sample window");
  const std::size_t frames = spectrogram_frames(w.samples.size(), window, hop);
  const std::size_t bins = n_fft / 2 + 1;

  // Periodic Hann window.
  std::vector<double> hann(window);
  for (std::size_t n = 0; n < window; ++n)
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                   static_cast<double>(window));

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
      fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in.get(), out.get(), FFTW_ESTIMATE));

  Matrix spec(frames, bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = w.samples.data() + t * hop;
    for (std::size_t n = 0; n < window; ++n) in.get()[n] = src[n] * hann[n];
    std::fill(in.get() + window, in.get() + n_fft, 0.0);
    fftw_execute(plan.get());
    auto row = spec.row(t);
    for (std::size_t k = 0; k < bins; ++k)
      row[k] = std::log1p(std::hypot(out.get()[k][0], out.get()[k][1]));
  }
  return spec;
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  if (noise.samples.empty()) throw ArgumentError("mix_at_snr: empty noise");
  if (!std::isfinite(snr_db)) throw ArgumentError("mix_at_snr: non-finite SNR");
  const std::size_t n = clean.samples.size();
  std::vector<double> segment(n);
  for (std::size_t i = 0; i < n; ++i) segment[i] = noise.samples[i % noise.samples.size()];
  const double p_clean = mean_power(clean.samples);
  const double p_noise = mean_power(segment);
  if (!(p_clean > 0.0)) throw ArgumentError("mix_at_snr: clean signal has zero power");
  if (!(p_noise > 0.0)) throw ArgumentError("mix_at_snr: noise has zero power");
  const double alpha = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  Waveform out = clean;
  for (std::size_t i = 0; i < n; ++i) out.samples[i] += alpha * segment[i];
  return out;
}

Waveform synth_babble(std::size_t samples, int sample_rate, Rng& rng, std::size_t sources) {
  if (sample_rate <= 0) throw ArgumentError("synth_babble: invalid sample rate");
  if (sources == 0) throw ArgumentError("synth_babble: needs at least one source");
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(samples, 0.0);
  const double fs = static_cast<double>(sample_rate);
  const double top = std::min(3400.0, 0.45 * fs);
  for (std::size_t s = 0; s < sources; ++s) {
    // Resonant band-pass (constant 0 dB peak gain) around a random centre.
    const double centre = rng.uniform(300.0, top);
    const double q = rng.uniform(1.5, 4.0);
    const double w0 = 2.0 * std::numbers::pi * centre / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    const double b0 = alpha / a0, b2 = -alpha / a0;
    const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
    const double rate = rng.uniform(2.0, 6.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = rng.normal();
      const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = x;
      y2 = y1;
      y1 = y;
      const double t = static_cast<double>(i) / fs;
      const double envelope =
          std::pow(0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * rate * t + phase), 2.0);
      w.samples[i] += envelope * y;
    }
  }
  const double p = mean_power(w.samples);
  if (p > 0.0) {
    const double scale = 1.0 / std::sqrt(p);
    for (double& v : w.samples) v *= scale;
  }
  return w;
}

}  // namespace avf
