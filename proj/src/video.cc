// avfusion/src/video.cc

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

#include "avfusion/video.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "avfusion/error.h"

namespace avf {

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  if (img.pixels.size() != img.width * img.height)
    throw ArgumentError("write_pgm: pixel buffer does not match the image size");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::size_t header_number(const std::vector<char>& b, std::size_t& pos, const std::string& name) {
  for (;;) {
    while (pos < b.size() && std::isspace(static_cast<unsigned char>(b[pos]))) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  std::size_t value = 0;
  while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos])))
    value = value * 10 + static_cast<std::size_t>(b[pos++] - '0');
  if (pos == start) throw DataError("'" + name + "': malformed PGM header");
  return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::vector<char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (b.size() < 2 || b[0] != 'P' || b[1] != '5') throw DataError("'" + name + "' is not a P5 PGM");
  std::size_t pos = 2;
  GrayImage img;
  img.width = header_number(b, pos, name);
  img.height = header_number(b, pos, name);
  const std::size_t maxval = header_number(b, pos, name);
  if (maxval != 255) throw DataError("'" + name + "': only 8-bit PGM is supported");
  ++pos;  // single whitespace before the raster
  const std::size_t n = img.width * img.height;
  if (b.size() < pos + n) throw DataError("'" + name + "': truncated raster");
  img.pixels.assign(b.begin() + static_cast<std::ptrdiff_t>(pos),
                    b.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

Matrix mean_image_subtract(std::span<const GrayImage> frames) {
  if (frames.empty()) throw ArgumentError("mean_image_subtract: no frames");
  const std::size_t n = frames[0].width * frames[0].height;
  Matrix out(frames.size(), n);
  Vector mean(n, 0.0);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& f = frames[t];
    if (f.width != frames[0].width || f.height != frames[0].height || f.pixels.size() != n)
      throw DataError("frame " + std::to_string(t) + " size differs within the utterance");
    auto row = out.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = f.pixels[i];
      mean[i] += f.pixels[i];
    }
  }
  for (double& m : mean) m /= static_cast<double>(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) axpy(-1.0, mean, out.row(t));
  return out;
}

Matrix upsample_linear(const Matrix& x, double in_fps, double out_fps) {
  if (!(in_fps > 0.0) || !(out_fps >= in_fps))
    throw ArgumentError("upsample_linear needs out_fps >= in_fps > 0");
  if (x.rows() == 0) throw ArgumentError("upsample_linear: empty sequence");
  if (x.rows() == 1) return x;
  const double ratio = out_fps / in_fps;
  // Guard against (T-1)*ratio landing just below an integer.
  const auto count =
      static_cast<std::size_t>(std::floor(static_cast<double>(x.rows() - 1) * ratio + 1e-9)) + 1;
  Matrix y(count, x.cols());
  const std::size_t last = x.rows() - 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = static_cast<double>(k) / ratio;
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= last) {
      auto src = x.row(last);
      std::copy(src.begin(), src.end(), y.row(k).begin());
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    auto a = x.row(i0);
    auto b = x.row(i0 + 1);
    auto out = y.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j] + frac * (b[j] - a[j]);
  }
  return y;
}

}  // namespace avf
