// avfusion/src/dataset.cc

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

#include "avfusion/dataset.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "avfusion/error.h"

namespace avf {

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split '" + s + "'");
}

std::vector<ManifestEntry> DatasetManifest::of_split(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(e);
  return out;
}

void DatasetManifest::check_subject_disjoint() const {
  std::map<int, Split> seen;
  for (const auto& e : entries) {
    auto [it, inserted] = seen.emplace(e.subject, e.split);
    if (!inserted && it->second != e.split)
      throw DataError("subject " + std::to_string(e.subject) + " appears in both " +
                      split_name(it->second) + " and " + split_name(e.split));
  }
}

std::size_t DatasetManifest::classes() const {
  int top = -1;
  for (const auto& e : entries) top = std::max(top, e.label);
  return static_cast<std::size_t>(top + 1);
}

void write_manifest(std::ostream& os, const DatasetManifest& m) {
  os << "path,label,subject,split\n";
  for (const auto& e : m.entries)
    os << e.path << ',' << e.label << ',' << e.subject << ',' << split_name(e.split) << '\n';
}

DatasetManifest read_manifest(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("manifest is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "path,label,subject,split")
    throw DataError("manifest header must be 'path,label,subject,split', got '" + line + "'");
  DatasetManifest m;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4)
      throw DataError("manifest line " + std::to_string(lineno) + ": expected 4 fields");
    ManifestEntry e;
    e.path = cells[0];
    try {
      e.label = std::stoi(cells[1]);
      e.subject = std::stoi(cells[2]);
    } catch (const std::exception&) {
      throw DataError("manifest line " + std::to_string(lineno) + ": bad label or subject");
    }
    if (e.label < 0) throw DataError("manifest line " + std::to_string(lineno) + ": negative label");
    e.split = parse_split(cells[3]);
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_manifest(out, m);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  return read_manifest(in);
}

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.pgm", i);
  return buf;
}

}  // namespace

void save_utterance(const std::filesystem::path& dir, const Utterance& u) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t i = 0; i < u.frames.size(); ++i) write_pgm(dir / frame_name(i), u.frames[i]);
  write_wav(dir / "audio.wav", u.audio);
}

Utterance load_utterance(const std::filesystem::path& dir, double video_fps) {
  Utterance u;
  u.video_fps = video_fps;
  for (std::size_t i = 0;; ++i) {
    const auto p = dir / frame_name(i);
    if (!std::filesystem::exists(p)) break;
    u.frames.push_back(read_pgm(p));
  }
  if (u.frames.empty()) throw DataError("no frames in '" + dir.string() + "'");
  u.audio = read_wav(dir / "audio.wav");
  return u;
}

AvFeatures extract_features(const Utterance& u, const FeatureConfig& cfg) {
  return extract_features(u.frames, u.video_fps, u.audio, cfg);
}

AvFeatures extract_features(const std::vector<GrayImage>& frames, double video_fps,
                            const Waveform& audio, const FeatureConfig& cfg) {
  AvFeatures f;
  f.audio = spectrogram(audio, cfg.spectrogram);
  const double audio_fps = cfg.spectrogram.frame_rate(audio.sample_rate);
  if (std::abs(audio_fps - cfg.target_fps) > 1e-9)
    throw SyncError("spectrogram frame rate " + std::to_string(audio_fps) +
                    " fps differs from the target " + std::to_string(cfg.target_fps) + " fps");
  f.video = upsample_linear(mean_image_subtract(frames), video_fps, cfg.target_fps);

  const std::size_t ta = f.audio.rows();
  const std::size_t tv = f.video.rows();
  const std::size_t gap = ta > tv ? ta - tv : tv - ta;
  const auto slack = static_cast<std::size_t>(std::ceil(cfg.target_fps / video_fps)) + 1;
  if (gap > slack)
    throw SyncError("audio has " + std::to_string(ta) + " frames but video " +
                    std::to_string(tv) + " after upsampling");
  const std::size_t t = std::min(ta, tv);
  if (ta > t) f.audio = row_block(f.audio, 0, t);
  if (tv > t) f.video = row_block(f.video, 0, t);
  return f;
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("feature file: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

}  // namespace

void write_feature_matrix(std::ostream& os, const Matrix& m) {
  put_u64(os, m.rows());
  put_u64(os, m.cols());
  for (double x : m.values()) put_u64(os, std::bit_cast<std::uint64_t>(x));
}

Matrix read_feature_matrix(std::istream& is) {
  const std::uint64_t rows = get_u64(is);
  const std::uint64_t cols = get_u64(is);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols)
    throw FormatError("feature file: implausible shape " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  Matrix m(rows, cols);
  for (double& x : m.values()) {
    try {
      x = std::bit_cast<double>(get_u64(is));
    } catch (const FormatError&) {
      throw FormatError("feature file: truncated data");
    }
  }
  return m;
}

void save_feature_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  write_feature_matrix(os, m);
  if (!os) throw IoError("write failed: " + path.string());
}

Matrix load_feature_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_feature_matrix(is);
}

}  // namespace avf
