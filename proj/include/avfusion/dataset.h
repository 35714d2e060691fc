// avfusion/include/avfusion/dataset.h

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
#include <iosfwd>
#include <string>
#include <vector>

#include "avfusion/audio.h"
#include "avfusion/tensor.h"
#include "avfusion/video.h"

namespace avf {

enum class Split { kTrain, kValidation, kTest };

std::string split_name(Split s);
Split parse_split(const std::string& s);

// One labeled audiovisual sample: pre-cropped grayscale mouth frames plus the
// synchronized waveform.
struct Utterance {
  std::vector<GrayImage> frames;
  double video_fps = 25.0;
  Waveform audio;
  int label = 0;
  int subject = 0;
};

struct ManifestEntry {
  std::string path;  // utterance directory, relative to the manifest
  int label = 0;
  int subject = 0;
  Split split = Split::kTrain;

  bool operator==(const ManifestEntry&) const = default;
};

// CSV with header `path,label,subject,split`.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> of_split(Split s) const;
  // Throws DataError when a subject appears in more than one split.
  void check_subject_disjoint() const;
  std::size_t classes() const;
};

void write_manifest(std::ostream& os, const DatasetManifest& m);
DatasetManifest read_manifest(std::istream& is);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Utterance directory layout: frame_0000.pgm, frame_0001.pgm, ... and
// audio.wav.
void save_utterance(const std::filesystem::path& dir, const Utterance& u);
Utterance load_utterance(const std::filesystem::path& dir, double video_fps);

struct FeatureConfig {
  SpectrogramConfig spectrogram;
  double target_fps = 100.0;
};

// Audio and video features of one utterance at the common frame rate.
struct AvFeatures {
  Matrix audio;  // T x spectrogram bins
  Matrix video;  // T x (H*W), mean-image subtracted, linearly upsampled
};

// Spectrogram of the waveform and mean-subtracted, upsampled frames, both
// truncated to the shorter length. A gap larger than one video frame (plus
// one) raises SyncError.
AvFeatures extract_features(const Utterance& u, const FeatureConfig& cfg);
AvFeatures extract_features(const std::vector<GrayImage>& frames, double video_fps,
                            const Waveform& audio, const FeatureConfig& cfg);

// Flat binary feature matrix: u64 rows, u64 cols (little-endian), then
// rows*cols f64 values row-major. A short file raises FormatError.
void write_feature_matrix(std::ostream& os, const Matrix& m);
Matrix read_feature_matrix(std::istream& is);
void save_feature_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_feature_matrix(const std::filesystem::path& path);

}  // namespace avf
