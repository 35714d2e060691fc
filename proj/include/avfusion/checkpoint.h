// avfusion/include/avfusion/checkpoint.h

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
#include <utility>
#include <vector>

#include "avfusion/model.h"

namespace avf {

// Versioned binary checkpoint:
//
//   "AVFUSION"                    8-byte magic
//   u32 version                   kCheckpointVersion
//   str kind                      "encoder" | "stream" | "fusion"
//   u32 n, n x (str key, str value)          metadata
//   u32 m, m x (str name, u64 rows, u64 cols) tensor manifest
//   tensor data in manifest order, f64 little-endian, row-major
//   u64 FNV-1a 64 of every preceding byte
//
// str is a u32 byte length followed by the bytes. All integers little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Matrix value;

  bool operator==(const NamedTensor&) const = default;
};

struct Checkpoint {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<NamedTensor> tensors;

  const std::string& get_meta(const std::string& key) const;
  const Matrix& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;

  bool operator==(const Checkpoint&) const = default;
};

std::vector<char> encode_checkpoint(const Checkpoint& ckpt);
// ChecksumError on truncation or corruption, FormatError on a bad magic or
// an unsupported version.
Checkpoint decode_checkpoint(const std::vector<char>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Encoder produced by RBM pretraining, with the normalization it was trained
// under.
struct PretrainedEncoder {
  Vector input_mean;
  Vector input_stddev;
  std::vector<DenseLayer> layers;
};

Checkpoint to_checkpoint(const PretrainedEncoder& e);
Checkpoint to_checkpoint(const StreamModel& m);
Checkpoint to_checkpoint(const FusionModel& m);

PretrainedEncoder encoder_from_checkpoint(const Checkpoint& ckpt);
StreamModel stream_model_from_checkpoint(const Checkpoint& ckpt);
FusionModel fusion_model_from_checkpoint(const Checkpoint& ckpt);
// The stream of a single-stream checkpoint, or stream `index` of a fusion
// checkpoint.
StreamParams stream_from_checkpoint(const Checkpoint& ckpt, std::size_t index = 0);

}  // namespace avf
