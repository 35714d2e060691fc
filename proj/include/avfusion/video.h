// avfusion/include/avfusion/video.h

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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "avfusion/tensor.h"

namespace avf {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, height x width

  bool operator==(const GrayImage&) const = default;
};

// Binary PGM (P5), maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

// One row per frame holding the frame's pixels minus the per-pixel mean over
// the utterance. All frames must share one size.
Matrix mean_image_subtract(std::span<const GrayImage> frames);

// Resamples a sequence sampled at in_fps to out_fps by linear interpolation.
// Output frame k sits at time k / out_fps for k = 0 .. floor((T-1) out/in);
// a single frame is returned unchanged.
Matrix upsample_linear(const Matrix& x, double in_fps, double out_fps);

}  // namespace avf
