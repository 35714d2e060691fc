// avfusion/tests/video_test.cc

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

#include <gtest/gtest.h>

#include <fstream>

#include "avfusion/error.h"
#include "avfusion/video.h"
#include "test_util.h"

namespace avf {
namespace {

GrayImage image(std::size_t w, std::size_t h, std::uint8_t base) {
  GrayImage g{w, h, std::vector<std::uint8_t>(w * h)};
  for (std::size_t i = 0; i < g.pixels.size(); ++i) g.pixels[i] = std::uint8_t(base + i);
  return g;
}

TEST(Pgm, RoundTrip) {
  const auto dir = testing::scratch_dir("pgm");
  const GrayImage g = image(5, 3, 200);
  write_pgm(dir / "a.pgm", g);
  EXPECT_EQ(read_pgm(dir / "a.pgm"), g);
}

TEST(Pgm, ReadsCommentsInHeader) {
  const auto dir = testing::scratch_dir("pgmc");
  {
    std::ofstream os(dir / "c.pgm", std::ios::binary);
    os << "P5\n# comment\n2 1\n255\n";
    os.put(char(7));
    os.put(char(250));
  }
  const GrayImage g = read_pgm(dir / "c.pgm");
  EXPECT_EQ(g.width, 2u);
  EXPECT_EQ(g.pixels, (std::vector<std::uint8_t>{7, 250}));
}

TEST(Pgm, RejectsBadFiles) {
  const auto dir = testing::scratch_dir("pgmbad");
  std::ofstream(dir / "p2.pgm") << "P2\n1 1\n255\n0\n";
  EXPECT_THROW(read_pgm(dir / "p2.pgm"), DataError);
  std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n4 4\n255\nab";
  EXPECT_THROW(read_pgm(dir / "short.pgm"), DataError);
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
}

TEST(MeanImage, ColumnsHaveZeroMean) {
  const std::vector<GrayImage> frames = {image(2, 2, 10), image(2, 2, 20), image(2, 2, 60)};
  const Matrix m = mean_image_subtract(frames);
  ASSERT_EQ(m.rows(), 3u);
  ASSERT_EQ(m.cols(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(m(0, c), -20.0);
    EXPECT_DOUBLE_EQ(m(1, c), -10.0);
    EXPECT_DOUBLE_EQ(m(2, c), 30.0);
  }
  const std::vector<GrayImage> mixed = {image(2, 2, 0), image(3, 2, 0)};
  EXPECT_THROW(mean_image_subtract(mixed), DataError);
}

TEST(Upsample, ExactOnAffineSignals) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 2 + rng.below(30);
    const double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5);
    Matrix x(t, 2);
    for (std::size_t i = 0; i < t; ++i) {
      x(i, 0) = a + b * double(i) / 25.0;
      x(i, 1) = -3.0 * double(i) / 25.0;
    }
    const Matrix y = upsample_linear(x, 25.0, 100.0);
    EXPECT_EQ(y.rows(), 4 * (t - 1) + 1);
    for (std::size_t k = 0; k < y.rows(); ++k) {
      const double time = double(k) / 100.0;
      EXPECT_NEAR(y(k, 0), a + b * time, 1e-12);
      EXPECT_NEAR(y(k, 1), -3.0 * time, 1e-12);
    }
  }
}

TEST(Upsample, NonIntegerRatio) {
  Matrix x(4, 1);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = 2.0 * double(i) / 30.0 + 1.0;
  const Matrix y = upsample_linear(x, 30.0, 100.0);
  EXPECT_EQ(y.rows(), 11u);  // floor(3 * 100 / 30) + 1
  for (std::size_t k = 0; k < y.rows(); ++k) EXPECT_NEAR(y(k, 0), 2.0 * k / 100.0 + 1.0, 1e-12);
}

TEST(Upsample, KeepsOriginalSamples) {
  Rng rng(2);
  const Matrix x = testing::random_matrix(rng, 6, 3);
  const Matrix y = upsample_linear(x, 25.0, 100.0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(y(4 * i, c), x(i, c), 1e-15);
  EXPECT_EQ(upsample_linear(row_block(x, 0, 1), 25.0, 100.0), row_block(x, 0, 1));
  EXPECT_THROW(upsample_linear(x, 100.0, 25.0), ArgumentError);
}

}  // namespace
}  // namespace avf
