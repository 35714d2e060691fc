// avfusion/tests/checkpoint_test.cc

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

#include <cstring>
#include <fstream>

#include "avfusion/checkpoint.h"
#include "avfusion/error.h"
#include "test_util.h"

namespace avf {
namespace {

std::uint64_t fnv1a_oracle(const char* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(p[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

void reseal(std::vector<char>& bytes) {
  const std::size_t body = bytes.size() - 8;
  std::uint64_t h = fnv1a_oracle(bytes.data(), body);
  for (int i = 0; i < 8; ++i) bytes[body + i] = static_cast<char>((h >> (8 * i)) & 0xff);
}

StreamModel small_stream_model(Rng& rng, std::size_t in) {
  const std::vector<std::size_t> enc = {5, 2};
  StreamModel m = StreamModel::create(rng, in, enc, 3, 3);
  m.stream.input_mean.assign(in, 0.25);
  m.stream.input_stddev.assign(in, 2.0);
  return m;
}

template <class M>
void expect_same_params(M a, M b) {
  auto pa = param_blocks(a), pb = param_blocks(b);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_TRUE(std::equal(pa[i].values.begin(), pa[i].values.end(), pb[i].values.begin()))
        << pa[i].name;
  }
}

TEST(Checkpoint, LayoutStartsWithMagicAndVersion) {
  Checkpoint c{"encoder", {{"a", "b"}}, {{"t", Matrix(1, 2, 1.5)}}};
  const auto bytes = encode_checkpoint(c);
  EXPECT_EQ(std::string(bytes.data(), 8), "AVFUSION");
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[9], 0);
  // Trailing FNV-1a 64 over everything before it, little-endian.
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= std::uint64_t(static_cast<unsigned char>(bytes[bytes.size() - 8 + i])) << (8 * i);
  EXPECT_EQ(stored, fnv1a_oracle(bytes.data(), bytes.size() - 8));
  EXPECT_EQ(decode_checkpoint(bytes), c);
}

TEST(Checkpoint, StreamModelRoundTrip) {
  Rng rng(1);
  const StreamModel m = small_stream_model(rng, 4);
  const StreamModel back = stream_model_from_checkpoint(decode_checkpoint(encode_checkpoint(to_checkpoint(m))));
  expect_same_params(m, back);
  EXPECT_EQ(back.stream.input_mean, m.stream.input_mean);
  EXPECT_EQ(back.stream.input_stddev, m.stream.input_stddev);
  EXPECT_EQ(back.stream.delta.window, m.stream.delta.window);
  const Matrix x = testing::random_matrix(rng, 5, 4);
  EXPECT_EQ(predict(m, x).posteriors, predict(back, x).posteriors);
}

TEST(Checkpoint, FusionModelRoundTripThroughFile) {
  Rng rng(2);
  std::vector<StreamParams> streams = {small_stream_model(rng, 4).stream,
                                       small_stream_model(rng, 3).stream};
  const FusionModel m = FusionModel::create(rng, std::move(streams), 2, 3);
  const auto dir = testing::scratch_dir("ckpt");
  save_checkpoint(dir / "f.ckpt", to_checkpoint(m));
  const FusionModel back = fusion_model_from_checkpoint(load_checkpoint(dir / "f.ckpt"));
  expect_same_params(m, back);
  EXPECT_EQ(encode_checkpoint(to_checkpoint(back)), encode_checkpoint(to_checkpoint(m)));
}

TEST(Checkpoint, EncoderRoundTrip) {
  Rng rng(3);
  PretrainedEncoder e;
  e.input_mean = {1.0, 2.0, 3.0};
  e.input_stddev = {0.5, 1.0, 2.0};
  e.layers = {DenseLayer::glorot(rng, 3, 4, Activation::kRelu),
              DenseLayer::glorot(rng, 4, 2, Activation::kLinear)};
  const PretrainedEncoder back = encoder_from_checkpoint(decode_checkpoint(encode_checkpoint(to_checkpoint(e))));
  EXPECT_EQ(back.input_mean, e.input_mean);
  EXPECT_EQ(back.input_stddev, e.input_stddev);
  ASSERT_EQ(back.layers.size(), 2u);
  EXPECT_EQ(back.layers[0].weights, e.layers[0].weights);
  EXPECT_EQ(back.layers[1].activation, Activation::kLinear);
}

TEST(Checkpoint, EveryTruncationIsDetected) {
  Rng rng(4);
  const auto bytes = encode_checkpoint(to_checkpoint(small_stream_model(rng, 3)));
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    const std::vector<char> cut(bytes.begin(), bytes.begin() + static_cast<long>(n));
    EXPECT_THROW(decode_checkpoint(cut), ChecksumError) << "length " << n;
  }
}

TEST(Checkpoint, CorruptionIsDetected) {
  Rng rng(5);
  auto bytes = encode_checkpoint(to_checkpoint(small_stream_model(rng, 3)));
  bytes[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(decode_checkpoint(bytes), ChecksumError);
}

TEST(Checkpoint, BadMagicAndVersionAreFormatErrors) {
  Rng rng(6);
  const auto good = encode_checkpoint(to_checkpoint(small_stream_model(rng, 3)));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  reseal(bad_magic);
  EXPECT_THROW(decode_checkpoint(bad_magic), FormatError);

  auto bad_version = good;
  bad_version[8] = 2;
  reseal(bad_version);
  try {
    decode_checkpoint(bad_version);
    FAIL() << "expected FormatError";
  } catch (const ChecksumError&) {
    FAIL() << "version mismatch reported as a checksum error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, KindMismatchIsRejected) {
  Rng rng(7);
  const Checkpoint c = to_checkpoint(small_stream_model(rng, 3));
  EXPECT_THROW(fusion_model_from_checkpoint(c), FormatError);
  EXPECT_THROW(encoder_from_checkpoint(c), FormatError);
}

TEST(Checkpoint, StreamCheckpointSeedsFusionSlot) {
  Rng rng(8);
  const StreamModel audio = small_stream_model(rng, 4);
  const StreamModel video = small_stream_model(rng, 3);
  std::vector<StreamParams> streams = {stream_from_checkpoint(to_checkpoint(audio)),
                                       stream_from_checkpoint(to_checkpoint(video))};
  FusionModel f = FusionModel::create(rng, std::move(streams), 2, 3);
  const Matrix xa = testing::random_matrix(rng, 5, 4);
  EXPECT_EQ(stream_forward(f.streams[0], xa).output, stream_forward(audio.stream, xa).output);

  // And back out of the fusion checkpoint.
  const Checkpoint fc = to_checkpoint(f);
  const StreamParams v = stream_from_checkpoint(fc, 1);
  const Matrix xv = testing::random_matrix(rng, 5, 3);
  EXPECT_EQ(stream_forward(v, xv).output, stream_forward(video.stream, xv).output);
  EXPECT_THROW(stream_from_checkpoint(fc, 2), FormatError);
}

TEST(Checkpoint, MissingFileIsIoError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ckpt"), IoError);
}

}  // namespace
}  // namespace avf
