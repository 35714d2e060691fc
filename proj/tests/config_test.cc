// avfusion/tests/config_test.cc

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

#include <sstream>

#include "avfusion/config.h"
#include "avfusion/error.h"

namespace avf {
namespace {

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

TEST(Config, DeskPresetDefaults) {
  const RunConfig c = RunConfig::preset_config("desk");
  EXPECT_EQ(c.encoder_sizes(), (std::vector<std::size_t>{64, 32, 16, 8}));
  EXPECT_EQ(c.stream_hidden, 16u);
  EXPECT_EQ(c.synth.image_width, 12u);
  EXPECT_EQ(c.synth.sample_rate, 8000);
  EXPECT_EQ(c.runs, 10u);
  EXPECT_EQ(c.rbm.epochs, 20u);
  EXPECT_EQ(c.rbm.batch_size, 100u);
  EXPECT_EQ(c.rbm.l2, 0.0002);
  EXPECT_EQ(c.rbm.learning_rate, 0.001);
  EXPECT_EQ(c.lr_stream, 0.0003);
  EXPECT_EQ(c.lr_fusion, 0.0001);
  EXPECT_EQ(c.train.early_stop_delay, 5u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, FullScalePreset) {
  const RunConfig c = RunConfig::preset_config("paper");
  EXPECT_EQ(c.encoder_sizes(), (std::vector<std::size_t>{2000, 1000, 500, 50}));
  EXPECT_EQ(c.stream_hidden, 150u);
  EXPECT_EQ(c.synth.sample_rate, 48000);
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(RunConfig::preset_config("huge"), ConfigError);
}

TEST(Config, FileOverridesPreset) {
  const RunConfig c = parse(
      "[run]\npreset = paper\nseed = 99\n[model]\nencoder = 10, 5\nbottleneck = 3\n"
      "[eval]\nsnr = 10,0\nstreams = fused\n");
  EXPECT_EQ(c.preset, "paper");
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.encoder_sizes(), (std::vector<std::size_t>{10, 5, 3}));
  EXPECT_EQ(c.stream_hidden, 150u);
  EXPECT_EQ(c.snr_levels, (std::vector<double>{10, 0}));
  EXPECT_EQ(c.eval_streams, (std::vector<std::string>{"fused"}));
}

TEST(Config, WriteParseRoundTrip) {
  RunConfig c = RunConfig::preset_config("desk");
  set_config_value(c, "train.lr_stream", "0.00123");
  set_config_value(c, "data.video_strength", "0.3");
  set_config_value(c, "rbm.skip", "true");
  set_config_value(c, "paths.data", "/tmp/somewhere");
  std::ostringstream os;
  write_config(os, c);
  const RunConfig back = parse(os.str());
  std::ostringstream again;
  write_config(again, back);
  EXPECT_EQ(os.str(), again.str());
  EXPECT_EQ(back.lr_stream, 0.00123);
  EXPECT_TRUE(back.skip_pretrain);
}

TEST(Config, UnknownKeysAndBadValuesAreConfigErrors) {
  EXPECT_THROW(parse("[model]\nwidth = 3\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nseed = -4\n"), ConfigError);
  EXPECT_THROW(parse("[train]\nmax_epochs = many\n"), ConfigError);
  EXPECT_THROW(parse("[rbm]\nskip = maybe\n"), ConfigError);
  RunConfig c;
  EXPECT_THROW(set_config_value(c, "nosection", "1"), ConfigError);
}

TEST(Config, ValidationRejectsInconsistentDimensions) {
  auto expect_invalid = [](const std::string& key, const std::string& value) {
    RunConfig c;
    set_config_value(c, key, value);
    EXPECT_THROW(c.validate(), ConfigError) << key << "=" << value;
  };
  expect_invalid("features.hop_ms", "20");        // 50 fps audio vs 100 fps target
  expect_invalid("features.target_fps", "10");    // below the video rate
  expect_invalid("features.fft_size", "64");      // shorter than the window
  expect_invalid("model.bottleneck", "0");
  expect_invalid("model.encoder", "");
  expect_invalid("data.train_subjects", "20");
  expect_invalid("eval.streams", "audio,lips");
  expect_invalid("run.runs", "0");
  expect_invalid("run.preset", "huge");
  expect_invalid("train.clip_threshold", "0");
}

}  // namespace
}  // namespace avf
