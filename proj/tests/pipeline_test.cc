// avfusion/tests/pipeline_test.cc

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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "avfusion/error.h"
#include "avfusion/pipeline.h"
#include "avfusion/rbm.h"
#include "test_util.h"

namespace avf {
namespace {

namespace fs = std::filesystem;

// Small enough that every phase finishes in about a second.
RunConfig tiny_config(const fs::path& out) {
  RunConfig c;
  c.out_dir = out;
  c.synth.subjects = 3;
  c.synth.train_subjects = c.synth.validation_subjects = c.synth.test_subjects = 1;
  c.synth.utterances_per_subject = 3;
  c.synth.min_video_frames = 8;
  c.synth.max_video_frames = 10;
  c.encoder_hidden = {8};
  c.bottleneck = 4;
  c.stream_hidden = 4;
  c.fusion_hidden = 4;
  c.rbm.epochs = 2;
  c.train.max_epochs = 2;
  c.runs = 2;
  c.snr_levels = {0};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AVFUSION_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Pipeline, SynthRefusesNonEmptyDirectoryWithoutForce) {
  const auto out = testing::scratch_dir("pipe_synth");
  const RunConfig c = tiny_config(out);
  const SynthSummary s = cmd_synth(c, false);
  EXPECT_EQ(s.classes, 3u);
  EXPECT_EQ(s.train + s.validation + s.test, 9u);
  const std::string manifest = slurp(out / "data" / "manifest.csv");
  EXPECT_THROW(cmd_synth(c, false), ConfigError);
  std::ofstream(out / "data" / "stray.txt") << "x";
  cmd_synth(c, true);
  EXPECT_FALSE(fs::exists(out / "data" / "stray.txt"));
  EXPECT_EQ(slurp(out / "data" / "manifest.csv"), manifest);
}

TEST(Pipeline, PhasesRequireTheirDependencies) {
  const auto out = testing::scratch_dir("pipe_deps");
  RunConfig c = tiny_config(out);
  EXPECT_THROW(cmd_pretrain(c), DependencyError);  // no dataset yet
  cmd_synth(c, false);
  EXPECT_THROW(cmd_train_stream(c, Modality::kAudio), DependencyError);
  try {
    cmd_train_fusion(c);
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("train-stream"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cmd_eval(c), DependencyError);

  c.skip_pretrain = true;
  cmd_train_stream(c, Modality::kAudio);
  // Video stream still missing.
  try {
    cmd_train_fusion(c);
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("video"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, ZeroEpochPretrainStoresInitialEncoder) {
  const auto out = testing::scratch_dir("pipe_pre0");
  RunConfig c = tiny_config(out);
  c.rbm.epochs = 0;
  cmd_synth(c, false);
  cmd_pretrain(c);
  const Workspace ws{out};
  const PretrainedEncoder e = encoder_from_checkpoint(load_checkpoint(ws.pretrain_checkpoint(Modality::kVideo)));
  ASSERT_EQ(e.layers.size(), 2u);
  EXPECT_EQ(e.layers[0].in_dim(), c.synth.image_width * c.synth.image_height);
  for (double b : e.layers[0].bias) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(e.layers[1].activation, Activation::kLinear);
}

TEST(Pipeline, FullRunIsByteIdenticalAcrossRepeats) {
  auto run = [](const fs::path& out) {
    const RunConfig c = tiny_config(out);
    echo_config(c);
    cmd_synth(c, true);
    cmd_pretrain(c);
    cmd_train_stream(c, Modality::kAudio);
    cmd_train_stream(c, Modality::kVideo);
    cmd_train_fusion(c);
    return cmd_eval(c);
  };
  const auto a = testing::scratch_dir("pipe_a");
  const auto b = testing::scratch_dir("pipe_b");
  const auto rows = run(a);
  run(b);
  EXPECT_EQ(rows.size(), 6u);
  for (const char* f : {"checkpoints/pretrain_audio.ckpt", "checkpoints/stream_audio.ckpt",
                        "checkpoints/stream_video.ckpt", "checkpoints/fusion.ckpt",
                        "reports/eval.csv", "logs/fusion.csv", "logs/pretrain_video.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string header = slurp(a / "logs" / "stream_audio.csv").substr(0, 31);
  EXPECT_EQ(header, "epoch,split,loss,CR,UAR,meanF1\n");
}

TEST(Cli, ExitCodes) {
  const auto out = testing::scratch_dir("cli");
  const std::string base = "--out " + out.string();
  const std::string tiny =
      base + " --set data.subjects=3 --set data.train_subjects=1 --set data.validation_subjects=1"
             " --set data.test_subjects=1 --set data.utterances_per_subject=2";
  EXPECT_EQ(run_cli(base + " train-fusion"), 3);
  EXPECT_EQ(run_cli(base + " --set model.bottleneck=0 synth"), 2);
  EXPECT_EQ(run_cli(base + " --set no.such=1 synth"), 2);
  EXPECT_EQ(run_cli(base + " frobnicate"), 2);
  EXPECT_EQ(run_cli("--out /proc/avfusion_unwritable synth"), 1);
  // Invalid configuration leaves nothing behind.
  EXPECT_EQ(run_cli("--out " + (out / "never").string() + " --set run.runs=0 synth"), 2);
  EXPECT_FALSE(fs::exists(out / "never"));
  EXPECT_EQ(run_cli(tiny + " synth"), 0);
  EXPECT_TRUE(fs::exists(out / "resolved_config.ini"));
  EXPECT_EQ(run_cli(tiny + " synth"), 2);  // refuses without --force
  EXPECT_EQ(run_cli(tiny + " synth --force"), 0);
  EXPECT_EQ(run_cli(tiny + " train-stream --modality audio"), 3);

  fs::create_directories(out / "checkpoints");
  std::ofstream(out / "checkpoints" / "stream_audio.ckpt") << "AVFUSION garbage";
  std::ofstream(out / "checkpoints" / "stream_video.ckpt") << "AVFUSION garbage";
  EXPECT_EQ(run_cli(tiny + " train-fusion"), 6);
}

TEST(Cli, ConfigFileAndFlagsCombine) {
  const auto out = testing::scratch_dir("cli_cfg");
  {
    std::ofstream cfg(out / "run.ini");
    cfg << "[run]\nseed = 5\n[data]\nsubjects = 3\ntrain_subjects = 1\n"
           "validation_subjects = 1\ntest_subjects = 1\nutterances_per_subject = 2\n";
  }
  EXPECT_EQ(run_cli("--config " + (out / "run.ini").string() + " --seed 17 --out " +
                    (out / "o").string() + " synth"),
            0);
  const std::string resolved = slurp(out / "o" / "resolved_config.ini");
  EXPECT_NE(resolved.find("seed = 17"), std::string::npos) << resolved;
  EXPECT_NE(resolved.find("\nsubjects = 3"), std::string::npos) << resolved;
  EXPECT_EQ(run_cli("--config " + (out / "missing.ini").string() + " synth"), 2);
}

}  // namespace
}  // namespace avf
