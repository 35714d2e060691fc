// avfusion/tools/avfusion.cc

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

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "avfusion/config.h"
#include "avfusion/error.h"
#include "avfusion/pipeline.h"

namespace {

enum ExitCode {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kDependencyError = 3,
  kDataError = 4,
  kTrainingError = 5,
  kFormatError = 6,
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("avfusion");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %l: %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("AVFUSION_LOG_LEVEL")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only "off" itself may disable logging.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring unknown AVFUSION_LOG_LEVEL '{}'", env);
  }
}

struct Options {
  std::string config_path;
  std::string out;
  std::string seed;
  bool force = false;
  std::vector<std::string> overrides;
  std::string modality;
  std::string snr;
  std::string streams;
};

avf::RunConfig resolve_config(const Options& o) {
  avf::RunConfig cfg = o.config_path.empty() ? avf::RunConfig{} : avf::load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw avf::ConfigError("--set expects key=value, got '" + kv + "'");
    avf::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.seed.empty()) avf::set_config_value(cfg, "run.seed", o.seed);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.snr.empty()) avf::set_config_value(cfg, "eval.snr", o.snr);
  if (!o.streams.empty()) avf::set_config_value(cfg, "eval.streams", o.streams);
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const Options& o) {
  const avf::RunConfig cfg = resolve_config(o);
  avf::echo_config(cfg);
  if (command == "synth") {
    const auto s = avf::cmd_synth(cfg, o.force);
    std::cout << "classes " << s.classes << ", subjects " << s.subjects << ", utterances train "
              << s.train << " / validation " << s.validation << " / test " << s.test << "\n";
  } else if (command == "pretrain") {
    avf::cmd_pretrain(cfg);
  } else if (command == "train-stream") {
    const double loss = avf::cmd_train_stream(cfg, avf::parse_modality(o.modality));
    std::cout << o.modality << " stream best validation loss " << loss << "\n";
  } else if (command == "train-fusion") {
    const double loss = avf::cmd_train_fusion(cfg);
    std::cout << "fusion best validation loss " << loss << "\n";
  } else if (command == "eval") {
    const auto rows = avf::cmd_eval(cfg);
    avf::print_sweep_table(std::cout, rows);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Audiovisual BLSTM fusion classifier"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Random seed (unsigned 64-bit)");
  app.add_option("--set", o.overrides, "Override a configuration key (section.key=value)");

  auto* synth = app.add_subcommand("synth", "Generate the synthetic dataset");
  synth->add_flag("--force", o.force, "Replace an existing non-empty dataset directory");
  app.add_subcommand("pretrain", "RBM-pretrain the audio and video encoders");
  auto* stream = app.add_subcommand("train-stream", "Train a single-modality stream");
  stream->add_option("--modality", o.modality, "audio or video")
      ->required()
      ->check(CLI::IsMember({"audio", "video"}));
  app.add_subcommand("train-fusion", "Train the fusion model from both stream checkpoints");
  auto* eval = app.add_subcommand("eval", "Evaluate on the test split, clean and noisy");
  eval->add_option("--snr", o.snr, "Comma-separated SNR levels in dB");
  eval->add_option("--streams", o.streams, "Comma-separated subset of audio,video,fused");

  app.fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const avf::ConfigError& e) {
    spdlog::error("configuration: {}", e.what());
    return kConfigError;
  } catch (const avf::DependencyError& e) {
    spdlog::error("dependency: {}", e.what());
    return kDependencyError;
  } catch (const avf::DataError& e) {
    spdlog::error("data: {}", e.what());
    return kDataError;
  } catch (const avf::TrainingError& e) {
    spdlog::error("training diverged: {}", e.what());
    return kTrainingError;
  } catch (const avf::FormatError& e) {
    spdlog::error("checkpoint: {}", e.what());
    return kFormatError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kIoError;
  }
}
