// avfusion/src/pipeline.cc

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

#include "avfusion/pipeline.h"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "avfusion/error.h"
#include "avfusion/rbm.h"
#include "avfusion/synth.h"
#include "avfusion/training.h"

namespace avf {

namespace fs = std::filesystem;

namespace {

// Fork tags of the per-phase random streams.
constexpr std::uint64_t kSynthTag = 0x51;
constexpr std::uint64_t kPretrainTag = 0x52;
constexpr std::uint64_t kStreamTag = 0x53;
constexpr std::uint64_t kFusionTag = 0x54;
constexpr std::uint64_t kEvalTag = 0x55;

Workspace workspace(const RunConfig& cfg) { return Workspace{cfg.out_dir}; }

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

template <class Fn>
void write_text(const fs::path& path, Fn&& fn) {
  ensure_dir(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  fn(os);
  if (!os) throw IoError("write failed: " + path.string());
}

Checkpoint require_checkpoint(const fs::path& path, const std::string& phase) {
  if (!fs::exists(path))
    throw DependencyError("missing checkpoint " + path.string() + "; run `avfusion " + phase +
                          "` first");
  return load_checkpoint(path);
}

struct SplitFeatures {
  std::vector<Matrix> audio;
  std::vector<Matrix> video;
  std::vector<int> labels;
};

SplitFeatures split_features(const RunConfig& cfg, Split split) {
  SplitFeatures f;
  for (const auto& u : load_split(cfg, split)) {
    AvFeatures av = extract_features(u, cfg.features);
    f.audio.push_back(std::move(av.audio));
    f.video.push_back(std::move(av.video));
    f.labels.push_back(u.label);
  }
  if (f.labels.empty())
    throw DataError("the " + split_name(split) + " split of " +
                    cfg.resolved_data_dir().string() + " is empty");
  return f;
}

const std::vector<Matrix>& of_modality(const SplitFeatures& f, Modality m) {
  return m == Modality::kAudio ? f.audio : f.video;
}

std::vector<Sample> stream_samples(const SplitFeatures& f, Modality m) {
  std::vector<Sample> out;
  const auto& x = of_modality(f, m);
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({{x[i]}, f.labels[i]});
  return out;
}

std::vector<Sample> fused_samples(const SplitFeatures& f) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < f.labels.size(); ++i)
    out.push_back({{f.audio[i], f.video[i]}, f.labels[i]});
  return out;
}

Matrix stack_frames(const std::vector<Matrix>& seqs) {
  std::size_t rows = 0;
  for (const auto& s : seqs) rows += s.rows();
  Matrix out(rows, seqs.front().cols());
  std::size_t r = 0;
  for (const auto& s : seqs) {
    for (std::size_t i = 0; i < s.rows(); ++i, ++r) {
      auto src = s.row(i);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
  }
  return out;
}

std::size_t class_count(const RunConfig& cfg) {
  const DatasetManifest m = load_manifest(cfg.resolved_data_dir() / "manifest.csv");
  return m.classes();
}

void save_log(const fs::path& path, const std::vector<LogRow>& rows) {
  write_text(path, [&](std::ostream& os) { write_log_csv(os, rows); });
}

}  // namespace

std::string modality_name(Modality m) { return m == Modality::kAudio ? "audio" : "video"; }

Modality parse_modality(const std::string& s) {
  if (s == "audio") return Modality::kAudio;
  if (s == "video") return Modality::kVideo;
  throw ConfigError("unknown modality '" + s + "' (expected audio or video)");
}

fs::path Workspace::pretrain_checkpoint(Modality m) const {
  return checkpoints() / ("pretrain_" + modality_name(m) + ".ckpt");
}

fs::path Workspace::stream_checkpoint(Modality m) const {
  return checkpoints() / ("stream_" + modality_name(m) + ".ckpt");
}

void echo_config(const RunConfig& cfg) {
  write_text(cfg.out_dir / "resolved_config.ini", [&](std::ostream& os) { write_config(os, cfg); });
}

std::vector<Utterance> load_split(const RunConfig& cfg, Split split) {
  const fs::path dir = cfg.resolved_data_dir();
  const fs::path manifest_path = dir / "manifest.csv";
  if (!fs::exists(manifest_path))
    throw DependencyError("no dataset at " + dir.string() + "; run `avfusion synth` first");
  const DatasetManifest manifest = load_manifest(manifest_path);
  manifest.check_subject_disjoint();
  std::vector<Utterance> out;
  for (const auto& e : manifest.of_split(split)) {
    Utterance u = load_utterance(dir / e.path, cfg.synth.video_fps);
    u.label = e.label;
    u.subject = e.subject;
    out.push_back(std::move(u));
  }
  return out;
}

SynthSummary cmd_synth(const RunConfig& cfg, bool force) {
  const fs::path dir = cfg.resolved_data_dir();
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
    if (!force)
      throw ConfigError("refusing to overwrite non-empty " + dir.string() + " (use --force)");
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
  }
  ensure_dir(dir);
  Rng rng = Rng(cfg.seed).fork(kSynthTag);
  const DatasetManifest m = synth_dataset(cfg.synth, dir, rng);
  SynthSummary s;
  s.classes = m.classes();
  s.subjects = cfg.synth.subjects;
  s.train = m.of_split(Split::kTrain).size();
  s.validation = m.of_split(Split::kValidation).size();
  s.test = m.of_split(Split::kTest).size();
  spdlog::info("synthesized {} utterances into {}", m.entries.size(), dir.string());
  return s;
}

void cmd_pretrain(const RunConfig& cfg) {
  const Workspace ws = workspace(cfg);
  const SplitFeatures train = split_features(cfg, Split::kTrain);
  const std::vector<std::size_t> sizes = cfg.encoder_sizes();
  for (Modality m : {Modality::kAudio, Modality::kVideo}) {
    const ZNormalized z = znormalize(stack_frames(of_modality(train, m)));
    Rng rng = Rng(cfg.seed).fork(kPretrainTag).fork(static_cast<std::uint64_t>(m));
    spdlog::info("pretraining {} encoder on {} frames", modality_name(m), z.data.rows());
    PretrainResult r = pretrain_stack(sizes, z.data, cfg.rbm, rng);

    PretrainedEncoder enc{z.mean, z.stddev, std::move(r.layers)};
    ensure_dir(ws.checkpoints());
    save_checkpoint(ws.pretrain_checkpoint(m), to_checkpoint(enc));
    write_text(ws.logs() / ("pretrain_" + modality_name(m) + ".csv"), [&](std::ostream& os) {
      os << "layer,epoch,recon_error\n";
      for (std::size_t l = 0; l < r.epoch_errors.size(); ++l)
        for (std::size_t e = 0; e < r.epoch_errors[l].size(); ++e)
          os << l << ',' << e + 1 << ',' << r.epoch_errors[l][e] << '\n';
    });
  }
}

double cmd_train_stream(const RunConfig& cfg, Modality modality) {
  const Workspace ws = workspace(cfg);
  const std::string name = modality_name(modality);
  std::optional<PretrainedEncoder> enc;
  if (!cfg.skip_pretrain)
    enc = encoder_from_checkpoint(require_checkpoint(ws.pretrain_checkpoint(modality), "pretrain"));

  const SplitFeatures train = split_features(cfg, Split::kTrain);
  const SplitFeatures validation = split_features(cfg, Split::kValidation);
  const std::size_t input_dim = of_modality(train, modality).front().cols();
  const std::size_t classes = class_count(cfg);

  Rng rng = Rng(cfg.seed).fork(kStreamTag).fork(static_cast<std::uint64_t>(modality));
  const std::vector<std::size_t> sizes = cfg.encoder_sizes();
  StreamModel model =
      StreamModel::create(rng, input_dim, sizes, cfg.stream_hidden, classes, cfg.delta);
  if (enc) {
    if (enc->layers.size() != sizes.size() || enc->layers.front().in_dim() != input_dim)
      throw ConfigError("pretrained " + name + " encoder does not match model.encoder; rerun "
                        "`avfusion pretrain`");
    for (std::size_t l = 0; l < sizes.size(); ++l)
      if (enc->layers[l].out_dim() != sizes[l])
        throw ConfigError("pretrained " + name + " encoder does not match model.encoder; rerun "
                          "`avfusion pretrain`");
    model.stream.encoder = enc->layers;
    model.stream.input_mean = enc->input_mean;
    model.stream.input_stddev = enc->input_stddev;
  } else {
    const ZNormalized z = znormalize(stack_frames(of_modality(train, modality)));
    model.stream.input_mean = z.mean;
    model.stream.input_stddev = z.stddev;
  }

  spdlog::info("training {} stream", name);
  TrainResult<StreamModel> r =
      train_stream(std::move(model), stream_samples(train, modality),
                   stream_samples(validation, modality), cfg.stream_train_config(), rng);
  ensure_dir(ws.checkpoints());
  save_checkpoint(ws.stream_checkpoint(modality), to_checkpoint(r.model));
  save_log(ws.logs() / ("stream_" + name + ".csv"), r.log);
  spdlog::info("{} stream: best epoch {} of {}, validation loss {:.4f}", name,
               r.loop.best_epoch, r.loop.epochs_run, r.loop.best_loss);
  return r.loop.best_loss;
}

double cmd_train_fusion(const RunConfig& cfg) {
  const Workspace ws = workspace(cfg);
  std::vector<StreamParams> streams;
  for (Modality m : {Modality::kAudio, Modality::kVideo}) {
    const Checkpoint c =
        require_checkpoint(ws.stream_checkpoint(m), "train-stream --modality " + modality_name(m));
    streams.push_back(stream_from_checkpoint(c));
  }
  const SplitFeatures train = split_features(cfg, Split::kTrain);
  const SplitFeatures validation = split_features(cfg, Split::kValidation);

  Rng rng = Rng(cfg.seed).fork(kFusionTag);
  FusionModel model =
      FusionModel::create(rng, std::move(streams), cfg.fusion_hidden, class_count(cfg));
  spdlog::info("training fusion model");
  TrainResult<FusionModel> r = train_fusion(std::move(model), fused_samples(train),
                                            fused_samples(validation),
                                            cfg.fusion_train_config(), rng);
  save_checkpoint(ws.fusion_checkpoint(), to_checkpoint(r.model));
  save_log(ws.logs() / "fusion.csv", r.log);
  spdlog::info("fusion: best epoch {} of {}, validation loss {:.4f}", r.loop.best_epoch,
               r.loop.epochs_run, r.loop.best_loss);
  return r.loop.best_loss;
}

std::vector<SweepRow> cmd_eval(const RunConfig& cfg) {
  const Workspace ws = workspace(cfg);
  SweepModels models;
  for (const auto& s : cfg.eval_streams) {
    if (s == "fused") {
      models.fused = fusion_model_from_checkpoint(require_checkpoint(ws.fusion_checkpoint(), "train-fusion"));
    } else {
      const Modality m = parse_modality(s);
      const Checkpoint c = require_checkpoint(ws.stream_checkpoint(m), "train-stream --modality " + s);
      (m == Modality::kAudio ? models.audio : models.video) = stream_model_from_checkpoint(c);
    }
  }
  NoiseSource noise;
  if (!cfg.noise_path.empty()) noise = NoiseSource(read_wav(cfg.noise_path));

  const std::vector<Utterance> test = load_split(cfg, Split::kTest);
  std::vector<SweepRow> rows = snr_sweep(models, test, noise, cfg.snr_levels, cfg.runs,
                                         Rng(cfg.seed).fork(kEvalTag).next_u64(), cfg.features);
  write_text(ws.reports() / "eval.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
  return rows;
}

}  // namespace avf
