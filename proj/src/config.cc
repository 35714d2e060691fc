// avfusion/src/config.cc

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

#include "avfusion/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "avfusion/error.h"

namespace avf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string fmt_real(double d) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

std::string fmt_item(double d) { return fmt_real(d); }
std::string fmt_item(std::size_t n) { return std::to_string(n); }
std::string fmt_item(const std::string& s) { return s; }

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_item(v[i]);
  return out;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define AVF_COUNT(KEY, MEMBER)                                                         \
  Field {                                                                              \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                \
      c.MEMBER = to_count(k, v);                                                       \
    },                                                                                 \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                    \
  }
#define AVF_REAL(KEY, MEMBER)                                                                   \
  Field {                                                                                       \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_real(k, v); }, \
        [](const RunConfig& c) { return fmt_real(c.MEMBER); }                                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"run.preset", [](RunConfig& c, const std::string&, const std::string& v) { c.preset = v; },
       [](const RunConfig& c) { return c.preset; }},
      {"run.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           std::size_t used = 0;
           c.seed = std::stoull(v, &used);
           if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
         } catch (const std::exception&) {
           throw ConfigError("'" + k + "' expects an unsigned 64-bit integer, got '" + v + "'");
         }
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      AVF_COUNT("run.runs", runs),
      {"paths.out", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir.string(); }},
      {"paths.data",
       [](RunConfig& c, const std::string&, const std::string& v) { c.data_dir = v; },
       [](const RunConfig& c) { return c.data_dir.string(); }},
      AVF_COUNT("data.classes", synth.classes),
      AVF_COUNT("data.subjects", synth.subjects),
      AVF_COUNT("data.utterances_per_subject", synth.utterances_per_subject),
      AVF_COUNT("data.train_subjects", synth.train_subjects),
      AVF_COUNT("data.validation_subjects", synth.validation_subjects),
      AVF_COUNT("data.test_subjects", synth.test_subjects),
      AVF_COUNT("data.image_width", synth.image_width),
      AVF_COUNT("data.image_height", synth.image_height),
      AVF_REAL("data.video_fps", synth.video_fps),
      {"data.sample_rate",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.synth.sample_rate = static_cast<int>(to_count(k, v));
       },
       [](const RunConfig& c) { return std::to_string(c.synth.sample_rate); }},
      AVF_COUNT("data.min_video_frames", synth.min_video_frames),
      AVF_COUNT("data.max_video_frames", synth.max_video_frames),
      AVF_REAL("data.video_strength", synth.video_strength),
      AVF_REAL("data.audio_strength", synth.audio_strength),
      AVF_REAL("data.audio_floor_snr_db", synth.audio_floor_snr_db),
      AVF_REAL("features.window_ms", features.spectrogram.window_ms),
      AVF_REAL("features.hop_ms", features.spectrogram.hop_ms),
      AVF_COUNT("features.fft_size", features.spectrogram.fft_size),
      AVF_REAL("features.target_fps", features.target_fps),
      AVF_COUNT("features.delta_window", delta.window),
      {"model.encoder",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.encoder_hidden.clear();
         for (const auto& item : split_list(v)) c.encoder_hidden.push_back(to_count(k, item));
       },
       [](const RunConfig& c) { return join(c.encoder_hidden); }},
      AVF_COUNT("model.bottleneck", bottleneck),
      AVF_COUNT("model.stream_hidden", stream_hidden),
      AVF_COUNT("model.fusion_hidden", fusion_hidden),
      AVF_COUNT("rbm.epochs", rbm.epochs),
      AVF_COUNT("rbm.batch_size", rbm.batch_size),
      AVF_REAL("rbm.l2", rbm.l2),
      AVF_REAL("rbm.learning_rate", rbm.learning_rate),
      {"rbm.skip",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.skip_pretrain = to_bool(k, v);
       },
       [](const RunConfig& c) { return std::string(c.skip_pretrain ? "true" : "false"); }},
      AVF_COUNT("train.batch_utterances", train.batch_utterances),
      AVF_REAL("train.lr_stream", lr_stream),
      AVF_REAL("train.lr_fusion", lr_fusion),
      AVF_COUNT("train.early_stop_delay", train.early_stop_delay),
      AVF_REAL("train.clip_threshold", train.clip_threshold),
      AVF_COUNT("train.max_epochs", train.max_epochs),
      {"eval.snr",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.snr_levels.clear();
         for (const auto& item : split_list(v)) c.snr_levels.push_back(to_real(k, item));
       },
       [](const RunConfig& c) { return join(c.snr_levels); }},
      {"eval.streams",
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.eval_streams = split_list(v);
       },
       [](const RunConfig& c) { return join(c.eval_streams); }},
      {"eval.noise",
       [](RunConfig& c, const std::string&, const std::string& v) { c.noise_path = v; },
       [](const RunConfig& c) { return c.noise_path.string(); }},
  };
  return table;
}

#undef AVF_COUNT
#undef AVF_REAL

}  // namespace

RunConfig RunConfig::preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "desk") return c;
  if (name == "paper") {
    c.encoder_hidden = {2000, 1000, 500};
    c.bottleneck = 50;
    c.stream_hidden = 150;
    c.fusion_hidden = 150;
    c.synth.sample_rate = 48000;
    c.synth.image_width = 30;
    c.synth.image_height = 45;
    c.train.max_epochs = 100;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

std::vector<std::size_t> RunConfig::encoder_sizes() const {
  std::vector<std::size_t> sizes = encoder_hidden;
  sizes.push_back(bottleneck);
  return sizes;
}

std::filesystem::path RunConfig::resolved_data_dir() const {
  return data_dir.empty() ? out_dir / "data" : data_dir;
}

TrainConfig RunConfig::stream_train_config() const {
  TrainConfig t = train;
  t.learning_rate = lr_stream;
  return t;
}

TrainConfig RunConfig::fusion_train_config() const {
  TrainConfig t = train;
  t.learning_rate = lr_fusion;
  return t;
}

void RunConfig::validate() const {
  if (preset != "desk" && preset != "paper") throw ConfigError("unknown preset '" + preset + "'");
  if (runs == 0) throw ConfigError("run.runs must be at least 1");
  if (out_dir.empty()) throw ConfigError("an output directory is required");
  try {
    synth.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("[data] ") + e.what());
  }
  const auto& sp = features.spectrogram;
  if (!(sp.window_ms > 0.0) || !(sp.hop_ms > 0.0) || sp.hop_ms > sp.window_ms)
    throw ConfigError("features: need 0 < hop_ms <= window_ms");
  const std::size_t window = sp.window_samples(synth.sample_rate);
  if (sp.fft_size != 0 && sp.fft_size < window)
    throw ConfigError("features.fft_size is smaller than the analysis window");
  if (std::abs(sp.frame_rate(synth.sample_rate) - features.target_fps) > 1e-9)
    throw ConfigError("spectrogram frame rate " + fmt_real(sp.frame_rate(synth.sample_rate)) +
                      " fps does not equal features.target_fps " + fmt_real(features.target_fps));
  if (features.target_fps < synth.video_fps)
    throw ConfigError("features.target_fps must be at least data.video_fps");
  if (delta.window == 0) throw ConfigError("features.delta_window must be at least 1");
  if (encoder_hidden.empty()) throw ConfigError("model.encoder needs at least one hidden layer");
  for (std::size_t s : encoder_hidden)
    if (s == 0) throw ConfigError("model.encoder has a zero-width layer");
  if (bottleneck == 0 || stream_hidden == 0 || fusion_hidden == 0)
    throw ConfigError("model widths must be positive");
  if (rbm.batch_size == 0 || !(rbm.learning_rate >= 0.0) || !(rbm.l2 >= 0.0))
    throw ConfigError("rbm: batch_size must be positive and rates non-negative");
  if (train.batch_utterances == 0) throw ConfigError("train.batch_utterances must be positive");
  if (!(lr_stream >= 0.0) || !(lr_fusion >= 0.0))
    throw ConfigError("learning rates must be non-negative");
  if (!(train.clip_threshold > 0.0)) throw ConfigError("train.clip_threshold must be positive");
  if (train.early_stop_delay == 0) throw ConfigError("train.early_stop_delay must be positive");
  for (const auto& s : eval_streams)
    if (s != "audio" && s != "video" && s != "fused")
      throw ConfigError("eval.streams: unknown stream '" + s + "'");
  if (eval_streams.empty()) throw ConfigError("eval.streams is empty");
}

void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  for (const auto& f : fields()) {
    if (dotted_key == f.key) {
      f.set(cfg, dotted_key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + dotted_key + "'");
}

RunConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::string preset = "desk";
  if (auto p = tree.get_optional<std::string>("run.preset")) preset = trim(*p);
  RunConfig cfg = RunConfig::preset_config(preset);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside of a section");
    for (const auto& [key, leaf] : body) set_config_value(cfg, section + "." + key, leaf.data());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_config(in);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  std::string section;
  for (const auto& f : fields()) {
    const std::string key = f.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = " << f.get(cfg) << '\n';
  }
}

}  // namespace avf
