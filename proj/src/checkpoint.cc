// avfusion/src/checkpoint.cc

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

#include "avfusion/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "avfusion/error.h"

namespace avf {

namespace {

constexpr char kMagic[8] = {'A', 'V', 'F', 'U', 'S', 'I', 'O', 'N'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <class T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof v; ++i) buf_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::vector<char>& bytes() { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t n) : data_(data), n_(n) {}
  void raw(void* p, std::size_t n) {
    if (n > n_ - pos_) throw FormatError("checkpoint ends unexpectedly");
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
  }
  template <class T>
  T le() {
    unsigned char b[sizeof(T)];
    raw(b, sizeof b);
    T v = 0;
    for (std::size_t i = 0; i < sizeof b; ++i) v |= static_cast<T>(b[i]) << (8 * i);
    return v;
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t len = u32();
    if (len > n_ - pos_) throw FormatError("checkpoint string overruns the file");
    std::string s(data_ + pos_, len);
    pos_ += len;
    return s;
  }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  const char* data_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

Matrix row_matrix(const Vector& v) { return Matrix(1, v.size(), v); }

Vector as_vector(const Matrix& m) { return Vector(m.values().begin(), m.values().end()); }

std::string join_activations(const std::vector<DenseLayer>& layers) {
  std::string s;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l) s += ",";
    s += activation_name(layers[l].activation);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void add_blocks(Checkpoint& ckpt, std::vector<ParamBlock> blocks) {
  for (auto& b : blocks)
    ckpt.tensors.push_back(
        {b.name, Matrix(b.rows, b.cols, std::vector<double>(b.values.begin(), b.values.end()))});
}

void fill_blocks(const Checkpoint& ckpt, std::vector<ParamBlock> blocks) {
  for (auto& b : blocks) {
    const Matrix& src = ckpt.tensor(b.name);
    if (src.rows() != b.rows || src.cols() != b.cols)
      throw FormatError("tensor '" + b.name + "' has shape " + shape_string(src) +
                        ", expected " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    std::copy(src.values().begin(), src.values().end(), b.values.begin());
  }
}

void add_stream(Checkpoint& ckpt, const StreamParams& s, const std::string& prefix) {
  ckpt.meta.emplace_back(prefix + ".encoder.activations", join_activations(s.encoder));
  ckpt.meta.emplace_back(prefix + ".delta.window", std::to_string(s.delta.window));
  if (!s.input_mean.empty()) {
    ckpt.tensors.push_back({prefix + ".norm.mean", row_matrix(s.input_mean)});
    ckpt.tensors.push_back({prefix + ".norm.stddev", row_matrix(s.input_stddev)});
  }
  StreamParams copy = s;
  add_blocks(ckpt, param_blocks(copy, prefix));
}

// Builds a zero stream with the shapes recorded under `prefix`, then fills it.
StreamParams read_stream(const Checkpoint& ckpt, const std::string& prefix) {
  StreamParams s;
  const auto acts = split(ckpt.get_meta(prefix + ".encoder.activations"), ',');
  for (std::size_t l = 0; l < acts.size(); ++l) {
    const Matrix& w = ckpt.tensor(prefix + ".encoder." + std::to_string(l) + ".weights");
    s.encoder.push_back(
        DenseLayer{Matrix(w.rows(), w.cols()), Vector(w.rows(), 0.0), parse_activation(acts[l])});
  }
  if (s.encoder.empty()) throw FormatError("stream '" + prefix + "' has no encoder layers");
  s.delta.window = std::stoul(ckpt.get_meta(prefix + ".delta.window"));
  const Matrix& w = ckpt.tensor(prefix + ".blstm.fwd.input.W");
  s.blstm.forward = LstmParams::zeros(w.cols(), w.rows());
  s.blstm.backward = LstmParams::zeros(w.cols(), w.rows());
  if (ckpt.has_tensor(prefix + ".norm.mean")) {
    s.input_mean = as_vector(ckpt.tensor(prefix + ".norm.mean"));
    s.input_stddev = as_vector(ckpt.tensor(prefix + ".norm.stddev"));
  }
  fill_blocks(ckpt, param_blocks(s, prefix));
  s.validate();
  return s;
}

DenseLayer read_dense(const Checkpoint& ckpt, const std::string& prefix, Activation act) {
  DenseLayer d;
  d.weights = ckpt.tensor(prefix + ".weights");
  d.bias = as_vector(ckpt.tensor(prefix + ".bias"));
  d.activation = act;
  if (d.bias.size() != d.weights.rows()) throw FormatError("'" + prefix + "' bias mismatch");
  return d;
}

void expect_kind(const Checkpoint& ckpt, const std::string& kind) {
  if (ckpt.kind != kind)
    throw FormatError("expected a '" + kind + "' checkpoint, found '" + ckpt.kind + "'");
}

}  // namespace

const std::string& Checkpoint::get_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  throw FormatError("checkpoint metadata lacks '" + key + "'");
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw FormatError("checkpoint lacks tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

std::vector<char> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(ckpt.kind);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    w.str(t.name);
    w.u64(t.value.rows());
    w.u64(t.value.cols());
  }
  for (const auto& t : ckpt.tensors)
    for (double v : t.value.values()) w.f64(v);
  const std::uint64_t sum = fnv1a(w.bytes().data(), w.bytes().size());
  w.u64(sum);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::vector<char>& bytes) {
  if (bytes.size() < sizeof kMagic + 8)
    throw ChecksumError("checkpoint truncated (" + std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("not an avfusion checkpoint (bad magic)");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored;
  {
    Reader tail(bytes.data() + body, 8);
    stored = tail.u64();
  }
  if (stored != fnv1a(bytes.data(), body))
    throw ChecksumError("checkpoint checksum mismatch (truncated or corrupt file)");

  Reader r(bytes.data(), body);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  Checkpoint ckpt;
  ckpt.kind = r.str();
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    std::string v = r.str();
    ckpt.meta.emplace_back(std::move(k), std::move(v));
  }
  const std::uint32_t n_tensors = r.u32();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> shapes;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (cols != 0 && rows > r.remaining() / 8 / cols)
      throw FormatError("tensor '" + name + "' larger than the file");
    shapes.emplace_back(rows, cols);
    ckpt.tensors.push_back({std::move(name), Matrix()});
  }
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto [rows, cols] = shapes[i];
    if (cols != 0 && rows > r.remaining() / 8 / cols)
      throw FormatError("tensor data truncated");
    std::vector<double> data(rows * cols);
    for (double& v : data) v = r.f64();
    ckpt.tensors[i].value = Matrix(rows, cols, std::move(data));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after tensor data");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::vector<char> bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Checkpoint to_checkpoint(const PretrainedEncoder& e) {
  Checkpoint ckpt;
  ckpt.kind = "encoder";
  ckpt.meta.emplace_back("encoder.activations", join_activations(e.layers));
  if (!e.input_mean.empty()) {
    ckpt.tensors.push_back({"encoder.norm.mean", row_matrix(e.input_mean)});
    ckpt.tensors.push_back({"encoder.norm.stddev", row_matrix(e.input_stddev)});
  }
  for (std::size_t l = 0; l < e.layers.size(); ++l) {
    const std::string p = "encoder." + std::to_string(l);
    ckpt.tensors.push_back({p + ".weights", e.layers[l].weights});
    ckpt.tensors.push_back({p + ".bias", row_matrix(e.layers[l].bias)});
  }
  return ckpt;
}

Checkpoint to_checkpoint(const StreamModel& m) {
  Checkpoint ckpt;
  ckpt.kind = "stream";
  add_stream(ckpt, m.stream, "stream");
  ckpt.tensors.push_back({"output.weights", m.output.weights});
  ckpt.tensors.push_back({"output.bias", row_matrix(m.output.bias)});
  return ckpt;
}

Checkpoint to_checkpoint(const FusionModel& m) {
  Checkpoint ckpt;
  ckpt.kind = "fusion";
  ckpt.meta.emplace_back("streams", std::to_string(m.streams.size()));
  for (std::size_t k = 0; k < m.streams.size(); ++k)
    add_stream(ckpt, m.streams[k], "streams." + std::to_string(k));
  // A stream-less view yields just the fusion and output blocks.
  FusionModel view;
  view.fusion = m.fusion;
  view.output = m.output;
  add_blocks(ckpt, param_blocks(view));
  return ckpt;
}

PretrainedEncoder encoder_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "encoder");
  PretrainedEncoder e;
  const auto acts = split(ckpt.get_meta("encoder.activations"), ',');
  for (std::size_t l = 0; l < acts.size(); ++l)
    e.layers.push_back(read_dense(ckpt, "encoder." + std::to_string(l), parse_activation(acts[l])));
  if (ckpt.has_tensor("encoder.norm.mean")) {
    e.input_mean = as_vector(ckpt.tensor("encoder.norm.mean"));
    e.input_stddev = as_vector(ckpt.tensor("encoder.norm.stddev"));
  }
  return e;
}

StreamModel stream_model_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "stream");
  StreamModel m;
  m.stream = read_stream(ckpt, "stream");
  m.output = read_dense(ckpt, "output", Activation::kLinear);
  if (m.output.in_dim() != m.stream.output_dim())
    throw FormatError("stream output layer does not match the BLSTM width");
  return m;
}

FusionModel fusion_model_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "fusion");
  FusionModel m;
  const std::size_t n = std::stoul(ckpt.get_meta("streams"));
  for (std::size_t k = 0; k < n; ++k)
    m.streams.push_back(read_stream(ckpt, "streams." + std::to_string(k)));
  const Matrix& w = ckpt.tensor("fusion.fwd.input.W");
  m.fusion.forward = LstmParams::zeros(w.cols(), w.rows());
  m.fusion.backward = LstmParams::zeros(w.cols(), w.rows());
  m.output = read_dense(ckpt, "output", Activation::kLinear);
  FusionModel view;
  view.fusion = m.fusion;
  view.output = m.output;
  fill_blocks(ckpt, param_blocks(view));
  m.fusion = std::move(view.fusion);
  m.output = std::move(view.output);
  try {
    m.validate();
  } catch (const ShapeError& e) {
    throw FormatError(std::string("inconsistent fusion checkpoint: ") + e.what());
  }
  return m;
}

StreamParams stream_from_checkpoint(const Checkpoint& ckpt, std::size_t index) {
  if (ckpt.kind == "stream") {
    if (index != 0) throw FormatError("single-stream checkpoint has only stream 0");
    return read_stream(ckpt, "stream");
  }
  expect_kind(ckpt, "fusion");
  const std::size_t n = std::stoul(ckpt.get_meta("streams"));
  if (index >= n) throw FormatError("fusion checkpoint has " + std::to_string(n) + " streams");
  return read_stream(ckpt, "streams." + std::to_string(index));
}

}  // namespace avf
