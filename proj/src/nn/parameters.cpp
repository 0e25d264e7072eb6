// Copyright 2026 The qalloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qalloc/nn/parameters.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qalloc/errors.hpp"

namespace qalloc::nn {

namespace {

constexpr char kMagic[8] = {'Q', 'A', 'L', 'L', 'O', 'C', 'K', 'P'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    out_.append(p, n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::string& buffer() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& in, std::size_t end) : in_(in), end_(end) {}

  void need(std::size_t n) const {
    if (pos_ + n > end_) fail(ErrorKind::Checkpoint, "checkpoint is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t position() const { return pos_; }

 private:
  const std::string& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

void write_tensor_data(Writer& w, const Tensor& t) {
  for (double v : t.data()) w.f64(v);
}

Tensor read_tensor_data(Reader& r, const std::vector<std::size_t>& shape) {
  Tensor t(shape);
  for (double& v : t.data()) v = r.f64();
  return t;
}

}  // namespace

Var ParameterStore::add(std::string name, Tensor init) {
  for (const auto& e : entries_) {
    if (e.name == name) fail(ErrorKind::InvalidArgument, "duplicate parameter name '" + name + "'");
  }
  Tensor m(init.shape(), 0.0);
  Tensor v(init.shape(), 0.0);
  Var p = parameter(std::move(init));
  entries_.push_back({std::move(name), p, std::move(m), std::move(v)});
  return p;
}

Var ParameterStore::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.param;
  }
  return nullptr;
}

std::size_t ParameterStore::num_parameters() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.param->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.param->grad = Tensor();
}

void ParameterStore::assign_from(const ParameterStore& other) {
  if (other.entries_.size() != entries_.size()) {
    fail(ErrorKind::Checkpoint, "parameter count differs from model");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& src = other.entries_[i];
    auto& dst = entries_[i];
    if (src.name != dst.name || src.param->value.shape() != dst.param->value.shape()) {
      fail(ErrorKind::Checkpoint, "parameter '" + src.name + "' does not match model layout");
    }
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].param->value = other.entries_[i].param->value;
    entries_[i].first_moment = other.entries_[i].first_moment;
    entries_[i].second_moment = other.entries_[i].second_moment;
  }
  step = other.step;
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Tensor t({fan_in, fan_out});
  for (double& v : t.data()) v = u(rng);
  return t;
}

void adam_step(ParameterStore& store, const AdamConfig& config) {
  for (const auto& e : store.entries()) {
    for (double g : e.param->grad.data()) {
      if (!std::isfinite(g)) {
        fail(ErrorKind::Numeric, "non-finite gradient in parameter '" + e.name + "'");
      }
    }
  }
  ++store.step;
  const double t = static_cast<double>(store.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto& e : store.entries()) {
    Tensor& value = e.param->value;
    const Tensor& grad = e.param->grad;
    const bool has_grad = grad.size() == value.size();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = has_grad ? grad[i] : 0.0;
      e.first_moment[i] = config.beta1 * e.first_moment[i] + (1.0 - config.beta1) * g;
      e.second_moment[i] = config.beta2 * e.second_moment[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = e.first_moment[i] / c1;
      const double v_hat = e.second_moment[i] / c2;
      value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

std::string encode_checkpoint(const ParameterStore& store, const std::string& config_json) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(config_json);
  w.u64(store.step);
  w.u64(store.entries().size());
  for (const auto& e : store.entries()) {
    w.str(e.name);
    const auto& shape = e.param->value.shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) w.u64(d);
    write_tensor_data(w, e.param->value);
    write_tensor_data(w, e.first_moment);
    write_tensor_data(w, e.second_moment);
  }
  std::string& buf = w.buffer();
  w.u32(checksum(buf.data(), buf.size()));
  return buf;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 4 + 4) fail(ErrorKind::Checkpoint, "checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    fail(ErrorKind::Checkpoint, "not a checkpoint file (bad magic)");
  }
  const std::size_t body = bytes.size() - 4;
  Reader r(bytes, body);
  r.raw(sizeof kMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::Checkpoint, "unsupported checkpoint version " + std::to_string(version) +
                                    " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Reader tail(bytes, bytes.size());
  tail.raw(body);
  if (tail.u32() != checksum(bytes.data(), body)) {
    fail(ErrorKind::Checkpoint, "checkpoint checksum mismatch (file corrupt or truncated)");
  }
  Checkpoint ck;
  ck.config_json = r.str();
  ck.store.step = r.u64();
  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const std::uint32_t ndim = r.u32();
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = r.u64();
    r.need(element_count(shape) * 8 * 3);
    Tensor value = read_tensor_data(r, shape);
    Tensor m = read_tensor_data(r, shape);
    Tensor v = read_tensor_data(r, shape);
    ck.store.add(std::move(name), std::move(value));
    ck.store.entries().back().first_moment = std::move(m);
    ck.store.entries().back().second_moment = std::move(v);
  }
  if (r.position() != body) fail(ErrorKind::Checkpoint, "trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const ParameterStore& store, const std::string& config_json,
                     const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(store, config_json);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Checkpoint, "cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace qalloc::nn
