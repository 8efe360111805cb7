// Copyright 2026 The TeachPro Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "teachpro/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "teachpro/error.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put<uint64_t>(out, s.size());
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes, size_t end) : bytes_(bytes), end_(end) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string() {
    const uint64_t n = get<uint64_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void read_doubles(double* dst, uint64_t count) {
    if (count > (end_ - pos_) / sizeof(double)) throw CorruptCheckpoint("truncated tensor data");
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }

  bool done() const { return pos_ == end_; }

 private:
  void need(uint64_t n) const {
    if (n > end_ - pos_) throw CorruptCheckpoint("truncated checkpoint");
  }

  const std::string& bytes_;
  size_t end_;
  size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ParamStore& params, const Config& config) {
  std::string out(kMagic, 4);
  put<uint32_t>(out, kCheckpointVersion);
  put<uint64_t>(out, config.model_hash());
  put_string(out, config.to_text());
  put<uint64_t>(out, params.entries().size());
  for (const auto& [name, var] : params.entries()) {
    const Matrix& m = var.value();
    put_string(out, name);
    put<uint64_t>(out, static_cast<uint64_t>(m.rows()));
    put<uint64_t>(out, static_cast<uint64_t>(m.cols()));
    out.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double));
  }
  put<uint64_t>(out, fnv1a(out));
  return out;
}

void save_checkpoint(const ParamStore& params, const Config& config,
                     const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(params, config);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write checkpoint " + path.string());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 + 4 + 8 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CorruptCheckpoint("bad magic");
  }
  const size_t body = bytes.size() - sizeof(uint64_t);
  uint64_t stored_sum;
  std::memcpy(&stored_sum, bytes.data() + body, sizeof(uint64_t));
  if (fnv1a(std::string_view(bytes.data(), body)) != stored_sum) {
    throw CorruptCheckpoint("checksum mismatch");
  }
  Reader r(bytes, body);
  r.get<uint32_t>();  // magic
  const uint32_t version = r.get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw CorruptCheckpoint("unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config_hash = r.get<uint64_t>();
  ck.config_text = r.get_string();
  const uint64_t count = r.get<uint64_t>();
  for (uint64_t i = 0; i < count; ++i) {
    std::string name = r.get_string();
    const auto rows = r.get<uint64_t>();
    const auto cols = r.get<uint64_t>();
    if (rows > (1u << 24) || cols > (1u << 24)) throw CorruptCheckpoint("implausible shape for " + name);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    r.read_doubles(m.data(), rows * cols);
    ck.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!r.done()) throw CorruptCheckpoint("trailing bytes");
  return ck;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptCheckpoint("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void restore_parameters(const Checkpoint& ck, ParamStore& params, uint64_t expected_hash) {
  if (ck.config_hash != expected_hash) throw ConfigMismatch("checkpoint was trained under a different model config");
  if (Config::parse(ck.config_text).model_hash() != ck.config_hash) {
    throw ConfigMismatch("stored config hash does not match the stored config");
  }
  if (ck.tensors.size() != params.entries().size()) {
    throw CorruptCheckpoint("tensor count " + std::to_string(ck.tensors.size()) + " != " +
                            std::to_string(params.entries().size()));
  }
  for (size_t i = 0; i < ck.tensors.size(); ++i) {
    auto& [name, var] = params.entries()[i];
    const auto& [stored_name, value] = ck.tensors[i];
    if (name != stored_name) throw CorruptCheckpoint("expected tensor " + name + ", found " + stored_name);
    if (value.rows() != var.rows() || value.cols() != var.cols()) {
      throw CorruptCheckpoint("shape mismatch for " + name);
    }
    var.mutable_value() = value;
  }
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  const Checkpoint ck = read_checkpoint(path);
  LoadedModel out;
  out.config = Config::parse(ck.config_text);
  if (out.config.model_hash() != ck.config_hash) {
    throw ConfigMismatch("stored config hash does not match the stored config");
  }
  // Initial values are overwritten below; the seed only fixes shapes.
  out.model = std::make_unique<TeachProModel>(ModelConfig::from_config(out.config),
                                              make_embedder(out.config), make_parser(out.config), 0);
  restore_parameters(ck, out.model->params(), out.config.model_hash());
  return out;
}

}  // namespace teachpro
