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

#include "teachpro/encoder_frontend.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "teachpro/error.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

uint64_t matrix_checksum(const Matrix& m, uint64_t seed) {
  uint64_t h = mix64(seed, static_cast<uint64_t>(m.rows()) * 1000003ULL + static_cast<uint64_t>(m.cols()));
  const auto* bytes = reinterpret_cast<const char*>(m.data());
  return fnv1a(std::string_view(bytes, static_cast<size_t>(m.size()) * sizeof(double)), h);
}

// --- StubEmbedder --------------------------------------------------------------

namespace {

RowVector unit_gaussian(int dim, uint64_t seed) {
  Rng rng(seed);
  RowVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v / v.norm();
}

constexpr uint64_t kTokenSalt = 0x746f6b656eULL;
constexpr uint64_t kPositionSalt = 0x706f73ULL;

}  // namespace

StubEmbedder::StubEmbedder(int dim, uint64_t seed, double position_scale)
    : dim_(dim), seed_(seed), position_scale_(position_scale) {
  if (dim < 1) throw ConfigError("embedding dimension must be positive");
}

RowVector StubEmbedder::token_vector(uint64_t id) const {
  return unit_gaussian(dim_, mix64(mix64(seed_, kTokenSalt), id));
}

RowVector StubEmbedder::position_vector(size_t position) const {
  return unit_gaussian(dim_, mix64(mix64(seed_, kPositionSalt), position));
}

EmbeddingMatrix StubEmbedder::embed(const TokenSequence& tokens) const {
  if (tokens.empty()) throw EmptyText("cannot embed an empty sequence");
  EmbeddingMatrix out;
  out.source_id = source_id();
  out.values.resize(static_cast<Eigen::Index>(tokens.size()), dim_);
  for (size_t i = 0; i < tokens.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) =
        (token_vector(tokens.ids[i]) + position_scale_ * position_vector(i)).normalized();
  }
  return out;
}

uint64_t StubEmbedder::checksum() const {
  TokenSequence probe;
  for (uint64_t i = 0; i < 4; ++i) {
    probe.ids.push_back(i);
    probe.texts.push_back(std::to_string(i));
    probe.spans.push_back({i, i + 1});
  }
  uint64_t h = mix64(seed_, static_cast<uint64_t>(dim_));
  uint64_t scale_bits;
  std::memcpy(&scale_bits, &position_scale_, sizeof scale_bits);
  return matrix_checksum(embed(probe).values, mix64(h, scale_bits));
}

// --- PrecomputedEmbedder ---------------------------------------------------------

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string key;
  for (const auto& t : tokens) {
    key += t;
    key += '\x1f';
  }
  return key;
}

}  // namespace

PrecomputedEmbedder::PrecomputedEmbedder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProviderUnavailable("cannot open embedding file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  checksum_ = fnv1a(content);

  std::istringstream lines(content);
  std::string line;
  size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto row = nlohmann::json::parse(line);
      if (model_.empty()) model_ = row.value("model", std::string("pretrained"));
      const auto tokens = row.at("tokens").get<std::vector<std::string>>();
      const auto& emb = row.at("embeddings");
      if (emb.size() != tokens.size() || tokens.empty()) {
        throw ProviderUnavailable("token/embedding count mismatch");
      }
      const int d = static_cast<int>(emb.at(0).size());
      if (dim_ == 0) dim_ = d;
      if (d != dim_ || d == 0) throw ProviderUnavailable("inconsistent embedding width");
      Matrix m(static_cast<Eigen::Index>(tokens.size()), d);
      for (size_t i = 0; i < tokens.size(); ++i) {
        const auto& r = emb.at(i);
        if (static_cast<int>(r.size()) != d) throw ProviderUnavailable("ragged embedding row");
        for (int j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), j) = r.at(j).get<double>();
      }
      table_[join_tokens(tokens)] = std::move(m);
    } catch (const nlohmann::json::exception& e) {
      throw ProviderUnavailable(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ProviderUnavailable& e) {
      throw ProviderUnavailable(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (table_.empty()) throw ProviderUnavailable("embedding file " + path.string() + " is empty");
}

EmbeddingMatrix PrecomputedEmbedder::embed(const TokenSequence& tokens) const {
  const auto it = table_.find(join_tokens(tokens.texts));
  if (it == table_.end()) {
    throw ProviderUnavailable("no exported embeddings for a " + std::to_string(tokens.size()) +
                              "-token sequence");
  }
  return {it->second, model_};
}

// --- Arc providers ----------------------------------------------------------------

ArcMatrix ChainArcProvider::arc_probabilities(const TokenSequence& tokens) const {
  const auto n = static_cast<Eigen::Index>(tokens.size());
  ArcMatrix arcs{Matrix::Zero(n, n)};
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    arcs.values(i, i + 1) = score_;
    arcs.values(i + 1, i) = score_;
  }
  return arcs;
}

uint64_t ChainArcProvider::checksum() const {
  uint64_t bits;
  std::memcpy(&bits, &score_, sizeof bits);
  return mix64(0x636861696eULL, bits);
}

ParseFileArcProvider::ParseFileArcProvider(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProviderUnavailable("cannot open parse file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  checksum_ = fnv1a(content);

  std::istringstream lines(content);
  std::string line;
  size_t line_no = 0;
  Sentence current;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    for (int h : current.heads) {
      if (h < 0 || h > static_cast<int>(current.tokens.size())) {
        throw ParseFileMismatch("head index out of range in sentence " +
                                std::to_string(sentences_.size() + 1));
      }
    }
    by_first_token_.emplace(current.tokens.front(), sentences_.size());
    sentences_.push_back(std::move(current));
    current = {};
  };
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::istringstream fields(line);
    std::string index, token, head;
    if (!std::getline(fields, index, '\t') || !std::getline(fields, token, '\t') ||
        !std::getline(fields, head, '\t')) {
      throw ParseFileMismatch("line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    try {
      if (std::stoi(index) != static_cast<int>(current.tokens.size()) + 1) {
        throw ParseFileMismatch("line " + std::to_string(line_no) + ": indices must count up from 1");
      }
      current.heads.push_back(std::stoi(head));
    } catch (const std::invalid_argument&) {
      throw ParseFileMismatch("line " + std::to_string(line_no) + ": non-numeric index");
    }
    current.tokens.push_back(token);
  }
  flush();
}

ArcMatrix ParseFileArcProvider::arc_probabilities(const TokenSequence& tokens) const {
  if (tokens.empty()) throw ParseFileMismatch("empty token sequence");
  const size_t n = tokens.size();
  const auto [lo, hi] = by_first_token_.equal_range(tokens.texts.front());
  const Sentence* match = nullptr;
  size_t mismatch_len = 0;
  for (auto it = lo; it != hi; ++it) {
    const Sentence& s = sentences_[it->second];
    const size_t common = std::min(n, s.tokens.size());
    if (!std::equal(tokens.texts.begin(), tokens.texts.begin() + static_cast<long>(common),
                    s.tokens.begin())) {
      continue;
    }
    if (s.tokens.size() == n || (tokens.truncated && s.tokens.size() > n)) {
      match = &s;
      break;
    }
    mismatch_len = s.tokens.size();
  }
  if (match == nullptr) {
    if (mismatch_len != 0) {
      throw ParseFileMismatch("parse has " + std::to_string(mismatch_len) + " tokens, sequence has " +
                              std::to_string(n));
    }
    throw ParseFileMismatch("no parse for a " + std::to_string(n) + "-token sequence");
  }
  const auto size = static_cast<Eigen::Index>(n);
  ArcMatrix arcs{Matrix::Zero(size, size)};
  for (size_t t = 0; t < n; ++t) {
    const int h = match->heads[t];
    if (h > 0 && static_cast<size_t>(h) <= n) {
      arcs.values(h - 1, static_cast<Eigen::Index>(t)) = 1.0;
    }
  }
  return arcs;
}

}  // namespace teachpro
