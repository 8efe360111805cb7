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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "teachpro/autograd.hpp"
#include "teachpro/tokenizer.hpp"

namespace teachpro {

inline constexpr int kDefaultHiddenDim = 768;

// Contextual token embeddings (n x d) tagged with the provider that made them.
struct EmbeddingMatrix {
  Matrix values;
  std::string source_id;
};

// Frozen source of token embeddings. Implementations are immutable after
// construction and safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingMatrix embed(const TokenSequence& tokens) const = 0;
  virtual int dim() const = 0;
  virtual std::string source_id() const = 0;
  // Digest of everything that determines the provider's output.
  virtual uint64_t checksum() const = 0;
};

// Training-free stand-in for a pretrained encoder. Row i is the unit vector
// along
//   token_vector(id_i) + position_scale * position_vector(i)
// where both vectors are unit-norm Gaussian draws seeded by hashing the token
// id (resp. the position) with the provider seed. Sharing the token part
// across positions keeps a word recognisable wherever it occurs.
class StubEmbedder final : public EmbeddingProvider {
 public:
  explicit StubEmbedder(int dim = kDefaultHiddenDim, uint64_t seed = 0,
                        double position_scale = 0.1);

  EmbeddingMatrix embed(const TokenSequence& tokens) const override;
  int dim() const override { return dim_; }
  std::string source_id() const override { return "stub"; }
  uint64_t checksum() const override;

  RowVector token_vector(uint64_t id) const;
  RowVector position_vector(size_t position) const;
  double position_scale() const { return position_scale_; }

 private:
  int dim_;
  uint64_t seed_;
  double position_scale_;
};

// Embeddings exported offline from a pretrained masked language model
// (last-layer hidden states, averaged over sub-words of each token). File
// format, one JSON object per line:
//   {"model": "<name>", "tokens": ["great", "teacher"], "embeddings": [[...], [...]]}
// Lookups are keyed by the exact token strings of a sequence.
class PrecomputedEmbedder final : public EmbeddingProvider {
 public:
  // Throws ProviderUnavailable when the file is missing or unreadable.
  explicit PrecomputedEmbedder(const std::filesystem::path& path);

  // Throws ProviderUnavailable when the sequence was not exported.
  EmbeddingMatrix embed(const TokenSequence& tokens) const override;
  int dim() const override { return dim_; }
  std::string source_id() const override { return model_; }
  uint64_t checksum() const override { return checksum_; }

 private:
  std::map<std::string, Matrix> table_;
  std::string model_;
  int dim_ = 0;
  uint64_t checksum_ = 0;
};

// Arc scores: entry (i, j) = Pr(arc i -> j | x), all in [0, 1].
struct ArcMatrix {
  Matrix values;
};

class ArcProvider {
 public:
  virtual ~ArcProvider() = default;
  virtual ArcMatrix arc_probabilities(const TokenSequence& tokens) const = 0;
  virtual std::string name() const = 0;
  virtual uint64_t checksum() const = 0;
};

// Links each token to its neighbours in both directions.
class ChainArcProvider final : public ArcProvider {
 public:
  explicit ChainArcProvider(double score = 0.9) : score_(score) {}
  ArcMatrix arc_probabilities(const TokenSequence& tokens) const override;
  std::string name() const override { return "chain"; }
  uint64_t checksum() const override;

 private:
  double score_;
};

// Replays hard parses from a file with one token per line,
//   index<TAB>token<TAB>head_index
// (1-based indices, head 0 = root) and a blank line between sentences. Each
// listed head h of token t yields probability 1 on arc h -> t.
class ParseFileArcProvider final : public ArcProvider {
 public:
  // Throws ProviderUnavailable if the file cannot be read, ParseFileMismatch
  // on malformed lines.
  explicit ParseFileArcProvider(const std::filesystem::path& path);

  // Finds the sentence with the same tokens. A sentence longer than a
  // truncated token sequence is cropped; any other length difference throws
  // ParseFileMismatch.
  ArcMatrix arc_probabilities(const TokenSequence& tokens) const override;
  std::string name() const override { return "file"; }
  uint64_t checksum() const override { return checksum_; }

  size_t sentence_count() const { return sentences_.size(); }

 private:
  struct Sentence {
    std::vector<std::string> tokens;
    std::vector<int> heads;  // 1-based, 0 = root
  };
  std::vector<Sentence> sentences_;
  std::multimap<std::string, size_t> by_first_token_;
  uint64_t checksum_ = 0;
};

// Digest of a matrix's bytes, used for the frozen-provider checks.
uint64_t matrix_checksum(const Matrix& m, uint64_t seed = 0);

}  // namespace teachpro
