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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace teachpro {

inline constexpr size_t kDefaultMaxLen = 128;

// Byte offsets [begin, end) into the source text.
struct CharSpan {
  size_t begin = 0;
  size_t end = 0;
  bool operator==(const CharSpan&) const = default;
};

struct TokenSequence {
  std::vector<uint64_t> ids;
  std::vector<std::string> texts;
  std::vector<CharSpan> spans;
  // True when tokens past max_len were dropped.
  bool truncated = false;

  size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

// Stable id of a token string: FNV-1a of its ASCII-lowercased bytes.
uint64_t token_id(std::string_view token);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  // Throws EmptyText when the text holds no tokens.
  virtual TokenSequence tokenize(std::string_view text,
                                 size_t max_len = kDefaultMaxLen) const = 0;
  virtual std::string name() const = 0;
};

// Splits on whitespace; every ASCII punctuation character becomes its own
// token; bytes >= 0x80 are treated as word characters so UTF-8 words stay
// whole.
class WhitespacePunctTokenizer final : public Tokenizer {
 public:
  TokenSequence tokenize(std::string_view text,
                         size_t max_len = kDefaultMaxLen) const override;
  std::string name() const override { return "whitespace-punct"; }
};

// Shorthand for the default tokenizer.
TokenSequence tokenize(std::string_view text, size_t max_len = kDefaultMaxLen);

// Tokens at the given positions, in that order, as a standalone sequence.
TokenSequence subsequence(const TokenSequence& seq, std::span<const int> positions);

}  // namespace teachpro
