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

#include "teachpro/tokenizer.hpp"

#include <cctype>

#include "teachpro/error.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

uint64_t token_id(std::string_view token) {
  std::string lower(token);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return fnv1a(lower);
}

namespace {

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

TokenSequence WhitespacePunctTokenizer::tokenize(std::string_view text,
                                                 size_t max_len) const {
  TokenSequence seq;
  size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    size_t end = i + 1;
    if (!is_punct(c)) {
      while (end < text.size()) {
        const auto d = static_cast<unsigned char>(text[end]);
        if (is_space(d) || is_punct(d)) break;
        ++end;
      }
    }
    if (seq.size() == max_len) {
      seq.truncated = true;
      break;
    }
    const std::string_view tok = text.substr(i, end - i);
    seq.ids.push_back(token_id(tok));
    seq.texts.emplace_back(tok);
    seq.spans.push_back({i, end});
    i = end;
  }
  if (seq.empty()) throw EmptyText("text contains no tokens");
  return seq;
}

TokenSequence tokenize(std::string_view text, size_t max_len) {
  static const WhitespacePunctTokenizer tokenizer;
  return tokenizer.tokenize(text, max_len);
}

TokenSequence subsequence(const TokenSequence& seq, std::span<const int> positions) {
  TokenSequence out;
  for (int p : positions) {
    const auto i = static_cast<size_t>(p);
    out.ids.push_back(seq.ids.at(i));
    out.texts.push_back(seq.texts.at(i));
    out.spans.push_back(seq.spans.at(i));
  }
  return out;
}

}  // namespace teachpro
