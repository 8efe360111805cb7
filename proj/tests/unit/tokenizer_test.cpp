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

#include <gtest/gtest.h>

#include "teachpro/error.hpp"
#include "teachpro/tokenizer.hpp"

namespace teachpro {
namespace {

TEST(Tokenize, TwoWords) {
  const auto t = tokenize("great teacher");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.spans[0], (CharSpan{0, 5}));
  EXPECT_EQ(t.spans[1], (CharSpan{6, 13}));
  EXPECT_EQ(t.texts[1], "teacher");
  EXPECT_FALSE(t.truncated);
}

TEST(Tokenize, PunctuationIsSplit) {
  const auto t = tokenize("Good,  clear!");
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t.texts[0], "Good");
  EXPECT_EQ(t.texts[1], ",");
  EXPECT_EQ(t.texts[3], "!");
}

TEST(Tokenize, Truncation) {
  std::string text;
  for (int i = 0; i < 200; ++i) text += "word" + std::to_string(i) + " ";
  const auto t = tokenize(text, 128);
  EXPECT_EQ(t.size(), 128u);
  EXPECT_TRUE(t.truncated);
  EXPECT_EQ(t.texts.back(), "word127");
}

TEST(Tokenize, SpansReproduceSubstrings) {
  const std::string text = "The lecture was (mostly) clear; exams... fair?  Yes!";
  const auto t = tokenize(text);
  for (size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(text.substr(t.spans[i].begin, t.spans[i].end - t.spans[i].begin), t.texts[i]);
    if (i) EXPECT_GE(t.spans[i].begin, t.spans[i - 1].end);
  }
  // Only whitespace lies between consecutive spans.
  std::string stripped, joined;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) stripped += c;
  for (const auto& s : t.texts) joined += s;
  EXPECT_EQ(joined, stripped);
}

TEST(Tokenize, IdsDependOnTextOnly) {
  const auto a = tokenize("clear notes");
  const auto b = tokenize("notes clear");
  EXPECT_EQ(a.ids[0], b.ids[1]);
  EXPECT_EQ(a.ids[0], token_id("clear"));
  EXPECT_NE(a.ids[0], a.ids[1]);
}

TEST(Tokenize, EmptyTextThrows) {
  EXPECT_THROW(tokenize(""), EmptyText);
  EXPECT_THROW(tokenize("   \n\t"), EmptyText);
}

TEST(Tokenize, Subsequence) {
  const auto t = tokenize("a b c d");
  const std::vector<int> pos = {1, 3};
  const auto s = subsequence(t, pos);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.texts[0], "b");
  EXPECT_EQ(s.texts[1], "d");
  EXPECT_EQ(s.ids[1], t.ids[3]);
}

}  // namespace
}  // namespace teachpro
