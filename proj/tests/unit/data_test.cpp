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

#include <cmath>
#include <set>
#include <sstream>

#include "teachpro/data.hpp"
#include "teachpro/error.hpp"
#include "teachpro/tokenizer.hpp"

namespace teachpro {
namespace {

CommentRecord valid_record() {
  CommentRecord r;
  r.professor_name = "Dr. Lee";
  r.text = "great teacher, but the exams were brutal";
  r.scores = {2, 1, 1, 2, 0};
  r.reasons = {"great teacher", "", "", "great teacher", "the exams were brutal"};
  return r;
}

TEST(LoadDataset, SingleValidRow) {
  std::stringstream ss;
  const std::vector<CommentRecord> in = {valid_record()};
  write_jsonl(in, ss);
  const auto out = read_jsonl(ss);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], in[0]);
}

TEST(LoadDataset, ScoreOutOfRangeIsMalformed) {
  std::stringstream ss;
  auto r = valid_record();
  r.scores[3] = 3;
  ss << R"({"professor_name":"x","comments":"great teacher","Professionalism_score":2,)"
     << R"("Occupational_score":1,"Effectiveness_score":1,"Quality_score":3,"Other_score":0})" << '\n';
  EXPECT_THROW(read_jsonl(ss), MalformedRow);
  EXPECT_THROW(validate_record(r), MalformedRow);
}

TEST(LoadDataset, ReasonMustBeSubstring) {
  auto r = valid_record();
  r.reasons[0] = "not in the text";
  EXPECT_THROW(validate_record(r), MalformedRow);
}

TEST(LoadDataset, SyntheticFileRoundTripsThroughBothFormats) {
  const auto records = generate_synthetic(100, 50, 3);
  for (DataFormat fmt : {DataFormat::kJsonl, DataFormat::kCsv}) {
    const auto path = std::filesystem::temp_directory_path() /
                      (fmt == DataFormat::kCsv ? "tp_data_test.csv" : "tp_data_test.jsonl");
    save_dataset(records, path, fmt);
    const auto back = load_dataset(path, fmt);
    ASSERT_EQ(back.size(), 100u);
    EXPECT_EQ(back, records);
    // Re-scan: every reason is a substring of its text.
    for (const auto& r : back)
      for (const auto& reason : r.reasons) EXPECT_NE(r.text.find(reason), std::string::npos);
    std::filesystem::remove(path);
  }
}

TEST(LoadDataset, MissingFileThrows) {
  EXPECT_ANY_THROW(load_dataset("/nonexistent/records.jsonl", DataFormat::kJsonl));
}

TEST(SplitDataset, TenRecords) {
  const auto records = generate_synthetic(10, 20, 1);
  const auto s = split_dataset(records, {}, 7);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.validation.size() + s.test.size(), 3u);
  EXPECT_GE(s.validation.size(), 1u);
  EXPECT_GE(s.test.size(), 1u);
}

TEST(SplitDataset, PublishedCorpusSizes) {
  std::vector<CommentRecord> records(12777, valid_record());
  const auto s = split_dataset(records, {}, 0);
  EXPECT_EQ(s.train.size(), 8943u);
  EXPECT_EQ(s.validation.size(), 1917u);
  EXPECT_EQ(s.test.size(), 1917u);
}

TEST(SplitDataset, DeterministicAndPartition) {
  const auto records = generate_synthetic(57, 20, 4);
  const auto a = split_dataset(records, {}, 9);
  const auto b = split_dataset(records, {}, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size() + a.validation.size() + a.test.size(), records.size());
  const auto c = split_dataset(records, {}, 10);
  EXPECT_NE(a.train, c.train);
}

TEST(SplitDataset, BadRatios) {
  const auto records = generate_synthetic(10, 20, 1);
  EXPECT_THROW(split_dataset(records, {0.5, 0.2, 0.2}, 0), BadRatios);
  EXPECT_THROW(split_dataset(records, {1.2, -0.1, -0.1}, 0), BadRatios);
  EXPECT_THROW(split_dataset({}, {}, 0), EmptyDataset);
}

TEST(RationaleTokenSet, FullEmptyAndPartial) {
  CommentRecord r = valid_record();
  r.text = "great teacher";
  r.reasons = {"great teacher", "", "teacher", "", ""};
  const auto tokens = tokenize(r.text);
  EXPECT_EQ(rationale_token_set(r, 0, tokens), (std::vector<int>{0, 1}));
  EXPECT_TRUE(rationale_token_set(r, 1, tokens).empty());
  EXPECT_EQ(rationale_token_set(r, 2, tokens), (std::vector<int>{1}));
}

TEST(RationaleTokenSet, MatchesSpanOverlapOracle) {
  for (const auto& r : generate_synthetic(50, 30, 5)) {
    const auto tokens = tokenize(r.text);
    for (int d = 0; d < kNumDimensions; ++d) {
      const size_t b = r.text.find(r.reasons[d]);
      ASSERT_NE(b, std::string::npos);
      const size_t e = b + r.reasons[d].size();
      std::vector<int> expected;
      for (size_t t = 0; t < tokens.size(); ++t)
        if (tokens.spans[t].begin < e && tokens.spans[t].end > b) expected.push_back(static_cast<int>(t));
      EXPECT_EQ(rationale_token_set(r, d, tokens), expected);
      // Grounding: non-empty iff the reason is non-empty.
      EXPECT_EQ(expected.empty(), r.reasons[d].empty());
    }
  }
}

TEST(RationaleTokenSet, ReasonOutsideTextThrows) {
  CommentRecord r = valid_record();
  r.reasons[1] = "absent";
  EXPECT_THROW(rationale_token_set(r, 1, tokenize(r.text)), SpanNotFound);
}

TEST(GenerateSynthetic, SingleRecordIsConsistent) {
  const auto rs = generate_synthetic(1, 10, 0);
  ASSERT_EQ(rs.size(), 1u);
  const auto& r = rs[0];
  for (int d = 0; d < kNumDimensions; ++d) {
    const auto lex = synthetic_phrases(d, r.scores[d]);
    EXPECT_NE(std::find(lex.begin(), lex.end(), r.reasons[d]), lex.end());
    EXPECT_NE(r.text.find(r.reasons[d]), std::string::npos);
  }
  EXPECT_NO_THROW(validate_record(r));
}

TEST(GenerateSynthetic, LexiconsAreDisjoint) {
  std::set<std::string_view> seen;
  size_t total = 0;
  for (int d = 0; d < kNumDimensions; ++d)
    for (int s = 0; s < kNumClasses; ++s)
      for (auto p : synthetic_phrases(d, s)) {
        seen.insert(p);
        ++total;
      }
  EXPECT_EQ(seen.size(), total);
}

TEST(GenerateSynthetic, LabelFrequenciesFollowPrior) {
  const auto rs = generate_synthetic(200, 50, 0);
  const SyntheticOptions defaults;
  for (int d = 0; d < kNumDimensions; ++d) {
    std::array<int, kNumClasses> count{};
    for (const auto& r : rs) ++count[r.scores[d]];
    for (int c = 0; c < kNumClasses; ++c) {
      EXPECT_NEAR(count[c] / 200.0, defaults.prior[c], 0.10) << "dimension " << d << " class " << c;
    }
  }
}

TEST(GenerateSynthetic, Deterministic) {
  std::stringstream a, b;
  write_jsonl(generate_synthetic(30, 40, 2), a);
  write_jsonl(generate_synthetic(30, 40, 2), b);
  EXPECT_EQ(a.str(), b.str());
  std::stringstream c;
  write_jsonl(generate_synthetic(30, 40, 3), c);
  EXPECT_NE(a.str(), c.str());
}

std::vector<CommentRecord> with_columns(const std::vector<std::array<int, 5>>& rows) {
  std::vector<CommentRecord> out;
  for (const auto& s : rows) {
    CommentRecord r;
    r.text = "x";
    r.scores = s;
    out.push_back(r);
  }
  return out;
}

TEST(LabelCorrelation, IdenticalColumnsGiveAllOnes) {
  const auto rs = with_columns({{0, 0, 0, 0, 0}, {2, 2, 2, 2, 2}, {1, 1, 1, 1, 1}});
  const auto c = label_correlation(rs);
  EXPECT_TRUE(c.isApprox(Eigen::MatrixXd::Ones(5, 5), 1e-12));
}

TEST(LabelCorrelation, OppositeColumnsGiveMinusOne) {
  const auto rs = with_columns({{0, 2, 0, 1, 0}, {2, 0, 1, 0, 1}, {0, 2, 2, 1, 2}, {2, 0, 0, 2, 0}});
  const auto c = label_correlation(rs);
  EXPECT_NEAR(c(0, 1), -1.0, 1e-12);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(c(i, i), 1.0);
}

TEST(LabelCorrelation, MatchesPearsonOracleAndIsSymmetric) {
  const auto rs = generate_synthetic(80, 20, 6);
  const auto c = label_correlation(rs);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      double mi = 0, mj = 0;
      for (const auto& r : rs) {
        mi += r.scores[i];
        mj += r.scores[j];
      }
      mi /= rs.size();
      mj /= rs.size();
      double sij = 0, sii = 0, sjj = 0;
      for (const auto& r : rs) {
        sij += (r.scores[i] - mi) * (r.scores[j] - mj);
        sii += (r.scores[i] - mi) * (r.scores[i] - mi);
        sjj += (r.scores[j] - mj) * (r.scores[j] - mj);
      }
      EXPECT_NEAR(c(i, j), sij / std::sqrt(sii * sjj), 1e-12);
      EXPECT_EQ(c(i, j), c(j, i));
      EXPECT_LE(std::abs(c(i, j)), 1.0);
    }
  }
}

TEST(LabelCorrelation, Errors) {
  EXPECT_THROW(label_correlation(with_columns({{0, 1, 2, 0, 1}})), EmptyDataset);
  EXPECT_THROW(label_correlation(with_columns({{0, 1, 2, 0, 1}, {0, 2, 1, 1, 0}})), DegenerateColumn);
}

}  // namespace
}  // namespace teachpro
