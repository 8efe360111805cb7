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

#include "helpers.hpp"
#include "oracles.hpp"
#include "suites.hpp"
#include "teachpro/error.hpp"
#include "teachpro/evidence_encoder.hpp"

namespace teachpro {
namespace {

using ag::Var;
using testing_support::max_abs_diff;
using testing_support::RandomSource;
using testing_support::to_mat;
using testing_support::to_vec;

Var C(const Matrix& m) { return Var::constant(m); }

TEST(DimensionWords, StubRows) {
  const StubEmbedder e(16);
  const std::vector<std::string> words = {"Professionalism", "Occupational", "Effectiveness", "Quality", "Other"};
  const Matrix q = encode_dimension_words(words, e);
  ASSERT_EQ(q.rows(), 5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) EXPECT_GT((q.row(i) - q.row(j)).norm(), 1e-3);
  EXPECT_EQ(q.row(3), e.embed(tokenize("Quality")).values.row(0));

  const std::vector<std::string> same(5, "Quality");
  const Matrix r = encode_dimension_words(same, e);
  for (int i = 1; i < 5; ++i) EXPECT_EQ(r.row(i), r.row(0));
}

TEST(SegmentPrototypes, UniformBlocks) {
  const auto t = tokenize("a b c d e f g h i j");
  const auto s = segment_prototypes(nullptr, t, SegmentMode::kUniform);
  const std::vector<std::vector<int>> expected = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};
  EXPECT_EQ(s, expected);
}

TEST(SegmentPrototypes, ShortSequenceBorrowsLastToken) {
  const auto s = segment_prototypes(nullptr, tokenize("a b c"), SegmentMode::kUniform);
  const std::vector<std::vector<int>> expected = {{0}, {1}, {2}, {2}, {2}};
  EXPECT_EQ(s, expected);
}

TEST(SegmentPrototypes, UniformCoverIsDisjointAndComplete) {
  for (int n = 5; n < 40; ++n) {
    std::string text;
    for (int i = 0; i < n; ++i) text += "w ";
    const auto s = segment_prototypes(nullptr, tokenize(text), SegmentMode::kUniform);
    std::vector<int> all;
    for (const auto& b : s) all.insert(all.end(), b.begin(), b.end());
    ASSERT_EQ(static_cast<int>(all.size()), n);
    for (int i = 0; i < n; ++i) EXPECT_EQ(all[static_cast<size_t>(i)], i);
  }
}

TEST(SegmentPrototypes, AnnotatedUsesReasons) {
  CommentRecord r;
  r.text = "great teacher but slow grading";
  r.scores = {2, 1, 1, 1, 1};
  r.reasons = {"great teacher", "", "slow grading", "", ""};
  const auto t = tokenize(r.text);
  const auto s = segment_prototypes(&r, t, SegmentMode::kAnnotated);
  EXPECT_EQ(s[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(s[2], (std::vector<int>{3, 4}));
  // Dimensions without a reason fall back to their uniform block.
  EXPECT_EQ(s[1], (std::vector<int>{1}));
  EXPECT_EQ(segment_prototypes(&r, t, SegmentMode::kUniform), segment_prototypes(nullptr, t, SegmentMode::kUniform));
}

TEST(RefineQuery, ZeroGateWeightsAverage) {
  RandomSource rs(1);
  const Matrix q = rs.normal(1, 4), hr = rs.normal(3, 4), wk = rs.normal(4, 4);
  const RefinedQuery r = refine_query(C(q), C(hr), C(wk), C(Matrix::Zero(8, 1)));
  EXPECT_DOUBLE_EQ(r.gate.item(), 0.5);
  const Matrix p = r.attention.value() * hr;
  EXPECT_LT((r.q_star.value() - 0.5 * (q + p)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RefineQuery, SingleSnippetRow) {
  RandomSource rs(2);
  const Matrix q = rs.normal(1, 4), hr = rs.normal(1, 4), u = rs.normal(8, 1);
  const RefinedQuery r = refine_query(C(q), C(hr), C(rs.normal(4, 4)), C(u));
  EXPECT_EQ(r.attention.value(), Matrix::Ones(1, 1));
  const double lambda = r.gate.item();
  EXPECT_LT((r.q_star.value() - ((1 - lambda) * q + lambda * hr)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RefineQuery, MatchesOracleAndIsConvex) {
  RandomSource rs(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = rs.normal(1, 4), hr = rs.normal(3, 4), wk = rs.normal(4, 4), u = rs.normal(8, 1, 3.0);
    const RefinedQuery r = refine_query(C(q), C(hr), C(wk), C(u));
    const auto o = oracle::refine(to_vec(q), to_mat(hr), to_mat(wk), to_vec(u));
    EXPECT_LT(max_abs_diff(r.q_star.value(), o.q_star), 1e-12);
    EXPECT_NEAR(r.gate.item(), o.gate, 1e-12);
    EXPECT_GT(r.gate.item(), 0.0);
    EXPECT_LT(r.gate.item(), 1.0);
    const Matrix p = r.attention.value() * hr;
    const double lambda = r.gate.item();
    EXPECT_LT((r.q_star.value() - ((1 - lambda) * q + lambda * p)).norm(), 1e-12);
  }
}

TEST(RefineQuery, EmptySnippetThrows) {
  EXPECT_THROW(refine_query(C(Matrix::Zero(1, 4)), C(Matrix(0, 4)), C(Matrix::Identity(4, 4)), C(Matrix::Zero(8, 1))),
               EmptySnippet);
}

TEST(Dyt, ScalarCases) {
  const Matrix gamma = Matrix::Constant(1, 1, 2), beta = Matrix::Constant(1, 1, 1);
  const double v = dyt(C(Matrix::Constant(1, 1, 0.5)), C(gamma), C(beta), Var::scalar(2)).item();
  EXPECT_NEAR(v, 2 * std::tanh(1.0) + 1, 1e-15);
  EXPECT_NEAR(v, 2.523188, 1e-6);
  EXPECT_EQ(dyt(C(Matrix::Zero(1, 1)), C(gamma), C(beta), Var::scalar(2)).item(), 1.0);
  EXPECT_NEAR(dyt(C(Matrix::Constant(1, 1, 1e6)), C(gamma), C(beta), Var::scalar(2)).item(), 3.0, 1e-12);
  EXPECT_THROW(dyt(C(gamma), C(gamma), C(beta), Var::scalar(0)), NonPositiveAlpha);
}

TEST(Dyt, OddAroundBeta) {
  RandomSource rs(4);
  const Matrix z = rs.normal(3, 5), g = rs.normal(1, 5), b = rs.normal(1, 5);
  const Matrix pos = dyt(C(z), C(g), C(b), Var::scalar(0.7)).value();
  const Matrix neg = dyt(C(-z), C(g), C(b), Var::scalar(0.7)).value();
  const Matrix beta_rows = b.replicate(3, 1);
  EXPECT_LT(((neg - beta_rows) + (pos - beta_rows)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExtractEvidence, ZeroQueriesGiveTokenMean) {
  RandomSource rs(5);
  const Matrix hx = rs.normal(4, 6), wp = rs.normal(6, 3);
  const EvidenceMatrix e = extract_evidence(C(Matrix::Zero(2, 3)), C(hx), C(wp));
  EXPECT_TRUE(e.attention.value().isApprox(Matrix::Constant(2, 4, 0.25), 1e-15));
  const RowVector mean = (hx * wp).colwise().mean();
  for (int i = 0; i < 2; ++i) EXPECT_LT((e.h_e.value().row(i) - mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExtractEvidence, SingleToken) {
  RandomSource rs(6);
  const Matrix hx = rs.normal(1, 6), wp = rs.normal(6, 3);
  const EvidenceMatrix e = extract_evidence(C(rs.normal(2, 3)), C(hx), C(wp));
  EXPECT_EQ(e.attention.value(), Matrix::Ones(2, 1));
  for (int i = 0; i < 2; ++i) EXPECT_LT((e.h_e.value().row(i) - hx * wp).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExtractEvidence, MatchesOracle) {
  RandomSource rs(7);
  const Matrix hq = rs.normal(2, 4), hx = rs.normal(3, 8), wp = rs.normal(8, 4);
  const EvidenceMatrix e = extract_evidence(C(hq), C(hx), C(wp));
  const auto o = oracle::extract(to_mat(hq), to_mat(hx), to_mat(wp));
  EXPECT_LT(max_abs_diff(e.h_e.value(), o.h_e), 1e-12);
  EXPECT_LT(max_abs_diff(e.attention.value(), o.attention), 1e-12);
}

struct EvidenceFixture {
  EvidenceConfig config;
  ParamStore store;
  RefinementParams params;
  StubEmbedder embedder{8};
  EvidenceFixture() {
    config.dim = 8;
    Rng rng(3);
    params = RefinementParams::create(config, store, rng);
  }
};

TEST(EncodeEvidence, NoRefineIgnoresReasons) {
  EvidenceFixture f;
  CommentRecord a;
  a.text = "clear notes and kind words for everyone";
  a.reasons = {"clear notes", "", "", "", "kind words"};
  CommentRecord b = a;
  b.reasons = {"", "everyone", "", "", ""};
  const auto t = tokenize(a.text);
  RandomSource rs(8);
  const Var hx = C(rs.normal(static_cast<Eigen::Index>(t.size()), 16));
  const Var q = C(encode_dimension_words(f.config.words, f.embedder));
  const auto ea = encode_evidence(&a, t, hx, q, f.params, f.embedder, SegmentMode::kAnnotated, RefineMode::kNoRefine);
  const auto eb = encode_evidence(&b, t, hx, q, f.params, f.embedder, SegmentMode::kAnnotated, RefineMode::kNoRefine);
  EXPECT_EQ(ea.evidence.h_e.value(), eb.evidence.h_e.value());
  EXPECT_TRUE(ea.gates.empty());
}

TEST(EncodeEvidence, ClosedGateMatchesNoRefine) {
  EvidenceFixture f;
  CommentRecord r;
  r.text = "the lecture was clear and the exams were fair";
  r.reasons = {"lecture was clear", "", "exams were fair", "", ""};
  const auto t = tokenize(r.text);
  const Matrix q = encode_dimension_words(f.config.words, f.embedder);
  RandomSource rs(9);
  const Var hx = C(rs.normal(static_cast<Eigen::Index>(t.size()), 16));
  for (int i = 0; i < 5; ++i) {
    // u = [-1e4 q_i; 0] drives the gate logit to -1e4 for unit-norm q_i.
    Matrix u = Matrix::Zero(16, 1);
    u.topRows(8) = -1e4 * q.row(i).transpose();
    f.params.u.mutable_value() = u;
    const Var qi = C(q.row(i));
    const auto full = encode_evidence(&r, t, hx, qi, f.params, f.embedder, SegmentMode::kAnnotated, RefineMode::kFull);
    const auto none = encode_evidence(&r, t, hx, qi, f.params, f.embedder, SegmentMode::kAnnotated, RefineMode::kNoRefine);
    ASSERT_EQ(full.gates.size(), 1u);
    EXPECT_LT(full.gates[0], 1e-6);
    EXPECT_LT((full.evidence.h_e.value() - none.evidence.h_e.value()).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(EvidenceEncoder, GradientsMatchFiniteDifferences) {
  RandomSource rs(10);
  Var q = Var::parameter(rs.normal(2, 4)), hr = Var::parameter(rs.normal(3, 4));
  Var wk = Var::parameter(rs.normal(4, 4)), u = Var::parameter(rs.normal(8, 1));
  Var g = Var::parameter(rs.normal(1, 4)), b = Var::parameter(rs.normal(1, 4));
  Var alpha = Var::parameter(Matrix::Constant(1, 1, 0.6));
  Var hx = Var::parameter(rs.normal(3, 8)), wp = Var::parameter(rs.normal(8, 4, 0.5));
  const Matrix r = rs.normal(2, 4);
  auto loss = [&] {
    std::vector<Var> rows;
    for (int i = 0; i < 2; ++i) rows.push_back(refine_query(ag::row(q, i), hr, wk, u).q_star);
    const Var hq = dyt(ag::stack_rows(rows), g, b, alpha);
    return ag::sum(ag::hadamard(extract_evidence(hq, hx, wp).h_e, Var::constant(r)));
  };
  const auto res = testing_support::grad_check(
      loss,
      {{"q", q}, {"H_r", hr}, {"W_K", wk}, {"u", u}, {"gamma", g}, {"beta", b}, {"alpha", alpha}, {"H_x", hx}, {"W_proj", wp}},
      testing_support::kGradientStep);
  EXPECT_LT(res.worst_rel, testing_support::kGradientTolerance) << res.worst_name;
}

}  // namespace
}  // namespace teachpro
