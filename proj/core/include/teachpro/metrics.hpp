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

// Evaluation and analysis quantities: accuracy / macro-F1, quadratic
// weighted kappa, expected calibration error, evidence alignment against
// rationale spans, and cosine-similarity matrices of dimension embeddings.

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "teachpro/autograd.hpp"
#include "teachpro/data.hpp"

namespace teachpro {

struct AccuracyF1 {
  double accuracy = 0;
  double macro_f1 = 0;
};

// Classes absent from both truth and prediction contribute F1 = 0 to the
// macro average. Throws LengthMismatch on unequal or empty inputs.
AccuracyF1 accuracy_f1(std::span<const int> y_true, std::span<const int> y_pred,
                       int num_classes = kNumClasses);

// Quadratic weighted kappa; 0 when the expected disagreement is 0
// (e.g. a constant predictor).
double qwk(std::span<const int> y_true, std::span<const int> y_pred,
           int num_classes = kNumClasses);

// Equal-width, right-closed confidence bins over [0, 1]; probs is N x m.
// Throws NonDistribution when a row sum is off by more than 1e-4.
double ece(const Matrix& probs, std::span<const int> y_true, int bins = 10);

struct AlignmentScores {
  double precision = 0;
  double recall = 0;
  double iou = 0;
  double entropy = 0;
};

// Predicted evidence = the ceil(top_frac * n) highest-attention tokens (ties
// to the lower index). Entropy uses the natural log with 0 log 0 = 0.
// Throws EmptyGold for an empty gold set and NonDistribution when the
// attention row does not sum to 1 within 1e-6.
AlignmentScores evidence_alignment(std::span<const double> attention,
                                   std::span<const int> gold, double top_frac = 0.2);

// Size of the predicted evidence set for a sequence of n tokens.
size_t top_count(size_t n, double top_frac);

struct DimensionMetrics {
  double accuracy = 0;
  double macro_f1 = 0;
  double qwk = 0;
  double ece = 0;
};

struct MetricsReport {
  std::array<DimensionMetrics, kNumDimensions> per_dimension{};
  DimensionMetrics average;
  size_t samples = 0;
};

// Gathers per-record predictions and reports per-dimension metrics.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(int ece_bins = 10) : ece_bins_(ece_bins) {}
  // probs is k x m for one record.
  void add(const std::array<int, kNumDimensions>& truth, std::span<const int> predicted,
           const Matrix& probs);
  MetricsReport report() const;
  size_t size() const { return truth_[0].size(); }

 private:
  int ece_bins_;
  std::array<std::vector<int>, kNumDimensions> truth_, pred_;
  std::array<std::vector<RowVector>, kNumDimensions> probs_;
};

// Macro-averaged over records; records with an empty gold set for a
// dimension are skipped for that dimension.
struct AlignmentReport {
  std::array<AlignmentScores, kNumDimensions> per_dimension{};
  std::array<size_t, kNumDimensions> counts{};
  AlignmentScores average;
  double top_frac = 0.2;
};

class AlignmentAccumulator {
 public:
  explicit AlignmentAccumulator(double top_frac = 0.2) : top_frac_(top_frac) {}
  // attention is k x n; gold[i] are the rationale tokens of dimension i.
  void add(const Matrix& attention, std::span<const std::vector<int>> gold);
  AlignmentReport report() const;

 private:
  double top_frac_;
  std::array<AlignmentScores, kNumDimensions> sums_{};
  std::array<size_t, kNumDimensions> counts_{};
};

// Pairwise cosine similarity of the rows of `vectors`. Pairs involving a
// zero vector get 0 (1 on the diagonal) and are reported in zero_pairs.
Matrix cosine_matrix(const Matrix& vectors,
                     std::vector<std::pair<int, int>>* zero_pairs = nullptr);

inline constexpr std::array<const char*, 4> kSimilarityStages = {"initial", "refined", "dyt",
                                                                 "evidence"};

struct SimilarityTrace {
  // initial Q, refined Q_new, post-DyT H_Q, evidence H_E.
  std::array<Matrix, 4> stages;
  std::vector<std::pair<int, int>> zero_pairs;
};

SimilarityTrace similarity_trace(const Matrix& initial, const Matrix& refined, const Matrix& dyt,
                                 const Matrix& evidence);

}  // namespace teachpro
