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

#include "teachpro/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "teachpro/error.hpp"

namespace teachpro {

namespace {

void check_lengths(size_t a, size_t b) {
  if (a != b) throw LengthMismatch(std::to_string(a) + " labels vs " + std::to_string(b));
  if (a == 0) throw LengthMismatch("no samples");
}

void check_label(int y, int m) {
  if (y < 0 || y >= m) throw LengthMismatch("label " + std::to_string(y) + " outside class range");
}

}  // namespace

AccuracyF1 accuracy_f1(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  check_lengths(y_true.size(), y_pred.size());
  std::vector<double> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  size_t correct = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    check_label(y_true[i], num_classes);
    check_label(y_pred[i], num_classes);
    if (y_true[i] == y_pred[i]) {
      ++correct;
      tp[y_true[i]] += 1;
    } else {
      fp[y_pred[i]] += 1;
      fn[y_true[i]] += 1;
    }
  }
  double f1_sum = 0;
  for (int c = 0; c < num_classes; ++c) {
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    f1_sum += denom > 0 ? 2 * tp[c] / denom : 0.0;
  }
  return {static_cast<double>(correct) / static_cast<double>(y_true.size()), f1_sum / num_classes};
}

double qwk(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  check_lengths(y_true.size(), y_pred.size());
  const int m = num_classes;
  Matrix observed = Matrix::Zero(m, m);
  for (size_t i = 0; i < y_true.size(); ++i) {
    check_label(y_true[i], m);
    check_label(y_pred[i], m);
    observed(y_true[i], y_pred[i]) += 1;
  }
  const double total = static_cast<double>(y_true.size());
  const Vector row_marg = observed.rowwise().sum();
  const Vector col_marg = observed.colwise().sum().transpose();
  const Matrix expected = row_marg * col_marg.transpose() / total;
  double num = 0, den = 0;
  const double scale = m > 1 ? static_cast<double>((m - 1) * (m - 1)) : 1.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double w = static_cast<double>((i - j) * (i - j)) / scale;
      num += w * observed(i, j);
      den += w * expected(i, j);
    }
  }
  if (den == 0) return 0.0;
  return 1.0 - num / den;
}

double ece(const Matrix& probs, std::span<const int> y_true, int bins) {
  check_lengths(static_cast<size_t>(probs.rows()), y_true.size());
  if (bins < 1) throw LengthMismatch("need at least one bin");
  std::vector<double> count(bins, 0), correct(bins, 0), confidence(bins, 0);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-4) {
      throw NonDistribution("row " + std::to_string(i) + " does not sum to 1");
    }
    Eigen::Index pred = 0;
    const double conf = probs.row(i).maxCoeff(&pred);
    // Right-closed bins: (b/B, (b+1)/B], with confidence 0 in the first bin.
    int b = static_cast<int>(std::ceil(conf * bins)) - 1;
    b = std::clamp(b, 0, bins - 1);
    count[b] += 1;
    confidence[b] += conf;
    if (pred == y_true[static_cast<size_t>(i)]) correct[b] += 1;
  }
  const double n = static_cast<double>(probs.rows());
  double out = 0;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    out += (count[b] / n) * std::abs(correct[b] / count[b] - confidence[b] / count[b]);
  }
  return out;
}

size_t top_count(size_t n, double top_frac) {
  const auto k = static_cast<size_t>(std::ceil(top_frac * static_cast<double>(n) - 1e-9));
  return std::clamp<size_t>(k, 1, n);
}

AlignmentScores evidence_alignment(std::span<const double> attention, std::span<const int> gold,
                                   double top_frac) {
  if (gold.empty()) throw EmptyGold("no annotated evidence tokens");
  const size_t n = attention.size();
  if (n == 0) throw LengthMismatch("empty attention row");
  const double total = std::accumulate(attention.begin(), attention.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) throw NonDistribution("attention row does not sum to 1");

  std::vector<char> in_gold(n, 0);
  for (int g : gold) {
    if (g < 0 || static_cast<size_t>(g) >= n) throw LengthMismatch("gold index out of range");
    in_gold[static_cast<size_t>(g)] = 1;
  }
  const auto gold_size = static_cast<double>(std::count(in_gold.begin(), in_gold.end(), 1));

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return attention[a] > attention[b]; });
  const size_t k = top_count(n, top_frac);
  double hit = 0;
  for (size_t i = 0; i < k; ++i) hit += in_gold[order[i]];

  AlignmentScores s;
  s.precision = hit / static_cast<double>(k);
  s.recall = hit / gold_size;
  s.iou = hit / (static_cast<double>(k) + gold_size - hit);
  for (double p : attention) {
    if (p > 0) s.entropy -= p * std::log(p);
  }
  return s;
}

// --- Accumulators ---------------------------------------------------------------

void MetricsAccumulator::add(const std::array<int, kNumDimensions>& truth,
                             std::span<const int> predicted, const Matrix& probs) {
  if (predicted.size() != kNumDimensions || probs.rows() != kNumDimensions) {
    throw LengthMismatch("one prediction per dimension required");
  }
  for (int d = 0; d < kNumDimensions; ++d) {
    truth_[d].push_back(truth[d]);
    pred_[d].push_back(predicted[d]);
    probs_[d].push_back(probs.row(d));
  }
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.samples = size();
  if (r.samples == 0) return r;
  for (int d = 0; d < kNumDimensions; ++d) {
    const auto af = accuracy_f1(truth_[d], pred_[d]);
    Matrix p(static_cast<Eigen::Index>(probs_[d].size()), probs_[d].front().size());
    for (size_t i = 0; i < probs_[d].size(); ++i) p.row(static_cast<Eigen::Index>(i)) = probs_[d][i];
    DimensionMetrics& m = r.per_dimension[d];
    m = {af.accuracy, af.macro_f1, qwk(truth_[d], pred_[d]), ece(p, truth_[d], ece_bins_)};
    r.average.accuracy += m.accuracy / kNumDimensions;
    r.average.macro_f1 += m.macro_f1 / kNumDimensions;
    r.average.qwk += m.qwk / kNumDimensions;
    r.average.ece += m.ece / kNumDimensions;
  }
  return r;
}

void AlignmentAccumulator::add(const Matrix& attention, std::span<const std::vector<int>> gold) {
  for (int d = 0; d < kNumDimensions && d < attention.rows(); ++d) {
    const auto& g = gold[static_cast<size_t>(d)];
    if (g.empty()) continue;
    const RowVector row = attention.row(d);
    const AlignmentScores s =
        evidence_alignment(std::span<const double>(row.data(), static_cast<size_t>(row.size())), g,
                           top_frac_);
    sums_[d].precision += s.precision;
    sums_[d].recall += s.recall;
    sums_[d].iou += s.iou;
    sums_[d].entropy += s.entropy;
    ++counts_[d];
  }
}

AlignmentReport AlignmentAccumulator::report() const {
  AlignmentReport r;
  r.top_frac = top_frac_;
  r.counts = counts_;
  int used = 0;
  for (int d = 0; d < kNumDimensions; ++d) {
    if (counts_[d] == 0) continue;
    const double c = static_cast<double>(counts_[d]);
    r.per_dimension[d] = {sums_[d].precision / c, sums_[d].recall / c, sums_[d].iou / c,
                          sums_[d].entropy / c};
    r.average.precision += r.per_dimension[d].precision;
    r.average.recall += r.per_dimension[d].recall;
    r.average.iou += r.per_dimension[d].iou;
    r.average.entropy += r.per_dimension[d].entropy;
    ++used;
  }
  if (used > 0) {
    r.average.precision /= used;
    r.average.recall /= used;
    r.average.iou /= used;
    r.average.entropy /= used;
  }
  return r;
}

// --- Similarity -------------------------------------------------------------------

Matrix cosine_matrix(const Matrix& vectors, std::vector<std::pair<int, int>>* zero_pairs) {
  const Eigen::Index k = vectors.rows();
  const Vector norms = vectors.rowwise().norm();
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (i == j) {
        out(i, j) = 1.0;
        if (norms(i) == 0 && zero_pairs) zero_pairs->emplace_back(static_cast<int>(i), static_cast<int>(j));
      } else if (norms(i) == 0 || norms(j) == 0) {
        out(i, j) = 0.0;
        if (zero_pairs) zero_pairs->emplace_back(static_cast<int>(i), static_cast<int>(j));
      } else {
        out(i, j) = std::clamp(vectors.row(i).dot(vectors.row(j)) / (norms(i) * norms(j)), -1.0, 1.0);
      }
    }
  }
  return out;
}

SimilarityTrace similarity_trace(const Matrix& initial, const Matrix& refined, const Matrix& dyt,
                                 const Matrix& evidence) {
  SimilarityTrace t;
  const std::array<const Matrix*, 4> inputs = {&initial, &refined, &dyt, &evidence};
  for (size_t s = 0; s < inputs.size(); ++s) t.stages[s] = cosine_matrix(*inputs[s], &t.zero_pairs);
  return t;
}

}  // namespace teachpro
