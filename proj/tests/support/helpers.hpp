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

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "teachpro/autograd.hpp"

namespace testing_support {

using teachpro::Matrix;

class RandomSource {
 public:
  explicit RandomSource(uint64_t seed) : gen_(seed) {}

  Matrix normal(Eigen::Index r, Eigen::Index c, double stddev = 1.0) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(gen_);
    return m;
  }

  Matrix uniform(Eigen::Index r, Eigen::Index c, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(gen_);
    return m;
  }

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  // Random row-stochastic matrix.
  Matrix distributions(Eigen::Index r, Eigen::Index c) {
    Matrix m = uniform(r, c, 0.01, 1.0);
    for (Eigen::Index i = 0; i < r; ++i) m.row(i) /= m.row(i).sum();
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(static_cast<size_t>(m.rows()), oracle::Vec(static_cast<size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline oracle::Vec to_vec(const Matrix& m) {
  oracle::Vec out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

inline double max_abs_diff(const Matrix& a, const oracle::Mat& b) {
  if (static_cast<size_t>(a.rows()) != b.size()) return INFINITY;
  double worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (static_cast<size_t>(a.cols()) != b[i].size()) return INFINITY;
    for (Eigen::Index j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - b[i][j]));
  }
  return worst;
}

inline double max_abs_diff(const Matrix& a, const oracle::Vec& b) {
  if (static_cast<size_t>(a.size()) != b.size()) return INFINITY;
  double worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b[i]));
  return worst;
}

struct GradCheck {
  std::string worst_name;
  double worst_rel = 0;  // ||analytic - numeric|| / (||analytic|| + ||numeric||)
};

// Compares backward() of loss() against central differences for every
// tensor in `params`. loss() must rebuild its graph on each call.
inline GradCheck grad_check(const std::function<teachpro::ag::Var()>& loss,
                            std::vector<std::pair<std::string, teachpro::ag::Var>> params,
                            double step = 1e-4) {
  for (auto& [name, p] : params) p.zero_grad();
  teachpro::ag::backward(loss());
  GradCheck out;
  for (auto& [name, p] : params) {
    const Matrix analytic = p.grad().size() ? p.grad() : Matrix::Zero(p.rows(), p.cols());
    Matrix numeric(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.value().size(); ++i) {
      double& x = p.mutable_value().data()[i];
      const double saved = x;
      x = saved + step;
      const double up = loss().item();
      x = saved - step;
      const double down = loss().item();
      x = saved;
      numeric.data()[i] = (up - down) / (2 * step);
    }
    const double denom = analytic.norm() + numeric.norm();
    const double rel = denom < 1e-12 ? 0.0 : (analytic - numeric).norm() / denom;
    if (rel >= out.worst_rel) {
      out.worst_rel = rel;
      out.worst_name = name;
    }
    p.zero_grad();
  }
  return out;
}

}  // namespace testing_support
