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

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "teachpro/autograd.hpp"
#include "teachpro/data.hpp"
#include "teachpro/params.hpp"

namespace teachpro {

enum class HeadMode { kShared, kIndependent };

struct HeadConfig {
  int dim = 768;
  int num_dims = kNumDimensions;
  int num_classes = kNumClasses;
  double dropout = 0.1;
  HeadMode mode = HeadMode::kShared;
};

struct PredictionResult {
  ag::Var logits;           // k x m
  ag::Var probs;            // k x m, rows sum to 1
  std::vector<int> labels;  // row argmax, ties -> lowest index
};

// Row-wise argmax with ties resolved to the lowest index.
std::vector<int> argmax_rows(const Matrix& m);

class ClassifierHead {
 public:
  virtual ~ClassifierHead() = default;
  virtual PredictionResult classify(const ag::Var& evidence, ForwardContext& ctx) const = 0;
  // Counted from the head's registered tensors.
  virtual size_t parameter_count() const = 0;
  virtual std::vector<ag::Var> tensors() const = 0;
  virtual HeadMode mode() const = 0;
};

// One projection W_shared and classifier (W_C, c) shared by every dimension;
// dimension i only owns the perturbation rows z_i, s_i, b_i.
class SharedHead final : public ClassifierHead {
 public:
  // Registers head.Wshared, head.Z, head.S, head.B, head.WC, head.c.
  SharedHead(const HeadConfig& config, ParamStore& store, Rng& rng);
  // For tests: wrap explicit tensors.
  SharedHead(ag::Var w_shared, ag::Var z, ag::Var s, ag::Var b, ag::Var wc, ag::Var c,
             double dropout);

  // Dropout(GELU(((h_i .* z_i) W_shared) .* s_i + b_i)); h_i is 1 x d.
  ag::Var project_dimension(const ag::Var& h_i, int i, ForwardContext& ctx) const;

  PredictionResult classify(const ag::Var& evidence, ForwardContext& ctx) const override;
  size_t parameter_count() const override;
  std::vector<ag::Var> tensors() const override;
  HeadMode mode() const override { return HeadMode::kShared; }

 private:
  ag::Var w_shared_, z_, s_, b_, wc_, c_;
  double dropout_;
};

// k unshared {d x d projection + bias, GELU, dropout, d x m classifier + bias}
// stacks. Registers head.{i}.{W,bias,WC,c}.
class IndependentHead final : public ClassifierHead {
 public:
  IndependentHead(const HeadConfig& config, ParamStore& store, Rng& rng);

  PredictionResult classify(const ag::Var& evidence, ForwardContext& ctx) const override;
  size_t parameter_count() const override;
  std::vector<ag::Var> tensors() const override;
  HeadMode mode() const override { return HeadMode::kIndependent; }

 private:
  struct Stack {
    ag::Var w, bias, wc, c;
  };
  std::vector<Stack> stacks_;
  double dropout_;
};

std::unique_ptr<ClassifierHead> make_head(const HeadConfig& config, ParamStore& store, Rng& rng);

// (1/k) sum_i -sum_c w_c y_ic log p_ic with log clamped at log(1e-12).
// Throws InvalidWeights if any weight is <= 0 (or the count is not m).
ag::Var classification_loss(const PredictionResult& prediction, std::span<const int> labels,
                            std::span<const double> class_weights);

inline constexpr double kLogClamp = 1e-12;

// Closed forms, for reporting next to the enumerated counts.
constexpr size_t shared_head_parameters(size_t d, size_t k, size_t m) {
  return d * d + 3 * k * d + d * m + m;
}
constexpr size_t independent_head_parameters(size_t d, size_t k, size_t m) {
  return k * (d * d + d + d * m + m);
}

}  // namespace teachpro
