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

#include "teachpro/prediction_head.hpp"

#include "teachpro/error.hpp"

namespace teachpro {

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = static_cast<int>(j);
    }
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

namespace {

PredictionResult finish(ag::Var logits) {
  PredictionResult r;
  r.probs = ag::softmax_rows(logits);
  r.labels = argmax_rows(logits.value());
  r.logits = std::move(logits);
  return r;
}

size_t total_size(const std::vector<ag::Var>& tensors) {
  size_t n = 0;
  for (const auto& t : tensors) n += static_cast<size_t>(t.value().size());
  return n;
}

}  // namespace

// --- Shared head ---------------------------------------------------------------

SharedHead::SharedHead(const HeadConfig& config, ParamStore& store, Rng& rng)
    : dropout_(config.dropout) {
  const int d = config.dim;
  const int k = config.num_dims;
  w_shared_ = store.add("head.Wshared", glorot(d, d, rng));
  z_ = store.add("head.Z", Matrix::Ones(k, d));
  s_ = store.add("head.S", Matrix::Ones(k, d));
  b_ = store.add("head.B", Matrix::Zero(k, d));
  wc_ = store.add("head.WC", glorot(d, config.num_classes, rng));
  c_ = store.add("head.c", Matrix::Zero(1, config.num_classes));
}

SharedHead::SharedHead(ag::Var w_shared, ag::Var z, ag::Var s, ag::Var b, ag::Var wc, ag::Var c,
                       double dropout)
    : w_shared_(std::move(w_shared)),
      z_(std::move(z)),
      s_(std::move(s)),
      b_(std::move(b)),
      wc_(std::move(wc)),
      c_(std::move(c)),
      dropout_(dropout) {}

ag::Var SharedHead::project_dimension(const ag::Var& h_i, int i, ForwardContext& ctx) const {
  const ag::Var scaled = ag::hadamard(h_i, ag::row(z_, i));
  const ag::Var projected =
      ag::add(ag::hadamard(ag::matmul(scaled, w_shared_), ag::row(s_, i)), ag::row(b_, i));
  return dropout(ag::gelu(projected), dropout_, ctx);
}

PredictionResult SharedHead::classify(const ag::Var& evidence, ForwardContext& ctx) const {
  if (evidence.rows() != z_.rows() || evidence.cols() != z_.cols()) {
    throw ShapeMismatch("evidence must be k x d");
  }
  // All k rows at once: ((H .* Z) W) .* S + B.
  const ag::Var projected =
      ag::add(ag::hadamard(ag::matmul(ag::hadamard(evidence, z_), w_shared_), s_), b_);
  const ag::Var u = dropout(ag::gelu(projected), dropout_, ctx);
  return finish(ag::add_row(ag::matmul(u, wc_), c_));
}

std::vector<ag::Var> SharedHead::tensors() const { return {w_shared_, z_, s_, b_, wc_, c_}; }

size_t SharedHead::parameter_count() const { return total_size(tensors()); }

// --- Independent heads -------------------------------------------------------------

IndependentHead::IndependentHead(const HeadConfig& config, ParamStore& store, Rng& rng)
    : dropout_(config.dropout) {
  const int d = config.dim;
  for (int i = 0; i < config.num_dims; ++i) {
    const std::string prefix = "head." + std::to_string(i) + ".";
    Stack s;
    s.w = store.add(prefix + "W", glorot(d, d, rng));
    s.bias = store.add(prefix + "bias", Matrix::Zero(1, d));
    s.wc = store.add(prefix + "WC", glorot(d, config.num_classes, rng));
    s.c = store.add(prefix + "c", Matrix::Zero(1, config.num_classes));
    stacks_.push_back(std::move(s));
  }
}

PredictionResult IndependentHead::classify(const ag::Var& evidence, ForwardContext& ctx) const {
  if (evidence.rows() != static_cast<Eigen::Index>(stacks_.size())) {
    throw ShapeMismatch("evidence must have one row per head");
  }
  std::vector<ag::Var> rows;
  for (size_t i = 0; i < stacks_.size(); ++i) {
    const Stack& s = stacks_[i];
    const ag::Var h = ag::row(evidence, static_cast<Eigen::Index>(i));
    const ag::Var u = dropout(ag::gelu(ag::add(ag::matmul(h, s.w), s.bias)), dropout_, ctx);
    rows.push_back(ag::add(ag::matmul(u, s.wc), s.c));
  }
  return finish(ag::stack_rows(rows));
}

std::vector<ag::Var> IndependentHead::tensors() const {
  std::vector<ag::Var> out;
  for (const auto& s : stacks_) {
    out.insert(out.end(), {s.w, s.bias, s.wc, s.c});
  }
  return out;
}

size_t IndependentHead::parameter_count() const { return total_size(tensors()); }

std::unique_ptr<ClassifierHead> make_head(const HeadConfig& config, ParamStore& store, Rng& rng) {
  if (config.dropout < 0 || config.dropout >= 1) throw ConfigError("head dropout must lie in [0, 1)");
  if (config.mode == HeadMode::kIndependent) {
    return std::make_unique<IndependentHead>(config, store, rng);
  }
  return std::make_unique<SharedHead>(config, store, rng);
}

ag::Var classification_loss(const PredictionResult& prediction, std::span<const int> labels,
                            std::span<const double> class_weights) {
  if (static_cast<Eigen::Index>(class_weights.size()) != prediction.probs.cols()) {
    throw InvalidWeights("need one weight per class");
  }
  for (double w : class_weights) {
    if (!(w > 0)) throw InvalidWeights("class weights must be > 0");
  }
  return ag::weighted_nll(prediction.probs, labels, class_weights, kLogClamp);
}

}  // namespace teachpro
