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

// Minimal reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Var is a handle to a node in a dynamically built graph. Leaves created
// with Var::parameter() accumulate gradients across backward() calls until
// zero_grad() is called; everything else is released when the last handle
// goes away.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace teachpro {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

namespace ag {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents.
  std::function<void(Node&)> backward;

  void accumulate(const Matrix& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Var constant(Matrix value);
  static Var parameter(Matrix value);
  static Var scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

  const Matrix& value() const { return node_->value; }
  // Mutable access for optimizers and checkpoint loading.
  Matrix& mutable_value() { return node_->value; }
  // Zero-sized when no gradient has reached this node.
  const Matrix& grad() const { return node_->grad; }
  Matrix& mutable_grad() { return node_->grad; }
  void zero_grad() { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const { return node_->value(0, 0); }
  bool requires_grad() const { return node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Seeds d(root)/d(root) = 1 (root must be 1x1) and propagates to every node
// that requires a gradient.
void backward(const Var& root);

// --- Linear algebra -------------------------------------------------------
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double c);
// a + c elementwise.
Var add_constant(const Var& a, double c);
// a + I (a square).
Var add_identity(const Var& a);

// --- Broadcasting ---------------------------------------------------------
// a (r x c) + row (1 x c) added to every row.
Var add_row(const Var& a, const Var& row);
// a (r x c) .* row (1 x c) on every row.
Var mul_row(const Var& a, const Var& row);
// a (r x c) times a 1x1 scalar node.
Var mul_scalar(const Var& a, const Var& s);
// out(i, j) = v(i) * a(i, j), v is r x 1.
Var scale_rows(const Var& a, const Var& v);
// out(i, j) = a(i, j) * v(j), v is c x 1.
Var scale_cols(const Var& a, const Var& v);

// --- Reductions and reshaping ----------------------------------------------
Var row_sums(const Var& a);  // r x 1
Var sum(const Var& a);       // 1 x 1
Var row(const Var& a, Eigen::Index i);
Var stack_rows(std::span<const Var> rows);
Var concat_cols(const Var& a, const Var& b);

// --- Elementwise nonlinearities --------------------------------------------
Var pow(const Var& a, double p);
// Exact GELU: x * Phi(x) with the Gaussian CDF.
Var gelu(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);

// --- Row-wise normalizations ------------------------------------------------
Var softmax_rows(const Var& a);
// (x - mean) / sqrt(var + eps) per row, population variance; no affine part.
Var layer_norm_rows(const Var& a, double eps);
// Centers each column and divides it by its Euclidean norm (+ eps).
Var center_normalize_cols(const Var& a, double eps);

// --- Losses -----------------------------------------------------------------
// (1/k) sum_i -w[y_i] log(max(p(i, y_i), clamp)). probs is k x m.
Var weighted_nll(const Var& probs, std::span<const int> labels,
                 std::span<const double> class_weights, double clamp);

// Elementwise multiplication by a constant mask (dropout with the keep scale
// already folded into the mask).
Var apply_mask(const Var& a, const Matrix& mask);

}  // namespace ag

// Standalone helpers on plain matrices used outside the tape.
Matrix softmax_rows(const Matrix& a);
double gelu(double x);

}  // namespace teachpro
