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

#include "teachpro/autograd.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "teachpro/error.hpp"

namespace teachpro {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

Matrix softmax_rows(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double mx = a.row(i).maxCoeff();
    out.row(i) = (a.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

namespace ag {

void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var Var::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw ShapeMismatch(what);
}

Var make(Matrix value, std::vector<std::shared_ptr<Node>> parents,
         std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward = std::move(bw);
  }
  return Var(std::move(n));
}

Node& parent(Node& self, size_t i) { return *self.parents[i]; }

}  // namespace

void backward(const Var& root) {
  require(root.rows() == 1 && root.cols() == 1, "backward root must be 1x1");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  return make(a.value() * b.value(), {a.node(), b.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
  });
}

Var transpose(const Var& a) {
  return make(a.value().transpose(), {a.node()}, [](Node& self) {
    parent(self, 0).accumulate(self.grad.transpose());
  });
}

Var add(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shapes differ");
  return make(a.value() + b.value(), {a.node(), b.node()}, [](Node& self) {
    for (auto& p : self.parents)
      if (p->requires_grad) p->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shapes differ");
  return make(a.value() - b.value(), {a.node(), b.node()}, [](Node& self) {
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
    if (parent(self, 1).requires_grad) parent(self, 1).accumulate(-self.grad);
  });
}

Var hadamard(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shapes differ");
  return make(a.value().cwiseProduct(b.value()), {a.node(), b.node()},
              [](Node& self) {
                Node& pa = parent(self, 0);
                Node& pb = parent(self, 1);
                if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(pb.value));
                if (pb.requires_grad) pb.accumulate(self.grad.cwiseProduct(pa.value));
              });
}

Var scale(const Var& a, double c) {
  return make(a.value() * c, {a.node()},
              [c](Node& self) { parent(self, 0).accumulate(self.grad * c); });
}

Var add_constant(const Var& a, double c) {
  return make(a.value().array() + c, {a.node()},
              [](Node& self) { parent(self, 0).accumulate(self.grad); });
}

Var add_identity(const Var& a) {
  require(a.rows() == a.cols(), "add_identity: matrix not square");
  return make(a.value() + Matrix::Identity(a.rows(), a.cols()), {a.node()},
              [](Node& self) { parent(self, 0).accumulate(self.grad); });
}

Var add_row(const Var& a, const Var& r) {
  require(r.rows() == 1 && r.cols() == a.cols(), "add_row: bad row shape");
  Matrix out = a.value().rowwise() + r.value().row(0);
  return make(std::move(out), {a.node(), r.node()}, [](Node& self) {
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
    if (parent(self, 1).requires_grad)
      parent(self, 1).accumulate(self.grad.colwise().sum());
  });
}

Var mul_row(const Var& a, const Var& r) {
  require(r.rows() == 1 && r.cols() == a.cols(), "mul_row: bad row shape");
  Matrix out = a.value().array().rowwise() * r.value().row(0).array();
  return make(std::move(out), {a.node(), r.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pr = parent(self, 1);
    if (pa.requires_grad)
      pa.accumulate((self.grad.array().rowwise() * pr.value.row(0).array()).matrix());
    if (pr.requires_grad)
      pr.accumulate(self.grad.cwiseProduct(pa.value).colwise().sum());
  });
}

Var mul_scalar(const Var& a, const Var& s) {
  require(s.rows() == 1 && s.cols() == 1, "mul_scalar: scalar must be 1x1");
  return make(a.value() * s.item(), {a.node(), s.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& ps = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad * ps.value(0, 0));
    if (ps.requires_grad)
      ps.accumulate(Matrix::Constant(1, 1, self.grad.cwiseProduct(pa.value).sum()));
  });
}

Var scale_rows(const Var& a, const Var& v) {
  require(v.cols() == 1 && v.rows() == a.rows(), "scale_rows: bad vector shape");
  Matrix out = v.value().col(0).asDiagonal() * a.value();
  return make(std::move(out), {a.node(), v.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pv = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(pv.value.col(0).asDiagonal() * self.grad);
    if (pv.requires_grad)
      pv.accumulate(self.grad.cwiseProduct(pa.value).rowwise().sum());
  });
}

Var scale_cols(const Var& a, const Var& v) {
  require(v.cols() == 1 && v.rows() == a.cols(), "scale_cols: bad vector shape");
  Matrix out = a.value() * v.value().col(0).asDiagonal();
  return make(std::move(out), {a.node(), v.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pv = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad * pv.value.col(0).asDiagonal());
    if (pv.requires_grad)
      pv.accumulate(self.grad.cwiseProduct(pa.value).colwise().sum().transpose());
  });
}

Var row_sums(const Var& a) {
  return make(a.value().rowwise().sum(), {a.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    pa.accumulate(self.grad.col(0).replicate(1, pa.value.cols()));
  });
}

Var sum(const Var& a) {
  return make(Matrix::Constant(1, 1, a.value().sum()), {a.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    pa.accumulate(Matrix::Constant(pa.value.rows(), pa.value.cols(), self.grad(0, 0)));
  });
}

Var row(const Var& a, Eigen::Index i) {
  require(i >= 0 && i < a.rows(), "row: index out of range");
  return make(a.value().row(i), {a.node()}, [i](Node& self) {
    Node& pa = parent(self, 0);
    Matrix g = Matrix::Zero(pa.value.rows(), pa.value.cols());
    g.row(i) = self.grad.row(0);
    pa.accumulate(g);
  });
}

Var stack_rows(std::span<const Var> rows) {
  require(!rows.empty(), "stack_rows: no rows");
  const Eigen::Index cols = rows.front().cols();
  Eigen::Index total = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& r : rows) {
    require(r.cols() == cols, "stack_rows: column counts differ");
    total += r.rows();
    parents.push_back(r.node());
  }
  Matrix out(total, cols);
  Eigen::Index at = 0;
  for (const auto& r : rows) {
    out.middleRows(at, r.rows()) = r.value();
    at += r.rows();
  }
  return make(std::move(out), std::move(parents), [](Node& self) {
    Eigen::Index offset = 0;
    for (auto& p : self.parents) {
      if (p->requires_grad) p->accumulate(self.grad.middleRows(offset, p->value.rows()));
      offset += p->value.rows();
    }
  });
}

Var concat_cols(const Var& a, const Var& b) {
  require(a.rows() == b.rows(), "concat_cols: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  return make(std::move(out), {a.node(), b.node()}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad.leftCols(pa.value.cols()));
    if (pb.requires_grad) pb.accumulate(self.grad.rightCols(pb.value.cols()));
  });
}

Var pow(const Var& a, double p) {
  return make(a.value().array().pow(p).matrix(), {a.node()}, [p](Node& self) {
    Node& pa = parent(self, 0);
    pa.accumulate((self.grad.array() * p * pa.value.array().pow(p - 1.0)).matrix());
  });
}

Var gelu(const Var& a) {
  return make(a.value().unaryExpr([](double x) { return teachpro::gelu(x); }),
              {a.node()}, [](Node& self) {
                Node& pa = parent(self, 0);
                const Matrix d = pa.value.unaryExpr([](double x) {
                  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
                  const double pdf =
                      std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
                  return cdf + x * pdf;
                });
                pa.accumulate(self.grad.cwiseProduct(d));
              });
}

Var tanh(const Var& a) {
  return make(a.value().array().tanh().matrix(), {a.node()}, [](Node& self) {
    parent(self, 0).accumulate(
        (self.grad.array() * (1.0 - self.value.array().square())).matrix());
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  return make(std::move(out), {a.node()}, [](Node& self) {
    parent(self, 0).accumulate(
        (self.grad.array() * self.value.array() * (1.0 - self.value.array())).matrix());
  });
}

Var softmax_rows(const Var& a) {
  return make(teachpro::softmax_rows(a.value()), {a.node()}, [](Node& self) {
    const Matrix& y = self.value;
    const Vector dot = self.grad.cwiseProduct(y).rowwise().sum();
    Matrix g = y.cwiseProduct(self.grad - dot.replicate(1, y.cols()));
    parent(self, 0).accumulate(g);
  });
}

Var layer_norm_rows(const Var& a, double eps) {
  const Matrix& x = a.value();
  const Eigen::Index c = x.cols();
  Vector inv_std(x.rows());
  Matrix xhat(x.rows(), c);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mean) * inv_std(i);
  }
  return make(xhat, {a.node()}, [inv_std](Node& self) {
    const Matrix& xh = self.value;
    const Matrix& g = self.grad;
    Matrix dx(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double g_mean = g.row(i).mean();
      const double gx_mean = g.row(i).cwiseProduct(xh.row(i)).mean();
      dx.row(i) = inv_std(i) * (g.row(i).array() - g_mean - xh.row(i).array() * gx_mean);
    }
    parent(self, 0).accumulate(dx);
  });
}

Var center_normalize_cols(const Var& a, double eps) {
  const Matrix& x = a.value();
  Matrix centered = x.rowwise() - x.colwise().mean();
  RowVector norms = centered.colwise().norm();
  Matrix out = centered.array().rowwise() / (norms.array() + eps);
  return make(std::move(out), {a.node()}, [centered, norms, eps](Node& self) {
    const Matrix& g = self.grad;
    // y = c / (|c| + eps)  =>  dy/dc = I / (|c| + eps) - c c^T / ((|c| + eps)^2 |c|)
    Matrix dc(g.rows(), g.cols());
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double cn = norms(j);
      const double denom = cn + eps;
      dc.col(j) = g.col(j) / denom;
      if (cn > 0) {
        dc.col(j) -= centered.col(j) * (centered.col(j).dot(g.col(j)) / (denom * denom * cn));
      }
    }
    // Centering is a projection, so its adjoint subtracts the column mean.
    parent(self, 0).accumulate(dc.rowwise() - dc.colwise().mean());
  });
}

Var weighted_nll(const Var& probs, std::span<const int> labels,
                 std::span<const double> class_weights, double clamp) {
  const Matrix& p = probs.value();
  require(static_cast<Eigen::Index>(labels.size()) == p.rows(),
          "weighted_nll: one label per row required");
  require(static_cast<Eigen::Index>(class_weights.size()) == p.cols(),
          "weighted_nll: one weight per class required");
  const double k = static_cast<double>(p.rows());
  const double log_clamp = std::log(clamp);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const int y = labels[static_cast<size_t>(i)];
    require(y >= 0 && y < p.cols(), "weighted_nll: label out of range");
    total -= class_weights[static_cast<size_t>(y)] * std::max(std::log(p(i, y)), log_clamp);
  }
  std::vector<int> ys(labels.begin(), labels.end());
  std::vector<double> ws(class_weights.begin(), class_weights.end());
  return make(Matrix::Constant(1, 1, total / k), {probs.node()},
              [ys, ws, k, clamp](Node& self) {
                Node& pp = parent(self, 0);
                Matrix g = Matrix::Zero(pp.value.rows(), pp.value.cols());
                for (Eigen::Index i = 0; i < g.rows(); ++i) {
                  const int y = ys[static_cast<size_t>(i)];
                  const double pv = pp.value(i, y);
                  if (pv > clamp) g(i, y) = -ws[static_cast<size_t>(y)] / (k * pv);
                }
                pp.accumulate(g * self.grad(0, 0));
              });
}

Var apply_mask(const Var& a, const Matrix& mask) {
  require(mask.rows() == a.rows() && mask.cols() == a.cols(), "apply_mask: shapes differ");
  return make(a.value().cwiseProduct(mask), {a.node()}, [mask](Node& self) {
    parent(self, 0).accumulate(self.grad.cwiseProduct(mask));
  });
}

}  // namespace ag
}  // namespace teachpro
