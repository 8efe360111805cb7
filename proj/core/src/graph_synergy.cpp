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

#include "teachpro/graph_synergy.hpp"

#include <cmath>

#include "teachpro/error.hpp"

namespace teachpro {

void SynergyConfig::validate() const {
  if (layers < 1) throw ConfigError("synergy.layers must be >= 1");
  if (dim < 1) throw ConfigError("hidden dimension must be >= 1");
  if (!(tau > 0)) throw ConfigError("synergy.tau must be > 0");
  if (eta < 0 || eta > 1) throw ConfigError("synergy.eta must lie in [0, 1]");
  if (dropout < 0 || dropout >= 1) throw ConfigError("synergy.dropout must lie in [0, 1)");
  if (fuse_init_gain < 0) throw ConfigError("synergy.fuse_init_gain must be >= 0");
}

SynergyParams SynergyParams::create(const SynergyConfig& config, ParamStore& store, Rng& rng) {
  config.validate();
  const int d = config.dim;
  SynergyParams p;
  // Both branches start from the same draw per layer so that row i of H_syn
  // and row i of H_sem are correlated when they first meet in the fusion.
  for (int l = 0; l < config.layers; ++l) {
    Matrix w = glorot(d, d, rng);
    p.w_syn.push_back(store.add("syn.W." + std::to_string(l), w));
    p.w_sem.push_back(store.add("sem.W." + std::to_string(l), std::move(w)));
  }
  p.wq = store.add("sem.WQ", glorot(d, d, rng));
  p.wk = store.add("sem.WK", glorot(d, d, rng));
  // Layer-normalised rows have squared norm ~d, so (g/d) I gives a token a
  // self-alignment logit of about g times the cosine between its two branch
  // states. Near-uniform alignments (small g, or noise of the same order)
  // collapse every row towards the sequence mean within a few layers.
  const Matrix eye = Matrix::Identity(d, d) * (config.fuse_init_gain / d);
  p.w1 = store.add("fuse.W1", eye + gaussian(d, d, 0.1 / d, rng));
  p.w2 = store.add("fuse.W2", eye + gaussian(d, d, 0.1 / d, rng));
  for (const char* branch : {"syn", "sem"}) {
    auto& ln = std::string_view(branch) == "syn" ? p.ln_syn : p.ln_sem;
    for (int l = 0; l < config.layers; ++l) {
      const std::string prefix = "ln." + std::string(branch) + "." + std::to_string(l);
      ln.push_back({store.add(prefix + ".scale", Matrix::Ones(1, d)),
                    store.add(prefix + ".shift", Matrix::Zero(1, d))});
    }
  }
  return p;
}

Matrix prune_syntactic(const Matrix& arcs, double tau, double eta) {
  if (arcs.rows() != arcs.cols()) throw ShapeMismatch("arc matrix must be square");
  Matrix out(arcs.rows(), arcs.cols());
  for (Eigen::Index i = 0; i < arcs.rows(); ++i) {
    for (Eigen::Index j = 0; j < arcs.cols(); ++j) {
      const double a = arcs(i, j);
      out(i, j) = (a / tau >= eta ? a : 0.0) + (i == j ? 1.0 : 0.0);
    }
  }
  return out;
}

Matrix normalize_sym(const Matrix& a) {
  const Vector deg = a.rowwise().sum();
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0)) throw ZeroDegree("row " + std::to_string(i) + " has no positive degree");
  }
  const Vector inv_sqrt = deg.array().rsqrt();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

ag::Var normalize_sym(const ag::Var& a) {
  const Vector deg = a.value().rowwise().sum();
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0)) throw ZeroDegree("row " + std::to_string(i) + " has no positive degree");
  }
  const ag::Var inv_sqrt = ag::pow(ag::row_sums(a), -0.5);
  return ag::scale_rows(ag::scale_cols(a, inv_sqrt), inv_sqrt);
}

ag::Var gcn_layer(const ag::Var& h, const ag::Var& a_hat, const ag::Var& w,
                  const LayerNormParams& ln, double eps) {
  const ag::Var z = ag::gelu(ag::matmul(ag::matmul(a_hat, h), w));
  return ag::add_row(ag::mul_row(ag::layer_norm_rows(z, eps), ln.scale), ln.shift);
}

ag::Var semantic_adjacency(const ag::Var& h, const ag::Var& wq, const ag::Var& wk) {
  const ag::Var q = ag::matmul(h, wq);
  const ag::Var k = ag::matmul(h, wk);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
  return ag::softmax_rows(ag::scale(ag::matmul(q, ag::transpose(k)), inv_sqrt_d));
}

FusedViews biaffine_fuse(const ag::Var& h_syn, const ag::Var& h_sem, const ag::Var& w1,
                         const ag::Var& w2) {
  FusedViews out;
  out.align_syn = ag::softmax_rows(ag::matmul(ag::matmul(h_syn, w1), ag::transpose(h_sem)));
  out.align_sem = ag::softmax_rows(ag::matmul(ag::matmul(h_sem, w2), ag::transpose(h_syn)));
  out.syn = ag::matmul(out.align_syn, h_sem);
  out.sem = ag::matmul(out.align_sem, h_syn);
  return out;
}

SynergyOutput encode_comment(const Matrix& h0, const Matrix& a_syn_hat,
                             const SynergyParams& params, const SynergyConfig& config,
                             EncodeMode mode, ForwardContext& ctx) {
  SynergyOutput out;
  const ag::Var h_init = ag::Var::constant(h0);
  if (mode == EncodeMode::kNoDualGcn) {
    out.hx = ag::concat_cols(h_init, h_init);
    return out;
  }
  if (a_syn_hat.rows() != h0.rows()) throw ShapeMismatch("adjacency and embeddings disagree on n");

  const ag::Var a_syn = ag::Var::constant(a_syn_hat);
  ag::Var h_syn = h_init;
  ag::Var h_sem = h_init;
  for (int l = 0; l < config.layers; ++l) {
    const auto li = static_cast<size_t>(l);
    const ag::Var next_syn = gcn_layer(h_syn, a_syn, params.w_syn[li], params.ln_syn[li], config.ln_eps);

    const ag::Var a_sem = semantic_adjacency(h_sem, params.wq, params.wk);
    out.semantic_adjacencies.push_back(a_sem.value());
    const ag::Var a_sem_tilde = normalize_sym(ag::add_identity(a_sem));
    const ag::Var next_sem = gcn_layer(h_sem, a_sem_tilde, params.w_sem[li], params.ln_sem[li], config.ln_eps);

    FusedViews fused = biaffine_fuse(next_syn, next_sem, params.w1, params.w2);
    out.alignments.push_back(fused.align_syn.value());
    out.alignments.push_back(fused.align_sem.value());
    h_syn = dropout(fused.syn, config.dropout, ctx);
    h_sem = dropout(fused.sem, config.dropout, ctx);
  }
  out.h_syn = h_syn;
  out.h_sem = h_sem;
  out.hx = ag::concat_cols(h_sem, h_syn);
  return out;
}

SynergyOutput encode_comment(const TokenSequence& tokens, const EmbeddingProvider& embedder,
                             const ArcProvider& parser, const SynergyParams& params,
                             const SynergyConfig& config, EncodeMode mode,
                             ForwardContext& ctx) {
  const Matrix h0 = embedder.embed(tokens).values;
  if (mode == EncodeMode::kNoDualGcn) return encode_comment(h0, Matrix(), params, config, mode, ctx);
  const Matrix a_hat =
      normalize_sym(prune_syntactic(parser.arc_probabilities(tokens).values, config.tau, config.eta));
  return encode_comment(h0, a_hat, params, config, mode, ctx);
}

ag::Var differential_penalty(const ag::Var& h_syn, const ag::Var& h_sem) {
  const ag::Var a = ag::center_normalize_cols(h_syn, 1e-8);
  const ag::Var b = ag::center_normalize_cols(h_sem, 1e-8);
  const ag::Var c = ag::matmul(ag::transpose(a), b);
  return ag::sum(ag::hadamard(c, c));
}

}  // namespace teachpro
