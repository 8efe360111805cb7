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

// Cross-view graph synergy encoder: a syntactic GCN over pruned parser arcs
// and a semantic GCN over an attention-induced graph, exchanging information
// through a biaffine alignment after every layer.

#include <vector>

#include "teachpro/autograd.hpp"
#include "teachpro/encoder_frontend.hpp"
#include "teachpro/params.hpp"

namespace teachpro {

struct SynergyConfig {
  int layers = 3;
  int dim = kDefaultHiddenDim;
  double tau = 1.0;
  double eta = 0.3;
  double dropout = 0.1;
  double ln_eps = 1e-5;
  double fuse_init_gain = 20.0;  // identity share of the biaffine init

  // Throws ConfigError.
  void validate() const;
};

struct LayerNormParams {
  ag::Var scale;  // 1 x d
  ag::Var shift;  // 1 x d
};

struct SynergyParams {
  std::vector<ag::Var> w_syn;  // per layer, d x d
  std::vector<ag::Var> w_sem;  // per layer, d x d
  ag::Var wq, wk;              // shared across layers, d x d
  ag::Var w1, w2;              // biaffine, d x d
  std::vector<LayerNormParams> ln_syn, ln_sem;

  // Registers syn.W.{l}, sem.W.{l}, sem.WQ, sem.WK, fuse.W1, fuse.W2 and
  // ln.{syn,sem}.{l}.{scale,shift}.
  static SynergyParams create(const SynergyConfig& config, ParamStore& store, Rng& rng);
};

enum class EncodeMode { kFull, kNoDualGcn };

// 1[A / tau >= eta] .* A + I. Off-diagonal entries either vanish or keep
// their original probability.
Matrix prune_syntactic(const Matrix& arcs, double tau, double eta);

// D^{-1/2} A D^{-1/2} with D = diag(A 1). Throws ZeroDegree on an empty row.
Matrix normalize_sym(const Matrix& a);
ag::Var normalize_sym(const ag::Var& a);

// LayerNorm(GELU(A_hat H W)) row-wise, followed by the learned scale/shift.
ag::Var gcn_layer(const ag::Var& h, const ag::Var& a_hat, const ag::Var& w,
                  const LayerNormParams& ln, double eps = 1e-5);

// softmax((H Wq)(H Wk)^T / sqrt(d)) row-wise.
ag::Var semantic_adjacency(const ag::Var& h, const ag::Var& wq, const ag::Var& wk);

struct FusedViews {
  ag::Var syn;        // softmax(H_syn W1 H_sem^T) H_sem
  ag::Var sem;        // softmax(H_sem W2 H_syn^T) H_syn
  ag::Var align_syn;  // the two n x n alignment matrices
  ag::Var align_sem;
};

FusedViews biaffine_fuse(const ag::Var& h_syn, const ag::Var& h_sem, const ag::Var& w1,
                         const ag::Var& w2);

struct SynergyOutput {
  ag::Var hx;     // n x 2d, [H_sem || H_syn]
  ag::Var h_syn;  // final branch states (undefined in kNoDualGcn)
  ag::Var h_sem;
  // Row-stochastic matrices produced along the way, for inspection.
  std::vector<Matrix> semantic_adjacencies;
  std::vector<Matrix> alignments;
};

SynergyOutput encode_comment(const Matrix& h0, const Matrix& a_syn_hat,
                             const SynergyParams& params, const SynergyConfig& config,
                             EncodeMode mode, ForwardContext& ctx);

SynergyOutput encode_comment(const TokenSequence& tokens, const EmbeddingProvider& embedder,
                             const ArcProvider& parser, const SynergyParams& params,
                             const SynergyConfig& config, EncodeMode mode,
                             ForwardContext& ctx);

// ||C||_F^2 where C is the cross-covariance of the column-centred,
// column-normalised branch outputs. Optional disentanglement penalty.
ag::Var differential_penalty(const ag::Var& h_syn, const ag::Var& h_sem);

}  // namespace teachpro
