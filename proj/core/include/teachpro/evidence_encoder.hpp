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

// Dimension-anchored evidence encoder: one query per rating dimension is
// refined against a prototype snippet of the comment, squashed with DyT, and
// used to attend over the graph encoder's token states.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "teachpro/autograd.hpp"
#include "teachpro/data.hpp"
#include "teachpro/encoder_frontend.hpp"
#include "teachpro/params.hpp"

namespace teachpro {

struct EvidenceConfig {
  int dim = kDefaultHiddenDim;
  std::array<std::string, kNumDimensions> words = {"Professionalism", "Occupational",
                                                   "Effectiveness", "Quality", "Other"};
  bool refine_enabled = true;
  double dyt_alpha_init = 0.5;
  bool trainable_queries = false;
};

struct RefinementParams {
  ag::Var wk;      // d x d
  ag::Var u;       // 2d x 1 gate
  ag::Var gamma;   // 1 x d
  ag::Var beta;    // 1 x d
  ag::Var alpha;   // 1 x 1, kept > 0
  ag::Var w_proj;  // 2d x d readout projection applied to H_x

  // Registers refine.WK, refine.u, dyt.{gamma,beta,alpha}, readout.Wproj.
  static RefinementParams create(const EvidenceConfig& config, ParamStore& store, Rng& rng);
};

// k x d matrix of frozen encodings; a word that splits into several tokens
// is the mean of its token rows.
Matrix encode_dimension_words(std::span<const std::string> words,
                              const EmbeddingProvider& embedder);

enum class SegmentMode { kAnnotated, kUniform };

// k token-index snippets. Annotated mode takes the rationale tokens of each
// dimension and falls back to the uniform block when they are empty.
// Uniform mode cuts positions into k contiguous blocks, larger blocks first;
// when n < k the empty blocks take the last token.
std::vector<std::vector<int>> segment_prototypes(const CommentRecord* record,
                                                 const TokenSequence& tokens, SegmentMode mode,
                                                 int k = kNumDimensions);

struct RefinedQuery {
  ag::Var q_star;     // 1 x d
  ag::Var gate;       // 1 x 1, lambda in (0, 1)
  ag::Var attention;  // 1 x m
};

// a = softmax(H_r W_K q / sqrt(d)); p = a^T H_r;
// lambda = sigmoid(u^T [q; p]); q* = (1 - lambda) q + lambda p.
// Throws EmptySnippet for m = 0.
RefinedQuery refine_query(const ag::Var& q, const ag::Var& snippet, const ag::Var& wk,
                          const ag::Var& u);

// gamma .* tanh(alpha z) + beta, row-wise. Throws NonPositiveAlpha.
ag::Var dyt(const ag::Var& z, const ag::Var& gamma, const ag::Var& beta, const ag::Var& alpha);

struct EvidenceMatrix {
  ag::Var h_e;        // k x d
  ag::Var attention;  // k x n, rows sum to 1
};

// H~ = H_x W_proj; A = softmax(H_Q H~^T / sqrt(d)); H_E = A H~.
EvidenceMatrix extract_evidence(const ag::Var& h_q, const ag::Var& h_x, const ag::Var& w_proj);

enum class RefineMode { kFull, kNoRefine };

struct EvidenceOutput {
  ag::Var q;      // initial queries
  ag::Var q_new;  // refined queries (== q in kNoRefine)
  ag::Var h_q;    // after DyT
  EvidenceMatrix evidence;
  std::vector<double> gates;
  std::vector<std::vector<int>> snippets;
};

// snippet_embeddings[i] is the standalone encoding of snippets[i].
EvidenceOutput encode_evidence(const ag::Var& queries, const ag::Var& h_x,
                               const RefinementParams& params,
                               std::span<const Matrix> snippet_embeddings, RefineMode mode);

// Segments, embeds the snippets with the frozen provider and runs the encoder.
EvidenceOutput encode_evidence(const CommentRecord* record, const TokenSequence& tokens,
                               const ag::Var& h_x, const ag::Var& queries,
                               const RefinementParams& params, const EmbeddingProvider& embedder,
                               SegmentMode segment_mode, RefineMode mode);

}  // namespace teachpro
