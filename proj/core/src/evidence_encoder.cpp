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

#include "teachpro/evidence_encoder.hpp"

#include <cmath>

#include "teachpro/error.hpp"

namespace teachpro {

RefinementParams RefinementParams::create(const EvidenceConfig& config, ParamStore& store,
                                          Rng& rng) {
  if (!(config.dyt_alpha_init > 0)) throw NonPositiveAlpha("dyt.alpha_init must be > 0");
  const int d = config.dim;
  RefinementParams p;
  p.wk = store.add("refine.WK", glorot(d, d, rng));
  p.u = store.add("refine.u", gaussian(2 * d, 1, 0.01, rng));
  p.gamma = store.add("dyt.gamma", Matrix::Ones(1, d));
  p.beta = store.add("dyt.beta", Matrix::Zero(1, d));
  p.alpha = store.add("dyt.alpha", Matrix::Constant(1, 1, config.dyt_alpha_init));
  p.w_proj = store.add("readout.Wproj", glorot(2 * d, d, rng));
  return p;
}

Matrix encode_dimension_words(std::span<const std::string> words,
                              const EmbeddingProvider& embedder) {
  Matrix q(static_cast<Eigen::Index>(words.size()), embedder.dim());
  for (size_t i = 0; i < words.size(); ++i) {
    const TokenSequence tokens = tokenize(words[i]);
    q.row(static_cast<Eigen::Index>(i)) = embedder.embed(tokens).values.colwise().mean();
  }
  return q;
}

std::vector<std::vector<int>> segment_prototypes(const CommentRecord* record,
                                                 const TokenSequence& tokens, SegmentMode mode,
                                                 int k) {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) throw EmptySnippet("cannot segment an empty sequence");
  std::vector<std::vector<int>> blocks(static_cast<size_t>(k));
  const int base = n / k;
  const int extra = n % k;
  int at = 0;
  for (int j = 0; j < k; ++j) {
    const int size = base + (j < extra ? 1 : 0);
    auto& block = blocks[static_cast<size_t>(j)];
    for (int t = 0; t < size; ++t) block.push_back(at++);
    if (block.empty()) block.push_back(n - 1);
  }
  if (mode == SegmentMode::kUniform || record == nullptr) return blocks;

  std::vector<std::vector<int>> snippets(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    auto& s = snippets[static_cast<size_t>(j)];
    if (j < kNumDimensions) s = rationale_token_set(*record, j, tokens);
    if (s.empty()) s = blocks[static_cast<size_t>(j)];
  }
  return snippets;
}

RefinedQuery refine_query(const ag::Var& q, const ag::Var& snippet, const ag::Var& wk,
                          const ag::Var& u) {
  if (snippet.rows() == 0) throw EmptySnippet("prototype snippet has no tokens");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  RefinedQuery out;
  const ag::Var scores = ag::matmul(ag::matmul(snippet, wk), ag::transpose(q));  // m x 1
  out.attention = ag::softmax_rows(ag::scale(ag::transpose(scores), inv_sqrt_d));
  const ag::Var pooled = ag::matmul(out.attention, snippet);
  out.gate = ag::sigmoid(ag::matmul(ag::concat_cols(q, pooled), u));
  out.q_star = ag::add(q, ag::mul_scalar(ag::sub(pooled, q), out.gate));
  return out;
}

ag::Var dyt(const ag::Var& z, const ag::Var& gamma, const ag::Var& beta, const ag::Var& alpha) {
  if (!(alpha.item() > 0)) throw NonPositiveAlpha("DyT alpha must be > 0");
  return ag::add_row(ag::mul_row(ag::tanh(ag::mul_scalar(z, alpha)), gamma), beta);
}

EvidenceMatrix extract_evidence(const ag::Var& h_q, const ag::Var& h_x, const ag::Var& w_proj) {
  const ag::Var tokens = ag::matmul(h_x, w_proj);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(h_q.cols()));
  EvidenceMatrix out;
  out.attention = ag::softmax_rows(ag::scale(ag::matmul(h_q, ag::transpose(tokens)), inv_sqrt_d));
  out.h_e = ag::matmul(out.attention, tokens);
  return out;
}

EvidenceOutput encode_evidence(const ag::Var& queries, const ag::Var& h_x,
                               const RefinementParams& params,
                               std::span<const Matrix> snippet_embeddings, RefineMode mode) {
  EvidenceOutput out;
  out.q = queries;
  if (mode == RefineMode::kFull) {
    if (static_cast<Eigen::Index>(snippet_embeddings.size()) != queries.rows()) {
      throw ShapeMismatch("one snippet per dimension query required");
    }
    std::vector<ag::Var> refined;
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      const ag::Var snippet = ag::Var::constant(snippet_embeddings[static_cast<size_t>(i)]);
      RefinedQuery r = refine_query(ag::row(queries, i), snippet, params.wk, params.u);
      out.gates.push_back(r.gate.item());
      refined.push_back(r.q_star);
    }
    out.q_new = ag::stack_rows(refined);
  } else {
    out.q_new = queries;
  }
  out.h_q = dyt(out.q_new, params.gamma, params.beta, params.alpha);
  out.evidence = extract_evidence(out.h_q, h_x, params.w_proj);
  return out;
}

EvidenceOutput encode_evidence(const CommentRecord* record, const TokenSequence& tokens,
                               const ag::Var& h_x, const ag::Var& queries,
                               const RefinementParams& params, const EmbeddingProvider& embedder,
                               SegmentMode segment_mode, RefineMode mode) {
  std::vector<std::vector<int>> snippets;
  std::vector<Matrix> embedded;
  if (mode == RefineMode::kFull) {
    snippets = segment_prototypes(record, tokens, segment_mode, static_cast<int>(queries.rows()));
    for (const auto& s : snippets) embedded.push_back(embedder.embed(subsequence(tokens, s)).values);
  }
  EvidenceOutput out = encode_evidence(queries, h_x, params, embedded, mode);
  out.snippets = std::move(snippets);
  return out;
}

}  // namespace teachpro
