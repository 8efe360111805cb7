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
#include <string>
#include <vector>

#include "teachpro/config.hpp"
#include "teachpro/data.hpp"
#include "teachpro/encoder_frontend.hpp"
#include "teachpro/evidence_encoder.hpp"
#include "teachpro/graph_synergy.hpp"
#include "teachpro/metrics.hpp"
#include "teachpro/params.hpp"
#include "teachpro/prediction_head.hpp"

namespace teachpro {

enum class Ablation { kFull, kNoDualGcn, kNoRefine };

Ablation parse_ablation(std::string_view name);
std::string_view to_string(Ablation mode);
HeadMode parse_head_mode(std::string_view name);
std::string_view to_string(HeadMode mode);

struct ModelConfig {
  int dim = kDefaultHiddenDim;
  size_t max_len = kDefaultMaxLen;
  Ablation ablation = Ablation::kFull;
  SynergyConfig synergy;
  EvidenceConfig evidence;
  HeadConfig head;
  // Snippet source when reasons are not to be trusted (evaluation).
  SegmentMode eval_segments = SegmentMode::kUniform;
  std::array<double, kNumClasses> class_weights = {1.0, 1.0, 1.0};
  double diff_reg_weight = 0.0;

  static ModelConfig from_config(const Config& config);
};

// Builds the providers named by encoder.provider / parser.provider.
std::shared_ptr<const EmbeddingProvider> make_embedder(const Config& config);
std::shared_ptr<const ArcProvider> make_parser(const Config& config);

// Everything about a record that does not depend on trainable parameters:
// tokens, frozen embeddings, normalised syntactic adjacency, snippets and
// their standalone embeddings, and gold rationale tokens.
struct PreparedExample {
  CommentRecord record;
  TokenSequence tokens;
  Matrix h0;
  Matrix a_syn_hat;
  std::vector<std::vector<int>> gold;  // per dimension
  std::vector<std::vector<int>> annotated_snippets, uniform_snippets;
  std::vector<Matrix> annotated_embeddings, uniform_embeddings;
};

struct ForwardResult {
  SynergyOutput synergy;
  EvidenceOutput evidence;
  PredictionResult prediction;
  ag::Var loss;          // classification loss (+ weighted penalty when enabled)
  ag::Var diff_penalty;  // undefined unless enabled
};

class TeachProModel {
 public:
  TeachProModel(ModelConfig config, std::shared_ptr<const EmbeddingProvider> embedder,
                std::shared_ptr<const ArcProvider> parser, uint64_t init_seed);

  PreparedExample prepare(const CommentRecord& record) const;
  std::vector<PreparedExample> prepare(std::span<const CommentRecord> records) const;

  ForwardResult forward(const PreparedExample& example, ForwardContext& ctx,
                        SegmentMode segments) const;
  // Evaluation-mode forward with the configured evaluation snippets.
  ForwardResult predict(const PreparedExample& example) const;

  SimilarityTrace similarity_trace(const PreparedExample& example) const;

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const ModelConfig& config() const { return config_; }
  const ClassifierHead& head() const { return *head_; }
  const EmbeddingProvider& embedder() const { return *embedder_; }
  const ArcProvider& parser() const { return *parser_; }
  const ag::Var& queries() const { return queries_; }

 private:
  ModelConfig config_;
  std::shared_ptr<const EmbeddingProvider> embedder_;
  std::shared_ptr<const ArcProvider> parser_;
  ParamStore params_;
  SynergyParams synergy_;
  RefinementParams refinement_;
  std::unique_ptr<ClassifierHead> head_;
  ag::Var queries_;
};

}  // namespace teachpro
