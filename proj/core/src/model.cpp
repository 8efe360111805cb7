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

#include "teachpro/model.hpp"

#include "teachpro/error.hpp"

namespace teachpro {

Ablation parse_ablation(std::string_view name) {
  if (name == "full") return Ablation::kFull;
  if (name == "no_dualgcn") return Ablation::kNoDualGcn;
  if (name == "no_refine") return Ablation::kNoRefine;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Ablation mode) {
  switch (mode) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoDualGcn:
      return "no_dualgcn";
    case Ablation::kNoRefine:
      return "no_refine";
  }
  return "full";
}

HeadMode parse_head_mode(std::string_view name) {
  if (name == "shared") return HeadMode::kShared;
  if (name == "independent") return HeadMode::kIndependent;
  throw ConfigError("unknown head mode '" + std::string(name) + "'");
}

std::string_view to_string(HeadMode mode) {
  return mode == HeadMode::kShared ? "shared" : "independent";
}

ModelConfig ModelConfig::from_config(const Config& config) {
  ModelConfig m;
  m.dim = config.get_int("encoder.dim");
  const int max_len = config.get_int("data.max_len");
  if (max_len < 1) throw ConfigError("data.max_len must be >= 1");
  m.max_len = static_cast<size_t>(max_len);
  m.ablation = parse_ablation(config.get("model.mode"));
  if (!config.get_bool("refine.enabled")) m.ablation = Ablation::kNoRefine;

  m.synergy.layers = config.get_int("synergy.layers");
  m.synergy.dim = m.dim;
  m.synergy.tau = config.get_double("synergy.tau");
  m.synergy.eta = config.get_double("synergy.eta");
  m.synergy.dropout = config.get_double("synergy.dropout");
  m.synergy.fuse_init_gain = config.get_double("synergy.fuse_init_gain");
  m.synergy.validate();

  m.evidence.dim = m.dim;
  const auto words = config.get_strings("dims.words");
  if (words.size() != kNumDimensions) throw ConfigError("dims.words needs exactly 5 entries");
  std::copy(words.begin(), words.end(), m.evidence.words.begin());
  m.evidence.refine_enabled = m.ablation != Ablation::kNoRefine;
  m.evidence.dyt_alpha_init = config.get_double("dyt.alpha_init");
  m.evidence.trainable_queries = config.get_bool("dims.trainable_queries");

  m.head.dim = m.dim;
  m.head.dropout = config.get_double("head.dropout");
  m.head.mode = parse_head_mode(config.get("head.mode"));

  const std::string& segments = config.get("refine.eval_snippets");
  if (segments == "uniform") {
    m.eval_segments = SegmentMode::kUniform;
  } else if (segments == "annotated") {
    m.eval_segments = SegmentMode::kAnnotated;
  } else {
    throw ConfigError("refine.eval_snippets must be uniform or annotated");
  }

  const auto weights = config.get_doubles("head.class_weights");
  if (weights.size() != kNumClasses) throw InvalidWeights("head.class_weights needs 3 values");
  for (double w : weights) {
    if (!(w > 0)) throw InvalidWeights("class weights must be > 0");
  }
  std::copy(weights.begin(), weights.end(), m.class_weights.begin());
  m.diff_reg_weight = config.get_double("loss.diff_reg_weight");
  if (m.diff_reg_weight < 0) throw ConfigError("loss.diff_reg_weight must be >= 0");
  return m;
}

std::shared_ptr<const EmbeddingProvider> make_embedder(const Config& config) {
  const std::string& provider = config.get("encoder.provider");
  if (provider == "stub") {
    return std::make_shared<StubEmbedder>(config.get_int("encoder.dim"),
                                          config.get_u64("encoder.seed"),
                                          config.get_double("encoder.position_scale"));
  }
  if (provider == "pretrained") {
    const std::string& file = config.get("encoder.file");
    if (file.empty()) throw ProviderUnavailable("encoder.file is required for the pretrained provider");
    auto embedder = std::make_shared<PrecomputedEmbedder>(file);
    if (embedder->dim() != config.get_int("encoder.dim")) {
      throw ConfigError("encoder.dim = " + config.get("encoder.dim") + " but " + file + " holds " +
                        std::to_string(embedder->dim()) + "-d embeddings");
    }
    return embedder;
  }
  throw ConfigError("encoder.provider must be stub or pretrained");
}

std::shared_ptr<const ArcProvider> make_parser(const Config& config) {
  const std::string& provider = config.get("parser.provider");
  if (provider == "stub") return std::make_shared<ChainArcProvider>(config.get_double("parser.stub_score"));
  if (provider == "file") {
    const std::string& file = config.get("parser.file");
    if (file.empty()) throw ProviderUnavailable("parser.file is required for the file provider");
    return std::make_shared<ParseFileArcProvider>(file);
  }
  throw ConfigError("parser.provider must be stub or file");
}

TeachProModel::TeachProModel(ModelConfig config, std::shared_ptr<const EmbeddingProvider> embedder,
                             std::shared_ptr<const ArcProvider> parser, uint64_t init_seed)
    : config_(std::move(config)), embedder_(std::move(embedder)), parser_(std::move(parser)) {
  if (embedder_->dim() != config_.dim) throw ConfigError("embedding width differs from model dim");
  Rng rng(init_seed);
  synergy_ = SynergyParams::create(config_.synergy, params_, rng);
  refinement_ = RefinementParams::create(config_.evidence, params_, rng);
  head_ = make_head(config_.head, params_, rng);
  Matrix q = encode_dimension_words(config_.evidence.words, *embedder_);
  queries_ = config_.evidence.trainable_queries ? params_.add("dims.Q", std::move(q))
                                                : ag::Var::constant(std::move(q));
}

PreparedExample TeachProModel::prepare(const CommentRecord& record) const {
  PreparedExample ex;
  ex.record = record;
  ex.tokens = tokenize(record.text, config_.max_len);
  ex.h0 = embedder_->embed(ex.tokens).values;
  if (config_.ablation != Ablation::kNoDualGcn) {
    ex.a_syn_hat = normalize_sym(prune_syntactic(parser_->arc_probabilities(ex.tokens).values,
                                                 config_.synergy.tau, config_.synergy.eta));
  }
  for (int d = 0; d < kNumDimensions; ++d) ex.gold.push_back(rationale_token_set(record, d, ex.tokens));
  if (config_.ablation != Ablation::kNoRefine) {
    ex.annotated_snippets = segment_prototypes(&record, ex.tokens, SegmentMode::kAnnotated);
    ex.uniform_snippets = segment_prototypes(&record, ex.tokens, SegmentMode::kUniform);
    for (const auto& s : ex.annotated_snippets)
      ex.annotated_embeddings.push_back(embedder_->embed(subsequence(ex.tokens, s)).values);
    for (const auto& s : ex.uniform_snippets)
      ex.uniform_embeddings.push_back(embedder_->embed(subsequence(ex.tokens, s)).values);
  }
  return ex;
}

std::vector<PreparedExample> TeachProModel::prepare(std::span<const CommentRecord> records) const {
  std::vector<PreparedExample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(prepare(r));
  return out;
}

ForwardResult TeachProModel::forward(const PreparedExample& ex, ForwardContext& ctx,
                                     SegmentMode segments) const {
  ForwardResult out;
  const EncodeMode encode_mode =
      config_.ablation == Ablation::kNoDualGcn ? EncodeMode::kNoDualGcn : EncodeMode::kFull;
  out.synergy = encode_comment(ex.h0, ex.a_syn_hat, synergy_, config_.synergy, encode_mode, ctx);

  const bool refine = config_.ablation != Ablation::kNoRefine;
  const auto& embeds = segments == SegmentMode::kAnnotated ? ex.annotated_embeddings : ex.uniform_embeddings;
  out.evidence = encode_evidence(queries_, out.synergy.hx, refinement_,
                                 refine ? std::span<const Matrix>(embeds) : std::span<const Matrix>(),
                                 refine ? RefineMode::kFull : RefineMode::kNoRefine);
  if (refine) {
    out.evidence.snippets = segments == SegmentMode::kAnnotated ? ex.annotated_snippets : ex.uniform_snippets;
  }
  out.prediction = head_->classify(out.evidence.evidence.h_e, ctx);

  std::vector<int> labels(ex.record.scores.begin(), ex.record.scores.end());
  out.loss = classification_loss(out.prediction, labels, config_.class_weights);
  if (config_.diff_reg_weight > 0 && encode_mode == EncodeMode::kFull) {
    out.diff_penalty = differential_penalty(out.synergy.h_syn, out.synergy.h_sem);
    out.loss = ag::add(out.loss, ag::scale(out.diff_penalty, config_.diff_reg_weight));
  }
  return out;
}

ForwardResult TeachProModel::predict(const PreparedExample& example) const {
  ForwardContext ctx;
  return forward(example, ctx, config_.eval_segments);
}

SimilarityTrace TeachProModel::similarity_trace(const PreparedExample& example) const {
  const ForwardResult r = predict(example);
  return teachpro::similarity_trace(r.evidence.q.value(), r.evidence.q_new.value(),
                                    r.evidence.h_q.value(), r.evidence.evidence.h_e.value());
}

}  // namespace teachpro
