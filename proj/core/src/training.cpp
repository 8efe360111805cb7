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

#include "teachpro/training.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "teachpro/checkpoint.hpp"
#include "teachpro/error.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

using nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (t_max < 1) throw ConfigError("train.t_max must be >= 1");
  if (!(lr_min <= lr_init) || lr_min < 0) throw ConfigError("need 0 <= train.lr_min <= train.lr_init");
  if (runs < 1) throw ConfigError("train.runs must be >= 1");
  if (weight_decay < 0) throw ConfigError("train.weight_decay must be >= 0");
  if (ece_bins < 1) throw ConfigError("eval.ece_bins must be >= 1");
  if (!(top_frac > 0 && top_frac <= 1)) throw ConfigError("eval.top_frac must be in (0, 1]");
}

TrainConfig TrainConfig::from_config(const Config& c) {
  TrainConfig t;
  t.batch_size = c.get_int("train.batch_size");
  t.epochs = c.get_int("train.epochs");
  t.lr_init = c.get_double("train.lr_init");
  t.lr_min = c.get_double("train.lr_min");
  t.t_max = c.get_int("train.t_max");
  t.grad_clip = c.get_double("train.grad_clip");
  t.weight_decay = c.get_double("train.weight_decay");
  t.beta1 = c.get_double("train.adam_beta1");
  t.beta2 = c.get_double("train.adam_beta2");
  t.adam_eps = c.get_double("train.adam_eps");
  t.runs = c.get_int("train.runs");
  t.seed = c.get_u64("seed");
  t.eval_train = c.get_bool("train.eval_train");
  t.ece_bins = c.get_int("eval.ece_bins");
  t.top_frac = c.get_double("eval.top_frac");
  t.validate();
  return t;
}

double lr_schedule(int epoch, const TrainConfig& c) {
  const double e = std::min(std::max(epoch, 0), c.t_max);
  return c.lr_min + 0.5 * (c.lr_init - c.lr_min) * (1.0 + std::cos(std::numbers::pi * e / c.t_max));
}

Adam::Adam(ParamStore& params, const TrainConfig& c)
    : params_(params), beta1_(c.beta1), beta2_(c.beta2), eps_(c.adam_eps), weight_decay_(c.weight_decay) {
  for (const auto& [name, var] : params_.entries()) {
    m_.push_back(Matrix::Zero(var.rows(), var.cols()));
    v_.push_back(Matrix::Zero(var.rows(), var.cols()));
  }
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto& entries = params_.entries();
  for (size_t i = 0; i < entries.size(); ++i) {
    ag::Var& p = entries[i].second;
    Matrix g = p.grad().size() ? p.grad() : Matrix::Zero(p.rows(), p.cols());
    if (weight_decay_ > 0) g += weight_decay_ * p.value();
    m_[i] = beta1_ * m_[i] + (1 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1 - beta2_) * g.cwiseProduct(g);
    p.mutable_value().array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  double sq = 0;
  for (const auto& [name, var] : params.entries()) {
    if (var.grad().size()) sq += var.grad().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double f = max_norm / (norm + 1e-12);
    for (auto& [name, var] : params.entries()) {
      if (var.grad().size()) var.mutable_grad() *= f;
    }
  }
  return norm;
}

SplitEval evaluate(const TeachProModel& model, std::span<const PreparedExample> examples,
                   int ece_bins, double top_frac) {
  if (examples.empty()) throw EmptySplit("cannot evaluate an empty split");
  SplitEval out;
  MetricsAccumulator metrics(ece_bins);
  AlignmentAccumulator alignment(top_frac);
  double loss = 0;
  for (const auto& ex : examples) {
    const ForwardResult r = model.predict(ex);
    loss += r.loss.item();
    metrics.add(ex.record.scores, r.prediction.labels, r.prediction.probs.value());
    alignment.add(r.evidence.evidence.attention.value(), ex.gold);
  }
  out.loss = loss / static_cast<double>(examples.size());
  out.metrics = metrics.report();
  out.alignment = alignment.report();
  return out;
}

namespace {

void clamp_dyt_alpha(ParamStore& params) {
  if (!params.contains("dyt.alpha")) return;
  ag::Var alpha = params.get("dyt.alpha");  // shares the node
  alpha.mutable_value() = alpha.value().cwiseMax(1e-6);
}

}  // namespace

RunRecord train_model(TeachProModel& model, std::span<const PreparedExample> train,
                      std::span<const PreparedExample> validation, const TrainConfig& config,
                      uint64_t seed, const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw EmptySplit("training split is empty");
  RunRecord run;
  run.seed = seed;
  run.encoder_checksum_before = model.embedder().checksum();
  run.parser_checksum_before = model.parser().checksum();

  ParamStore& params = model.params();
  Adam adam(params, config);
  Rng shuffle_rng(sub_seed(seed, "shuffle"));
  Rng dropout_rng(sub_seed(seed, "dropout"));
  std::vector<size_t> order(train.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr_schedule(epoch, config);
    std::iota(order.begin(), order.end(), size_t{0});
    shuffle_rng.shuffle(order);

    double loss_sum = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      for (size_t b = start; b < end; ++b) {
        const PreparedExample& ex = train[order[b]];
        ForwardContext ctx{true, &dropout_rng};
        const ForwardResult r = model.forward(ex, ctx, SegmentMode::kAnnotated);
        const double value = r.loss.item();
        if (!std::isfinite(value)) {
          throw NonFiniteLoss("loss " + std::to_string(value) + " at epoch " + std::to_string(epoch + 1) +
                              ", record " + std::to_string(order[b]) + " (" + ex.record.professor_name +
                              ")");
        }
        loss_sum += value;
        ag::backward(ag::scale(r.loss, inv));
      }
      clip_grad_norm(params, config.grad_clip);
      adam.step(rec.lr);
      clamp_dyt_alpha(params);
    }
    params.zero_grad();
    rec.running_loss = loss_sum / static_cast<double>(train.size());
    if (config.eval_train) rec.train = evaluate(model, train, config.ece_bins, config.top_frac);
    if (!validation.empty()) rec.validation = evaluate(model, validation, config.ece_bins, config.top_frac);
    run.epochs.push_back(rec);
    if (on_epoch) on_epoch(run.epochs.back());
  }

  run.encoder_checksum_after = model.embedder().checksum();
  run.parser_checksum_after = model.parser().checksum();
  return run;
}

uint64_t run_seed(uint64_t base_seed, int run) { return base_seed + static_cast<uint64_t>(run); }

RunRecord train_run(const Config& config, const DatasetSplit& split, int run, const RunOptions& options) {
  const TrainConfig tc = TrainConfig::from_config(config);
  const uint64_t seed = run_seed(tc.seed, run);
  TeachProModel model(ModelConfig::from_config(config), make_embedder(config), make_parser(config),
                      sub_seed(seed, "init"));
  const auto train = model.prepare(split.train);
  const auto val = model.prepare(split.validation);
  RunRecord record;
  record.run = run;
  record.seed = seed;
  record.config_hash = config.model_hash();
  auto log_epoch = [&](const EpochRecord& e) {
    if (options.log) *options.log << epoch_events(record, e) << std::flush;
  };
  RunRecord trained = train_model(model, train, val, tc, seed, log_epoch);
  trained.run = run;
  trained.config_hash = record.config_hash;
  if (options.checkpoint) {
    save_checkpoint(model.params(), config, *options.checkpoint);
    trained.checkpoint_path = options.checkpoint->string();
  }
  return trained;
}

ExperimentSummary summarize(std::span<const RunRecord> runs) {
  ExperimentSummary s;
  std::vector<const MetricsReport*> finals;
  for (const auto& r : runs) {
    if (!r.epochs.empty() && r.epochs.back().validation) finals.push_back(&r.epochs.back().validation->metrics);
  }
  s.runs = finals.size();
  if (finals.empty()) return s;
  auto stat = [&](auto get) {
    MeanSd out;
    for (const auto* f : finals) out.mean += get(*f);
    out.mean /= static_cast<double>(finals.size());
    if (finals.size() > 1) {
      double ss = 0;
      for (const auto* f : finals) ss += (get(*f) - out.mean) * (get(*f) - out.mean);
      out.sd = std::sqrt(ss / static_cast<double>(finals.size() - 1));
    }
    return out;
  };
  auto fields = [&](auto pick) {
    return std::array<MeanSd, 4>{
        stat([&](const MetricsReport& m) { return pick(m).accuracy; }),
        stat([&](const MetricsReport& m) { return pick(m).macro_f1; }),
        stat([&](const MetricsReport& m) { return pick(m).qwk; }),
        stat([&](const MetricsReport& m) { return pick(m).ece; })};
  };
  for (int d = 0; d < kNumDimensions; ++d) {
    s.per_dimension[d] = fields([d](const MetricsReport& m) -> const DimensionMetrics& { return m.per_dimension[d]; });
  }
  s.average = fields([](const MetricsReport& m) -> const DimensionMetrics& { return m.average; });
  return s;
}

namespace {

ordered_json to_json(const DimensionMetrics& m) {
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"qwk", m.qwk}, {"ece", m.ece}};
}

ordered_json to_json(const MetricsReport& r) {
  ordered_json j;
  for (int d = 0; d < kNumDimensions; ++d) j[kDimensionNames[d]] = to_json(r.per_dimension[d]);
  j["average"] = to_json(r.average);
  j["samples"] = r.samples;
  return j;
}

ordered_json to_json(const AlignmentScores& a) {
  return {{"precision", a.precision}, {"recall", a.recall}, {"iou", a.iou}, {"entropy", a.entropy}};
}

ordered_json to_json(const AlignmentReport& r) {
  ordered_json j;
  for (int d = 0; d < kNumDimensions; ++d) {
    j[kDimensionNames[d]] = to_json(r.per_dimension[d]);
    j[kDimensionNames[d]]["count"] = r.counts[d];
  }
  j["average"] = to_json(r.average);
  j["top_frac"] = r.top_frac;
  return j;
}

ordered_json to_json(const std::array<MeanSd, 4>& v) {
  static constexpr const char* kNames[] = {"accuracy", "macro_f1", "qwk", "ece"};
  ordered_json j;
  for (size_t i = 0; i < 4; ++i) j[kNames[i]] = {{"mean", v[i].mean}, {"sd", v[i].sd}};
  return j;
}

std::string hex(uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << v;
  return ss.str();
}

}  // namespace

std::string metrics_json(const MetricsReport& report) { return to_json(report).dump(2); }

std::string summary_json(const ExperimentSummary& s) {
  ordered_json j;
  j["runs"] = s.runs;
  for (int d = 0; d < kNumDimensions; ++d) j[kDimensionNames[d]] = to_json(s.per_dimension[d]);
  j["average"] = to_json(s.average);
  return j.dump(2);
}

std::string epoch_events(const RunRecord& run, const EpochRecord& e) {
  std::string out;
  auto emit = [&](const char* split, double loss, const MetricsReport* m, const AlignmentReport* a) {
    ordered_json j;
    j["event"] = "epoch";
    j["run"] = run.run;
    j["seed"] = run.seed;
    j["config_hash"] = hex(run.config_hash);
    j["epoch"] = e.epoch;
    j["split"] = split;
    j["lr"] = e.lr;
    j["loss"] = loss;
    if (m) j["metrics"] = to_json(*m);
    if (a) j["alignment"] = to_json(*a);
    out += j.dump();
    out += '\n';
  };
  emit("train_running", e.running_loss, nullptr, nullptr);
  if (e.train) emit("train", e.train->loss, &e.train->metrics, &e.train->alignment);
  if (e.validation) emit("validation", e.validation->loss, &e.validation->metrics, &e.validation->alignment);
  return out;
}

}  // namespace teachpro
