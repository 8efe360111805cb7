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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "teachpro/checkpoint.hpp"
#include "teachpro/error.hpp"
#include "teachpro/training.hpp"

namespace teachpro {
namespace {

namespace fs = std::filesystem;

Config small_config(int dim = 8) {
  Config c;
  c.set("encoder.dim", std::to_string(dim));
  c.set("synergy.layers", "2");
  c.set("train.batch_size", "4");
  c.set("train.epochs", "1");
  c.set("train.runs", "1");
  return c;
}

struct Fixture {
  Config config;
  std::unique_ptr<TeachProModel> model;
  std::vector<PreparedExample> train, val;

  explicit Fixture(Config c, size_t n = 10, uint64_t init = 1) : config(std::move(c)) {
    model = std::make_unique<TeachProModel>(ModelConfig::from_config(config), make_embedder(config),
                                            make_parser(config), init);
    const auto records = generate_synthetic(n, 20, 0);
    train = model->prepare(records);
    val = model->prepare(std::span(records).first(std::min<size_t>(n, 5)));
  }
};

TEST(LrSchedule, CosineValues) {
  const TrainConfig tc;
  EXPECT_NEAR(lr_schedule(0, tc), 2e-3, 1e-15);
  EXPECT_NEAR(lr_schedule(10, tc), 5e-4, 1e-15);
  EXPECT_NEAR(lr_schedule(5, tc), 1.25e-3, 1e-15);
  for (int e = 0; e < 10; ++e) EXPECT_GE(lr_schedule(e, tc), lr_schedule(e + 1, tc));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamStore store;
  ag::Var p = store.add("p", Matrix{{1.0, -2.0}});
  TrainConfig tc;
  Adam adam(store, tc);
  p.mutable_grad() = Matrix{{0.5, -3.0}};
  adam.step(0.1);
  // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g).
  EXPECT_NEAR(p.value()(0, 0), 1.0 - 0.1, 1e-6);
  EXPECT_NEAR(p.value()(0, 1), -2.0 + 0.1, 1e-6);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(ClipGradNorm, ScalesToMaximum) {
  ParamStore store;
  ag::Var a = store.add("a", Matrix::Zero(1, 2));
  ag::Var b = store.add("b", Matrix::Zero(1, 1));
  a.mutable_grad() = Matrix{{3.0, 0.0}};
  b.mutable_grad() = Matrix{{4.0}};
  EXPECT_NEAR(clip_grad_norm(store, 1.0), 5.0, 1e-12);
  EXPECT_NEAR(std::hypot(a.grad()(0, 0), b.grad()(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(clip_grad_norm(store, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(std::hypot(a.grad()(0, 0), b.grad()(0, 0)), 1.0, 1e-12);
}

TEST(Training, OneEpochSmoke) {
  Fixture f(small_config());
  const TrainConfig tc = TrainConfig::from_config(f.config);
  const RunRecord r = train_model(*f.model, f.train, f.val, tc, 0);
  ASSERT_EQ(r.epochs.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.epochs[0].running_loss));
  ASSERT_TRUE(r.epochs[0].validation.has_value());
  EXPECT_TRUE(std::isfinite(r.epochs[0].validation->loss));
  EXPECT_EQ(r.epochs[0].validation->metrics.samples, 5u);
}

TEST(Training, SameSeedSameResult) {
  Config c = small_config();
  c.set("train.epochs", "2");
  Fixture a(c), b(c);
  const TrainConfig tc = TrainConfig::from_config(c);
  const RunRecord ra = train_model(*a.model, a.train, a.val, tc, 3);
  const RunRecord rb = train_model(*b.model, b.train, b.val, tc, 3);
  EXPECT_EQ(ra.epochs.back().running_loss, rb.epochs.back().running_loss);
  EXPECT_EQ(a.model->params().checksum(), b.model->params().checksum());
  EXPECT_EQ(encode_checkpoint(a.model->params(), c), encode_checkpoint(b.model->params(), c));
}

TEST(Training, EveryParameterMovesAndProvidersStayFrozen) {
  Fixture f(small_config());
  std::vector<Matrix> before;
  for (const auto& [name, p] : f.model->params().entries()) before.push_back(p.value());
  const RunRecord r = train_model(*f.model, f.train, {}, TrainConfig::from_config(f.config), 0);
  size_t i = 0;
  for (const auto& [name, p] : f.model->params().entries()) {
    EXPECT_NE(p.value(), before[i++]) << name << " was not updated";
  }
  EXPECT_EQ(r.encoder_checksum_before, r.encoder_checksum_after);
  EXPECT_EQ(r.parser_checksum_before, r.parser_checksum_after);
  EXPECT_EQ(r.encoder_checksum_after, make_embedder(f.config)->checksum());
}

TEST(Training, NonFiniteLossAborts) {
  Fixture f(small_config());
  ag::Var w = f.model->params().get("head.WC");
  w.mutable_value()(0, 0) = std::nan("");
  EXPECT_THROW(train_model(*f.model, f.train, {}, TrainConfig::from_config(f.config), 0), NonFiniteLoss);
}

TEST(Training, EmptyTrainingSplit) {
  Fixture f(small_config());
  EXPECT_THROW(train_model(*f.model, {}, f.val, TrainConfig::from_config(f.config), 0), EmptySplit);
  EXPECT_THROW(evaluate(*f.model, {}), EmptySplit);
}

TEST(Training, AblationsKeepParameterShapes) {
  auto shapes = [](const char* mode) {
    Config c = small_config();
    c.set("model.mode", mode);
    Fixture f(c, 2);
    std::vector<std::tuple<std::string, Eigen::Index, Eigen::Index>> out;
    for (const auto& [name, p] : f.model->params().entries()) out.emplace_back(name, p.rows(), p.cols());
    ForwardContext ctx;
    const ForwardResult r = f.model->forward(f.train[0], ctx, SegmentMode::kAnnotated);
    EXPECT_EQ(r.synergy.hx.cols(), 16);
    EXPECT_EQ(r.evidence.evidence.h_e.rows(), 5);
    EXPECT_EQ(r.prediction.probs.cols(), 3);
    return out;
  };
  const auto full = shapes("full");
  EXPECT_EQ(full, shapes("no_dualgcn"));
  EXPECT_EQ(full, shapes("no_refine"));
}

TEST(Training, TrainLossRoughlyNonIncreasing) {
  Config c = small_config(16);
  c.set("train.epochs", "12");
  c.set("train.batch_size", "8");
  Fixture f(c, 60);
  const RunRecord r = train_model(*f.model, f.train, {}, TrainConfig::from_config(c), 0);
  for (size_t e = 1; e < r.epochs.size(); ++e) {
    EXPECT_LE(r.epochs[e].train->loss, 1.05 * r.epochs[e - 1].train->loss) << "epoch " << r.epochs[e].epoch;
  }
  EXPECT_LT(r.epochs.back().train->loss, r.epochs.front().train->loss);
}

TEST(Checkpoint, RoundTripIsBitExactAndPredictionsMatch) {
  Fixture f(small_config());
  train_model(*f.model, f.train, {}, TrainConfig::from_config(f.config), 0);
  const fs::path path = fs::temp_directory_path() / "tp_roundtrip.ckpt";
  save_checkpoint(f.model->params(), f.config, path);
  const LoadedModel loaded = load_checkpoint(path);
  const auto& a = f.model->params().entries();
  const auto& b = loaded.model->params().entries();
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_EQ(a[i].second.value(), b[i].second.value());
  }
  for (size_t i = 0; i < 5; ++i) {
    const ForwardResult x = f.model->predict(f.train[i]);
    const ForwardResult y = loaded.model->predict(loaded.model->prepare(f.train[i].record));
    EXPECT_EQ(x.prediction.probs.value(), y.prediction.probs.value());
    EXPECT_EQ(x.prediction.labels, y.prediction.labels);
  }
  fs::remove(path);
}

TEST(Checkpoint, ConfigMismatch) {
  Fixture f(small_config());
  const Checkpoint ck = decode_checkpoint(encode_checkpoint(f.model->params(), f.config));
  Config other = f.config;
  other.set("synergy.eta", "0.5");
  EXPECT_THROW(restore_parameters(ck, f.model->params(), other.model_hash()), ConfigMismatch);
  Checkpoint edited = ck;
  edited.config_text += "synergy.tau = 2\n";
  EXPECT_THROW(restore_parameters(edited, f.model->params(), ck.config_hash), ConfigMismatch);
  EXPECT_NO_THROW(restore_parameters(ck, f.model->params(), f.config.model_hash()));
}

TEST(Checkpoint, CorruptionDetected) {
  Fixture f(small_config());
  std::string bytes = encode_checkpoint(f.model->params(), f.config);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  EXPECT_THROW(decode_checkpoint(flipped), CorruptCheckpoint);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CorruptCheckpoint);
  EXPECT_THROW(decode_checkpoint("XXXX"), CorruptCheckpoint);
  Checkpoint ck = decode_checkpoint(bytes);
  ck.tensors[0].second = Matrix::Zero(1, 1);
  EXPECT_THROW(restore_parameters(ck, f.model->params(), f.config.model_hash()), CorruptCheckpoint);
}

TEST(Summary, MeanAndSampleDeviation) {
  std::vector<RunRecord> runs(2);
  for (int r = 0; r < 2; ++r) {
    EpochRecord e;
    e.epoch = 1;
    SplitEval s;
    s.metrics.average.accuracy = r == 0 ? 0.6 : 0.8;
    s.metrics.per_dimension[0].macro_f1 = 0.5;
    e.validation = s;
    runs[static_cast<size_t>(r)].epochs.push_back(e);
  }
  const ExperimentSummary sum = summarize(runs);
  EXPECT_EQ(sum.runs, 2u);
  EXPECT_NEAR(sum.average[0].mean, 0.7, 1e-12);
  EXPECT_NEAR(sum.average[0].sd, std::sqrt(0.02), 1e-12);
  EXPECT_EQ(sum.per_dimension[0][1].sd, 0.0);
  EXPECT_NO_THROW(nlohmann::json::parse(summary_json(sum)));
}

TEST(EpochEvents, JsonLinesPerSplit) {
  RunRecord run;
  run.seed = 4;
  EpochRecord e;
  e.epoch = 2;
  e.running_loss = 0.5;
  e.validation = SplitEval{};
  std::istringstream lines(epoch_events(run, e));
  std::string line;
  std::vector<std::string> splits;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("epoch"), 2);
    EXPECT_EQ(j.at("seed"), 4);
    splits.push_back(j.at("split"));
  }
  EXPECT_EQ(splits, (std::vector<std::string>{"train_running", "validation"}));
}

TEST(RunSeed, OffsetsBase) {
  EXPECT_EQ(run_seed(10, 0), 10u);
  EXPECT_EQ(run_seed(10, 3), 13u);
}

}  // namespace
}  // namespace teachpro
