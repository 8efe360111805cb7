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

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "teachpro/config.hpp"
#include "teachpro/data.hpp"
#include "teachpro/metrics.hpp"
#include "teachpro/model.hpp"

namespace teachpro {

struct TrainConfig {
  int batch_size = 64;
  int epochs = 10;
  double lr_init = 2e-3;
  double lr_min = 5e-4;
  int t_max = 10;
  double grad_clip = 5.0;  // <= 0 disables clipping
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int runs = 5;
  uint64_t seed = 0;
  bool eval_train = true;
  int ece_bins = 10;
  double top_frac = 0.2;

  void validate() const;
  static TrainConfig from_config(const Config& config);
};

// Cosine annealing, stepped once per epoch (epoch counts from 0).
double lr_schedule(int epoch, const TrainConfig& config);

class Adam {
 public:
  Adam(ParamStore& params, const TrainConfig& config);
  void step(double lr);
  long steps() const { return t_; }

 private:
  ParamStore& params_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

struct SplitEval {
  double loss = 0;
  MetricsReport metrics;
  AlignmentReport alignment;
};

// Dropout off, evaluation snippets, mean per-record loss.
SplitEval evaluate(const TeachProModel& model, std::span<const PreparedExample> examples,
                   int ece_bins = 10, double top_frac = 0.2);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0;
  double running_loss = 0;  // mean training loss with dropout on
  std::optional<SplitEval> train;
  std::optional<SplitEval> validation;
};

struct RunRecord {
  int run = 0;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::vector<EpochRecord> epochs;
  std::string checkpoint_path;
  bool aborted = false;
  uint64_t encoder_checksum_before = 0, encoder_checksum_after = 0;
  uint64_t parser_checksum_before = 0, parser_checksum_after = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Optimises every parameter of `model` on `train`. `seed` drives the batch
// order and dropout. Throws EmptySplit and NonFiniteLoss.
RunRecord train_model(TeachProModel& model, std::span<const PreparedExample> train,
                      std::span<const PreparedExample> validation, const TrainConfig& config,
                      uint64_t seed, const EpochCallback& on_epoch = {});

// Seed of run r under the multi-seed protocol.
uint64_t run_seed(uint64_t base_seed, int run);

struct RunOptions {
  std::optional<std::filesystem::path> checkpoint;  // written after the last epoch
  std::ostream* log = nullptr;                      // JSONL events
};

// Builds a model from `config` with the init sub-seed of run `run`, trains
// it on the split and optionally saves a checkpoint.
RunRecord train_run(const Config& config, const DatasetSplit& split, int run,
                    const RunOptions& options = {});

struct MeanSd {
  double mean = 0;
  double sd = 0;  // sample standard deviation; 0 for a single run
};

struct ExperimentSummary {
  std::array<std::array<MeanSd, 4>, kNumDimensions> per_dimension{};  // acc, f1, qwk, ece
  std::array<MeanSd, 4> average{};
  size_t runs = 0;
};

// Mean and spread of the final-epoch validation metrics across runs.
ExperimentSummary summarize(std::span<const RunRecord> runs);

std::string metrics_json(const MetricsReport& report);
std::string summary_json(const ExperimentSummary& summary);
// One JSONL line per (epoch, split).
std::string epoch_events(const RunRecord& run, const EpochRecord& epoch);

}  // namespace teachpro
