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

#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teachpro/checkpoint.hpp"
#include "teachpro/config.hpp"
#include "teachpro/data.hpp"
#include "teachpro/error.hpp"
#include "teachpro/metrics.hpp"
#include "teachpro/model.hpp"
#include "teachpro/prediction_head.hpp"
#include "teachpro/rng.hpp"
#include "teachpro/training.hpp"

namespace teachpro::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> head;
  std::string data;
  std::string out = "out";
};

// Built-in defaults < config file < --set < dedicated flags.
Config resolve_config(const CommonFlags& f) {
  Config c = f.config_path.empty() ? Config() : Config::from_file(f.config_path);
  for (const auto& s : f.sets) c.apply_override(s);
  if (f.seed) c.set("seed", std::to_string(*f.seed));
  if (f.mode) c.set("model.mode", *f.mode);
  if (f.head) c.set("head.mode", *f.head);
  if (!f.data.empty()) c.set("data.path", f.data);
  return c;
}

// data.path empty means the synthetic generator (synth.n, synth.vocab, seed).
std::vector<CommentRecord> load_records(const Config& c) {
  const std::string& path = c.get("data.path");
  if (path.empty()) {
    return generate_synthetic(static_cast<size_t>(c.get_int("synth.n")),
                              static_cast<size_t>(c.get_int("synth.vocab")), c.get_u64("seed"));
  }
  return load_dataset(path, parse_data_format(c.get("data.format")));
}

DatasetSplit make_split(const Config& c, const std::vector<CommentRecord>& records) {
  const auto r = c.get_doubles("data.split");
  if (r.size() != 3) throw BadRatios("data.split needs three ratios");
  return split_dataset(records, SplitRatios{r[0], r[1], r[2]}, sub_seed(c.get_u64("seed"), "split"));
}

const std::vector<CommentRecord>& pick_split(const DatasetSplit& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  return s.test;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  auto out = open_out(path);
  out << "dimension";
  for (const auto name : kDimensionNames) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << kDimensionNames[i];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
    out << '\n';
  }
}

int cmd_train(const CommonFlags& f, std::ostream& out) {
  const Config config = resolve_config(f);
  const auto records = load_records(config);
  const DatasetSplit split = make_split(config, records);
  const fs::path dir = f.out;
  fs::create_directories(dir / "checkpoints");
  {
    auto resolved = open_out(dir / "config.txt");
    resolved << config.to_text();
  }
  auto log = open_out(dir / "run.jsonl");
  const int runs = config.get_int("train.runs");
  std::vector<RunRecord> records_out;
  for (int r = 0; r < runs; ++r) {
    RunOptions opts;
    opts.checkpoint = dir / "checkpoints" / ("run" + std::to_string(r) + ".ckpt");
    opts.log = &log;
    records_out.push_back(train_run(config, split, r, opts));
    const RunRecord& rec = records_out.back();
    out << "run " << r << " seed " << rec.seed << ": final train loss "
        << rec.epochs.back().running_loss;
    if (rec.epochs.back().validation) {
      out << ", validation macro-F1 " << rec.epochs.back().validation->metrics.average.macro_f1;
    }
    out << '\n';
  }
  auto summary = open_out(dir / "summary.json");
  summary << summary_json(summarize(records_out)) << '\n';
  out << "wrote " << (dir / "run.jsonl").string() << ", " << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint, const std::string& split_name,
             std::ostream& out) {
  LoadedModel loaded = load_checkpoint(checkpoint);
  Config config = loaded.config;
  if (!f.data.empty()) config.set("data.path", f.data);
  const DatasetSplit split = make_split(config, load_records(config));
  const auto examples = loaded.model->prepare(pick_split(split, split_name));
  const SplitEval ev = evaluate(*loaded.model, examples, config.get_int("eval.ece_bins"),
                                config.get_double("eval.top_frac"));
  ordered_json j;
  j["checkpoint"] = checkpoint;
  j["split"] = split_name;
  j["loss"] = ev.loss;
  j["metrics"] = ordered_json::parse(metrics_json(ev.metrics));
  auto file = open_out(fs::path(f.out) / "metrics.json");
  file << j.dump(2) << '\n';
  out << split_name << " (" << ev.metrics.samples << " records): accuracy "
      << ev.metrics.average.accuracy << ", macro-F1 " << ev.metrics.average.macro_f1 << ", QWK "
      << ev.metrics.average.qwk << ", ECE " << ev.metrics.average.ece << '\n';
  return kExitOk;
}

// Per-epoch alignment rows from a training log.
size_t write_alignment_curves(const fs::path& run_log, std::ofstream& out) {
  std::ifstream in(run_log);
  if (!in) throw Error("cannot read " + run_log.string());
  size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = ordered_json::parse(line);
    if (!j.contains("alignment")) continue;
    for (const auto name : kDimensionNames) {
      const auto& a = j["alignment"][std::string(name)];
      out << j["run"].get<int>() << ',' << j["epoch"].get<int>() << ',' << j["split"].get<std::string>() << ','
          << name << ',' << a["count"].get<size_t>() << ',' << a["precision"].get<double>() << ','
          << a["recall"].get<double>() << ',' << a["iou"].get<double>() << ',' << a["entropy"].get<double>()
          << '\n';
      ++rows;
    }
  }
  return rows;
}

int cmd_analyze(const CommonFlags& f, const std::string& checkpoint, const std::string& split_name,
                std::string run_log, std::ostream& out) {
  LoadedModel loaded = load_checkpoint(checkpoint);
  Config config = loaded.config;
  if (!f.data.empty()) config.set("data.path", f.data);
  const auto records = load_records(config);
  const DatasetSplit split = make_split(config, records);
  const auto examples = loaded.model->prepare(pick_split(split, split_name));
  const fs::path dir = f.out;
  const double top_frac = config.get_double("eval.top_frac");

  // Checkpoints written by `train` live in <out>/checkpoints next to run.jsonl.
  if (run_log.empty()) {
    const fs::path guess = fs::path(checkpoint).parent_path().parent_path() / "run.jsonl";
    if (fs::exists(guess)) run_log = guess.string();
  }
  auto curves = open_out(dir / "alignment.csv");
  curves << "run,epoch,split,dimension,count,precision,recall,iou,entropy\n";
  if (!run_log.empty()) write_alignment_curves(run_log, curves);

  auto align = open_out(dir / "alignment_records.csv");
  align << "record,professor,dimension,n_tokens,gold_size,precision,recall,iou,entropy\n";
  AlignmentAccumulator acc(top_frac);
  std::array<Matrix, 4> sims;
  for (auto& s : sims) s = Matrix::Zero(kNumDimensions, kNumDimensions);
  size_t zero_pairs = 0;
  for (size_t r = 0; r < examples.size(); ++r) {
    const PreparedExample& ex = examples[r];
    const ForwardResult res = loaded.model->predict(ex);
    const Matrix& att = res.evidence.evidence.attention.value();
    acc.add(att, ex.gold);
    for (int d = 0; d < kNumDimensions; ++d) {
      if (ex.gold[d].empty()) continue;
      const RowVector row = att.row(d);
      const AlignmentScores a =
          evidence_alignment(std::span<const double>(row.data(), row.size()), ex.gold[d], top_frac);
      align << r << ',' << ex.record.professor_name << ',' << kDimensionNames[d] << ',' << row.size()
            << ',' << ex.gold[d].size() << ',' << a.precision << ',' << a.recall << ',' << a.iou << ','
            << a.entropy << '\n';
    }
    const SimilarityTrace trace =
        similarity_trace(res.evidence.q.value(), res.evidence.q_new.value(), res.evidence.h_q.value(),
                         res.evidence.evidence.h_e.value());
    for (size_t s = 0; s < sims.size(); ++s) sims[s] += trace.stages[s];
    zero_pairs += trace.zero_pairs.size();
  }
  if (run_log.empty()) {
    // No training log: a single row block for the checkpoint itself.
    const AlignmentReport rep = acc.report();
    for (int d = 0; d < kNumDimensions; ++d) {
      const auto& a = rep.per_dimension[d];
      curves << 0 << ',' << -1 << ',' << split_name << ',' << kDimensionNames[d] << ',' << rep.counts[d]
             << ',' << a.precision << ',' << a.recall << ',' << a.iou << ',' << a.entropy << '\n';
    }
  }
  const double n = static_cast<double>(std::max<size_t>(examples.size(), 1));
  for (size_t s = 0; s < sims.size(); ++s) {
    write_matrix_csv(dir / ("similarity_" + std::string(kSimilarityStages[s]) + ".csv"), sims[s] / n);
  }
  write_matrix_csv(dir / "label_correlation.csv", label_correlation(records));
  out << "analyzed " << examples.size() << " " << split_name << " records into " << dir.string();
  if (zero_pairs) out << " (" << zero_pairs << " zero-vector similarity pairs)";
  out << '\n';
  return kExitOk;
}

int cmd_gen_synth(size_t n, size_t vocab, uint64_t seed, const std::string& format,
                  const std::string& path, std::ostream& out) {
  const auto records = generate_synthetic(n, vocab, seed);
  const DataFormat fmt = parse_data_format(format);
  if (path.empty() || path == "-") {
    fmt == DataFormat::kJsonl ? write_jsonl(records, out) : write_csv(records, out);
    return kExitOk;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  save_dataset(records, path, fmt);
  return kExitOk;
}

size_t count_tensors(const ClassifierHead& head) {
  size_t n = 0;
  for (const auto& t : head.tensors()) n += static_cast<size_t>(t.value().size());
  return n;
}

int cmd_headbench(int dim, int k, int m, int reps, const std::string& csv, std::ostream& out) {
  if (dim < 1 || k < 1 || m < 1 || reps < 1) throw ConfigError("headbench sizes must be >= 1");
  struct Row {
    const char* name;
    size_t params, formula;
    double ms;
  };
  std::vector<Row> rows;
  Rng rng(0);
  const Matrix evidence = gaussian(k, dim, 1.0, rng);
  for (HeadMode mode : {HeadMode::kShared, HeadMode::kIndependent}) {
    ParamStore store;
    HeadConfig hc{dim, k, m, 0.0, mode};
    auto head = make_head(hc, store, rng);
    ForwardContext ctx;
    const ag::Var e = ag::Var::constant(evidence);
    head->classify(e, ctx);  // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) head->classify(e, ctx);
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    const auto [d, kk, mm] = std::tuple{size_t(dim), size_t(k), size_t(m)};
    rows.push_back({mode == HeadMode::kShared ? "shared" : "independent", count_tensors(*head),
                    mode == HeadMode::kShared ? shared_head_parameters(d, kk, mm)
                                              : independent_head_parameters(d, kk, mm),
                    dt.count() / reps});
  }
  const double ratio = static_cast<double>(rows[0].params) / static_cast<double>(rows[1].params);
  out << "d=" << dim << " k=" << k << " m=" << m << '\n';
  out << std::left << std::setw(12) << "head" << std::right << std::setw(14) << "params"
      << std::setw(14) << "formula" << std::setw(14) << "ms/forward" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r.name << std::right << std::setw(14) << r.params
        << std::setw(14) << r.formula << std::setw(14) << std::fixed << std::setprecision(4) << r.ms
        << std::defaultfloat << '\n';
  }
  out << "shared/independent parameter ratio " << std::setprecision(4) << ratio << " (reduction "
      << std::setprecision(4) << 100.0 * (1.0 - ratio) << "%)\n";
  if (!csv.empty()) {
    auto f = open_out(csv);
    f << "head,params,formula,ms_per_forward\n";
    for (const auto& r : rows) f << r.name << ',' << r.params << ',' << r.formula << ',' << r.ms << '\n';
  }
  return kExitOk;
}

void add_model_flags(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--set", f.sets, "Override a config key (key=value), repeatable");
  sub->add_option("--seed", f.seed, "Base seed");
  sub->add_option("--mode", f.mode, "Model variant")->check(CLI::IsMember({"full", "no_dualgcn", "no_refine"}));
  sub->add_option("--head", f.head, "Classifier head")->check(CLI::IsMember({"shared", "independent"}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"TeachPro: five-dimension teaching-evaluation classifier"};
  app.name("teachpro");
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, analyze_flags;

  auto* train = app.add_subcommand("train", "Train under the multi-seed protocol");
  train->add_option("--config", train_flags.config_path, "Config file (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  add_model_flags(train, train_flags);
  train->add_option("--data", train_flags.data, "Dataset path (overrides data.path)");
  train->add_option("--out", train_flags.out, "Output directory")->capture_default_str();

  std::string eval_checkpoint, eval_split = "test";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "Split")->capture_default_str()->check(CLI::IsMember({"train", "validation", "test"}));
  eval->add_option("--data", eval_flags.data, "Dataset path (overrides the stored data.path)");
  eval->add_option("--out", eval_flags.out, "Output directory")->capture_default_str();

  std::string analyze_checkpoint, analyze_split = "test";
  auto* analyze = app.add_subcommand("analyze", "Write alignment, similarity and label-correlation CSVs");
  analyze->add_option("--checkpoint", analyze_checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--split", analyze_split, "Split")->capture_default_str()
      ->check(CLI::IsMember({"train", "validation", "test"}));
  std::string analyze_run;
  analyze->add_option("--data", analyze_flags.data, "Dataset path (overrides the stored data.path)");
  analyze->add_option("--run", analyze_run, "Training log (run.jsonl) for per-epoch alignment curves")
      ->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_flags.out, "Output directory")->capture_default_str();

  size_t synth_n = 200, synth_vocab = 50;
  uint64_t synth_seed = 0;
  std::string synth_format = "jsonl", synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Generate a separable synthetic dataset");
  gen->add_option("--n", synth_n, "Number of records")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--vocab", synth_vocab, "Filler vocabulary size")->capture_default_str();
  gen->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  gen->add_option("--format", synth_format, "jsonl or csv")->capture_default_str()->check(CLI::IsMember({"jsonl", "csv"}));
  gen->add_option("--out", synth_out, "Output file (stdout when omitted)");

  int hb_dim = kDefaultHiddenDim, hb_k = kNumDimensions, hb_m = kNumClasses, hb_reps = 200;
  std::string hb_out;
  auto* headbench = app.add_subcommand("headbench", "Compare shared and independent heads");
  headbench->add_option("--dim", hb_dim, "Hidden size")->capture_default_str();
  headbench->add_option("--k", hb_k, "Dimensions")->capture_default_str();
  headbench->add_option("--m", hb_m, "Classes")->capture_default_str();
  headbench->add_option("--reps", hb_reps, "Timed forwards per head")->capture_default_str();
  headbench->add_option("--out", hb_out, "Optional CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_flags, out);
    if (*eval) return cmd_eval(eval_flags, eval_checkpoint, eval_split, out);
    if (*analyze) return cmd_analyze(analyze_flags, analyze_checkpoint, analyze_split, analyze_run, out);
    if (*gen) return cmd_gen_synth(synth_n, synth_vocab, synth_seed, synth_format, synth_out, out);
    if (*headbench) return cmd_headbench(hb_dim, hb_k, hb_m, hb_reps, hb_out, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "teachpro: " << msg << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace teachpro::cli
