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

// Forward cost of the shared head against the independent baseline, plus a
// full model forward at a few widths.

#include <benchmark/benchmark.h>

#include "teachpro/model.hpp"
#include "teachpro/prediction_head.hpp"

namespace {

using namespace teachpro;

void head_forward(benchmark::State& state, HeadMode mode) {
  HeadConfig hc;
  hc.dim = static_cast<int>(state.range(0));
  hc.mode = mode;
  ParamStore store;
  Rng rng(0);
  const auto head = make_head(hc, store, rng);
  const ag::Var evidence = ag::Var::constant(gaussian(hc.num_dims, hc.dim, 1.0, rng));
  ForwardContext ctx;
  for (auto _ : state) {
    auto r = head->classify(evidence, ctx);
    benchmark::DoNotOptimize(r.probs.value().data());
  }
  state.counters["params"] = static_cast<double>(store.parameter_count());
}

void BM_SharedHead(benchmark::State& state) { head_forward(state, HeadMode::kShared); }
void BM_IndependentHead(benchmark::State& state) { head_forward(state, HeadMode::kIndependent); }

BENCHMARK(BM_SharedHead)->Arg(64)->Arg(256)->Arg(768)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_IndependentHead)->Arg(64)->Arg(256)->Arg(768)->Unit(benchmark::kMicrosecond);

void BM_ModelForward(benchmark::State& state) {
  Config c;
  c.set("encoder.dim", std::to_string(state.range(0)));
  TeachProModel model(ModelConfig::from_config(c), make_embedder(c), make_parser(c), 0);
  const auto ex = model.prepare(generate_synthetic(1, 50, 0)[0]);
  for (auto _ : state) {
    auto r = model.predict(ex);
    benchmark::DoNotOptimize(r.prediction.probs.value().data());
  }
  state.counters["tokens"] = static_cast<double>(ex.tokens.size());
}

BENCHMARK(BM_ModelForward)->Arg(64)->Arg(768)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
