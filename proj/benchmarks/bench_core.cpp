// Copyright 2026 The tritrain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Microbenchmarks for the hot paths: the convolution forward and backward
// pass, one DAN and one CNN training step, and the exact McNemar p-value.

#include <benchmark/benchmark.h>

#include "tritrain/adam.hpp"
#include "tritrain/models.hpp"
#include "tritrain/rng.hpp"
#include "tritrain/stats.hpp"
#include "tritrain/tape.hpp"

namespace {

using namespace tritrain;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.normal();
  return t;
}

// Args: sentence length, filter width. 768-d input, 192 filters.
void BM_Conv1dForwardBackward(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const Tensor x = random_tensor({len, 768}, rng);
  Parameter filters("f", random_tensor({192, width, 768}, rng));
  Parameter bias("b", Tensor({192}));
  for (auto _ : state) {
    Tape tape;
    Var pooled = max_over_time(conv1d_valid(tape.input(x), tape.parameter(filters), tape.parameter(bias)));
    Var loss = sum(pooled);
    tape.backward(loss);
    benchmark::DoNotOptimize(filters.grad.raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_Conv1dForwardBackward)->Args({10, 2})->Args({10, 5})->Args({30, 5})->Unit(benchmark::kMillisecond);

void train_step_bench(benchmark::State& state, const ArchConfig& arch) {
  const auto len = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  ModelParams m = init_params(arch, rng);
  Adam adam(m.parameters);
  const Tensor x = random_tensor({len, input_dim(arch)}, rng);
  for (auto _ : state) {
    Tape tape;
    Var loss = softmax_cross_entropy(forward(tape, m, x, true, rng), 1);
    tape.backward(loss);
    adam.step(m.parameters);
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_DanTrainStep300(benchmark::State& state) { train_step_bench(state, DanConfig::for_input(300)); }
BENCHMARK(BM_DanTrainStep300)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_CnnTrainStep768(benchmark::State& state) { train_step_bench(state, CnnConfig{}); }
BENCHMARK(BM_CnnTrainStep768)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_McNemarExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mcnemar_exact_p(n / 2 - n / 10, n / 2 + n / 10));
}
BENCHMARK(BM_McNemarExact)->Arg(20)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
