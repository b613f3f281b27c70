/*
 * Copyright 2026 The UnrollPilot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/dataset.hpp"
#include "unrollpilot/eval.hpp"
#include "unrollpilot/vm.hpp"

namespace {

using namespace unrollpilot;

// Blur at the middle data size; big enough that execution dominates.
const ir::LoopNest& blur() {
  static const ir::LoopNest nest = eval::make_blur(128, 128);
  return nest;
}

void BM_Lower(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(vm::lower(blur()));
}
BENCHMARK(BM_Lower);

void BM_ApplyUnroll(benchmark::State& state) {
  const vm::Program base = vm::lower(blur());
  for (auto _ : state) {
    benchmark::DoNotOptimize(vm::apply_unroll(base, base.innermost_level(), state.range(0)));
  }
}
BENCHMARK(BM_ApplyUnroll)->RangeMultiplier(4)->Range(1, 64);

void BM_Execute(benchmark::State& state) {
  const vm::Program base = vm::lower(blur());
  const vm::Program p = vm::apply_unroll(base, base.innermost_level(), state.range(0));
  std::uint64_t executed = 0;
  for (auto _ : state) {
    const auto report = vm::execute(p, {});
    executed += report.executed_instruction_count;
    benchmark::DoNotOptimize(report.weighted_cost);
  }
  state.counters["instr/s"] =
      benchmark::Counter(static_cast<double>(executed), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Execute)->Arg(1)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GenerateNest(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate_nest(seed++));
}
BENCHMARK(BM_GenerateNest);

// Seven full executions per nest; the cost of building a dataset.
void BM_LabelExhaustive(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(data::label_exhaustive(synth::generate_nest(seed++ % 64), {}));
  }
}
BENCHMARK(BM_LabelExhaustive)->Unit(benchmark::kMillisecond);

}  // namespace
