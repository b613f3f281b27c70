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
#include "unrollpilot/featurizer.hpp"
#include "unrollpilot/mlp.hpp"
#include "unrollpilot/random.hpp"

namespace {

using namespace unrollpilot;

Eigen::MatrixXd batch(Eigen::Index cols) {
  Rng rng(1);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features::kFeatureCount), cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = rng.uniform(0.0, 8.0);
  }
  return x;
}

std::vector<std::size_t> labels(std::size_t n) {
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i % 7;
  return y;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const ir::LoopNest nest = synth::generate_nest(3);
  for (auto _ : state) benchmark::DoNotOptimize(features::extract_features(nest));
}
BENCHMARK(BM_ExtractFeatures);

void BM_ForwardBatch(benchmark::State& state) {
  const mlp::MlpModel m = mlp::init_model({});
  const Eigen::MatrixXd x = batch(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mlp::forward_batch(m, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(32)->Arg(256);

// One optimizer step at the default batch size.
void BM_TrainStep(benchmark::State& state) {
  const mlp::TrainConfig config;
  mlp::MlpModel m = mlp::init_model(config);
  mlp::AdamState adam(m);
  const Eigen::MatrixXd x = batch(static_cast<Eigen::Index>(config.batch_size));
  const std::vector<std::size_t> y = labels(config.batch_size);
  for (auto _ : state) {
    const mlp::Gradients g = mlp::loss_and_gradients(m, x, y);
    mlp::adam_step(m, adam, g, config);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.batch_size));
}
BENCHMARK(BM_TrainStep);

}  // namespace
