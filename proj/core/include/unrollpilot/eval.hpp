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

/*!
 * \file eval.hpp
 * \brief Prediction quality metrics and the hand-written benchmark suite.
 *
 * PC = optimal cost / predicted cost (how close the prediction gets to the
 * exhaustive optimum), SP = cost without unrolling / predicted cost (speedup
 * over factor 1). Both are computed on VM weighted cost.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "unrollpilot/dataset.hpp"
#include "unrollpilot/loop_ir.hpp"
#include "unrollpilot/mlp.hpp"
#include "unrollpilot/vm.hpp"

namespace unrollpilot::eval {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr double kRandomBaseline = 1.0 / static_cast<double>(data::kNumClasses);

/// Maps a labeled sample to a class index. Model-backed predictors read only
/// `features`; test stubs may look at the label.
using Predictor = std::function<std::size_t(const data::LabeledSample&)>;

Predictor model_predictor(const mlp::MlpModel& model);
/// Uniform over the 7 classes; each copy shares one seeded stream.
Predictor uniform_random_predictor(std::uint64_t seed);
Predictor oracle_predictor();
Predictor fixed_predictor(std::size_t class_index);

/// Both arguments must be positive (DomainError otherwise).
double pc_ratio(double optimal_exec, double predicted_exec);
double sp_ratio(double without_exec, double predicted_exec);

using ConfusionMatrix = std::array<std::array<std::size_t, data::kNumClasses>, data::kNumClasses>;

struct AccuracyReport {
  std::size_t sample_count = 0;
  double accuracy = 0.0;
  double random_baseline = kRandomBaseline;
  /// confusion[true][predicted]
  ConfusionMatrix confusion{};
};

/// Throws DomainError for an empty dataset or a predictor returning a class
/// outside [0, 7).
AccuracyReport evaluate_accuracy(const Predictor& predictor, const data::Dataset& samples);

struct BenchmarkCase {
  std::string name;     // matmul_chain, blur, conv2d
  std::string variant;
  ir::LoopNest nest;
};

/// C[i][j] = 0; C[i][j] += A[i][k] * B[k][j]; D[i][j] = C[i][j] * E[j].
ir::LoopNest make_matmul_chain(std::int64_t ni, std::int64_t nj, std::int64_t nk);
/// 5-point stencil averaged over a (h + 2) x (w + 2) input.
ir::LoopNest make_blur(std::int64_t height, std::int64_t width);
/// Per-channel 3x3 convolution over c x h x w outputs.
ir::LoopNest make_conv2d(std::int64_t channels, std::int64_t height, std::int64_t width);

/// Three variants each of matmul_chain, blur and conv2d, in that order.
std::vector<BenchmarkCase> benchmark_suite();

struct CaseResult {
  std::string benchmark;
  std::string variant;
  std::optional<std::string> error;  // set when labeling failed
  std::int64_t predicted_factor = 0;
  std::int64_t optimal_factor = 0;
  std::array<double, data::kNumClasses> costs{};
  double pc = 0.0;
  double sp = 0.0;

  bool operator==(const CaseResult&) const = default;
};

struct EvalReport {
  std::vector<CaseResult> cases;
  std::size_t evaluated = 0;  // cases without error
  double accuracy = 0.0;
  double mean_pc = 0.0;
  double mean_sp = 0.0;
  double random_baseline = kRandomBaseline;

  bool operator==(const EvalReport&) const = default;
};

/// Labels each case exhaustively, asks the predictor, and records PC and SP.
/// A failing case is reported with `error` set and does not stop the others.
EvalReport run_benchmarks(const std::vector<BenchmarkCase>& cases, const Predictor& predictor,
                          const vm::CostModel& cost_model);

nlohmann::json to_json(const EvalReport& report);
/// Throws ParseError.
EvalReport report_from_json(const nlohmann::json& doc);

/// Header `benchmark,variant,predicted,optimal,pc,sp`; one row per case.
void write_csv(const EvalReport& report, std::ostream& out);

}  // namespace unrollpilot::eval
