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

#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "unrollpilot/error.hpp"
#include "unrollpilot/eval.hpp"

namespace unrollpilot {
namespace {

using namespace unrollpilot::testing;

const eval::EvalReport& oracle_report() {
  static const eval::EvalReport r =
      eval::run_benchmarks(eval::benchmark_suite(), eval::oracle_predictor(), {});
  return r;
}

data::Dataset labelled_only(std::size_t n) {
  data::Dataset ds(n);
  for (std::size_t i = 0; i < n; ++i) ds[i].optimal_class = (i * 3 + i / 7) % data::kNumClasses;
  return ds;
}

TEST(Ratios, Examples) {
  EXPECT_DOUBLE_EQ(eval::pc_ratio(80, 100), 0.8);
  EXPECT_EQ(eval::pc_ratio(37.5, 37.5), 1.0);
  EXPECT_DOUBLE_EQ(eval::sp_ratio(120, 100), 1.2);
  for (double bad : {0.0, -1.0, std::nan(""), HUGE_VAL}) {
    EXPECT_THROW(eval::pc_ratio(bad, 1), DomainError);
    EXPECT_THROW(eval::pc_ratio(1, bad), DomainError);
    EXPECT_THROW(eval::sp_ratio(bad, 1), DomainError);
    EXPECT_THROW(eval::sp_ratio(1, bad), DomainError);
  }
}

TEST(EvaluateAccuracy, OracleStubIsPerfect) {
  const data::Dataset ds = labelled_only(50);
  const auto r = eval::evaluate_accuracy(eval::oracle_predictor(), ds);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.sample_count, 50u);
  EXPECT_DOUBLE_EQ(r.random_baseline, 1.0 / 7.0);
}

TEST(EvaluateAccuracy, ConfusionRowsSumToClassCounts) {
  const data::Dataset ds = labelled_only(500);
  const auto r = eval::evaluate_accuracy(eval::uniform_random_predictor(3), ds);
  const auto h = data::class_histogram(ds);
  std::size_t diagonal = 0;
  for (std::size_t t = 0; t < data::kNumClasses; ++t) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < data::kNumClasses; ++p) row += r.confusion[t][p];
    EXPECT_EQ(row, h[t]);
    diagonal += r.confusion[t][t];
  }
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(diagonal) / 500.0);
}

TEST(EvaluateAccuracy, FixedPredictorHitsOneClass) {
  const data::Dataset ds = labelled_only(70);
  const auto h = data::class_histogram(ds);
  EXPECT_DOUBLE_EQ(eval::evaluate_accuracy(eval::fixed_predictor(4), ds).accuracy,
                   static_cast<double>(h[4]) / 70.0);
  EXPECT_THROW(eval::fixed_predictor(7), DomainError);
}

TEST(EvaluateAccuracy, UniformRandomNearOneSeventh) {
  const auto r = eval::evaluate_accuracy(eval::uniform_random_predictor(11), labelled_only(10000));
  EXPECT_GE(r.accuracy, 0.12);
  EXPECT_LE(r.accuracy, 0.165);
}

TEST(EvaluateAccuracy, Errors) {
  EXPECT_THROW(eval::evaluate_accuracy(eval::oracle_predictor(), {}), DomainError);
  const eval::Predictor bad = [](const data::LabeledSample&) { return std::size_t{9}; };
  EXPECT_THROW(eval::evaluate_accuracy(bad, labelled_only(3)), DomainError);
}

TEST(EvaluateAccuracy, ModelPredictorReadsFeatures) {
  const eval::Predictor p = eval::model_predictor(mlp::zero_model(mlp::canonical_dims()));
  for (const auto& s : labelled_only(10)) EXPECT_EQ(p(s), 0u);
}

TEST(Benchmarks, SuiteShape) {
  const auto suite = eval::benchmark_suite();
  ASSERT_EQ(suite.size(), 9u);
  std::map<std::string, int> per_name;
  for (const auto& c : suite) {
    ++per_name[c.name];
    EXPECT_TRUE(ir::validate_nest(c.nest).ok()) << c.name << "/" << c.variant;
    EXPECT_EQ(c.nest.id, c.name + "/" + c.variant);
  }
  EXPECT_EQ(per_name, (std::map<std::string, int>{{"blur", 3}, {"conv2d", 3}, {"matmul_chain", 3}}));
  EXPECT_EQ(suite[0].name, "matmul_chain");
  EXPECT_EQ(suite[3].name, "blur");
  EXPECT_EQ(suite[6].name, "conv2d");
  EXPECT_EQ(suite[0].nest.num_levels(), 3u);
  EXPECT_EQ(suite[3].nest.num_levels(), 2u);
  EXPECT_EQ(suite[6].nest.num_levels(), 3u);
}

TEST(Benchmarks, MatmulChainComputesTheProduct) {
  const std::int64_t n = 4;
  const ir::LoopNest nest = eval::make_matmul_chain(n, n, n);
  const auto state = vm::execute(vm::lower(nest), {}).buffer_state;
  // Buffers in declaration order: A, B, C, E, D.
  auto init = [](std::int64_t buffer, std::int64_t e) {
    return static_cast<float>(((e * 7 + buffer * 13 + 3) % 19) - 9) * 0.25f;
  };
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      float c = 0.0f;
      for (std::int64_t k = 0; k < n; ++k) c = c + init(0, i * n + k) * init(1, k * n + j);
      const float d = c * init(3, j);
      EXPECT_EQ(state[2].floats[static_cast<std::size_t>(i * n + j)], static_cast<double>(c));
      EXPECT_EQ(state[4].floats[static_cast<std::size_t>(i * n + j)], static_cast<double>(d));
    }
  }
}

TEST(Benchmarks, BlurWithSpan128PrefersUnrolling) {
  const auto sample = data::label_exhaustive(eval::make_blur(128, 128), {});
  EXPECT_GT(data::kFactors[sample.optimal_class], 1);
}

TEST(Benchmarks, OracleHasPerfectCloseness) {
  const auto& r = oracle_report();
  ASSERT_EQ(r.cases.size(), 9u);
  EXPECT_EQ(r.evaluated, 9u);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.mean_pc, 1.0);
  for (const auto& c : r.cases) {
    EXPECT_FALSE(c.error.has_value());
    EXPECT_EQ(c.pc, 1.0);
    EXPECT_GE(c.sp, 1.0);
    EXPECT_EQ(c.predicted_factor, c.optimal_factor);
  }
}

TEST(Benchmarks, FactorOneStub) {
  const auto r = eval::run_benchmarks(eval::benchmark_suite(), eval::fixed_predictor(0), {});
  for (const auto& c : r.cases) {
    EXPECT_EQ(c.sp, 1.0);
    EXPECT_EQ(c.predicted_factor, 1);
    const double best = c.costs[data::class_of_factor(c.optimal_factor)];
    EXPECT_EQ(c.pc, best / c.costs[0]);
    EXPECT_LE(c.pc, 1.0);
  }
  EXPECT_EQ(r.mean_sp, 1.0);
}

TEST(Benchmarks, MetricIdentitiesForEveryFixedPolicy) {
  const auto& oracle = oracle_report();
  for (std::size_t k = 0; k < data::kNumClasses; ++k) {
    const auto r = eval::run_benchmarks(eval::benchmark_suite(), eval::fixed_predictor(k), {});
    for (std::size_t i = 0; i < r.cases.size(); ++i) {
      const auto& c = r.cases[i];
      const double predicted = c.costs[k];
      const double optimal = c.costs[data::class_of_factor(c.optimal_factor)];
      EXPECT_GT(c.pc, 0.0);
      EXPECT_LE(c.pc, 1.0);
      EXPECT_EQ(c.pc == 1.0, predicted == optimal);
      EXPECT_GE(oracle.cases[i].sp, c.sp);
    }
  }
}

TEST(Benchmarks, FailingCaseDoesNotStopOthers) {
  auto cases = eval::benchmark_suite();
  cases[1].nest.levels[0].span = 0;
  const auto r = eval::run_benchmarks(cases, eval::oracle_predictor(), {});
  ASSERT_EQ(r.cases.size(), 9u);
  EXPECT_TRUE(r.cases[1].error.has_value());
  EXPECT_EQ(r.evaluated, 8u);
  EXPECT_FALSE(r.cases[0].error.has_value());
  EXPECT_FALSE(r.cases[2].error.has_value());
}

TEST(Report, JsonRoundTrip) {
  auto cases = eval::benchmark_suite();
  cases[4].nest.levels[0].span = 0;
  const auto r = eval::run_benchmarks(cases, eval::uniform_random_predictor(1), {});
  const auto back = eval::report_from_json(nlohmann::json::parse(eval::to_json(r).dump()));
  EXPECT_EQ(back, r);
  EXPECT_THROW(eval::report_from_json(nlohmann::json::object()), ParseError);
  nlohmann::json doc = eval::to_json(r);
  doc["schema_version"] = 2;
  EXPECT_THROW(eval::report_from_json(doc), ParseError);
}

TEST(Report, Csv) {
  auto cases = eval::benchmark_suite();
  cases[8].nest.levels[0].span = 0;
  const auto r = eval::run_benchmarks(cases, eval::fixed_predictor(0), {});
  std::ostringstream out;
  eval::write_csv(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "benchmark,variant,predicted,optimal,pc,sp");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("matmul_chain,n16,1,", 0), 0u) << line;
  EXPECT_EQ(line.substr(line.size() - 2), ",1");
  std::size_t rows = 1;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 9u);
  EXPECT_EQ(last, "conv2d,c4_32x32_par,,,,");
}

}  // namespace
}  // namespace unrollpilot
