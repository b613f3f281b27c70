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

#include "unrollpilot/eval.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <ostream>

#include <nlohmann/json.hpp>

#include "unrollpilot/error.hpp"
#include "unrollpilot/random.hpp"

namespace unrollpilot::eval {

using nlohmann::json;

Predictor model_predictor(const mlp::MlpModel& model) {
  auto shared = std::make_shared<const mlp::MlpModel>(model);
  return [shared](const data::LabeledSample& s) {
    return mlp::predict_factor(*shared, s.features).class_index;
  };
}

Predictor uniform_random_predictor(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](const data::LabeledSample&) { return rng->index(data::kNumClasses); };
}

Predictor oracle_predictor() {
  return [](const data::LabeledSample& s) { return s.optimal_class; };
}

Predictor fixed_predictor(std::size_t class_index) {
  if (class_index >= data::kNumClasses) throw DomainError("class index out of range");
  return [class_index](const data::LabeledSample&) { return class_index; };
}

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

std::size_t checked_class(std::size_t c) {
  if (c >= data::kNumClasses) {
    throw DomainError("predictor returned class " + std::to_string(c) + ", expected < 7");
  }
  return c;
}

}  // namespace

double pc_ratio(double optimal_exec, double predicted_exec) {
  require_positive(optimal_exec, "optimal_exec");
  require_positive(predicted_exec, "predicted_exec");
  return optimal_exec / predicted_exec;
}

double sp_ratio(double without_exec, double predicted_exec) {
  require_positive(without_exec, "without_exec");
  require_positive(predicted_exec, "predicted_exec");
  return without_exec / predicted_exec;
}

AccuracyReport evaluate_accuracy(const Predictor& predictor, const data::Dataset& samples) {
  if (samples.empty()) throw DomainError("cannot evaluate an empty dataset");
  AccuracyReport report;
  report.sample_count = samples.size();
  std::size_t correct = 0;
  for (const data::LabeledSample& s : samples) {
    const std::size_t predicted = checked_class(predictor(s));
    ++report.confusion.at(s.optimal_class)[predicted];
    if (predicted == s.optimal_class) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return report;
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

namespace {

using ir::Access;
using ir::AffineIndex;
using ir::Expr;
using ir::ExprKind;
using ir::OperandType;

constexpr OperandType kF32 = OperandType::Float32;

AffineIndex at(std::size_t level, std::int64_t offset = 0) { return {level, offset}; }

Expr load(const std::string& buffer, std::vector<AffineIndex> indices) {
  return Expr::load(Access{buffer, std::move(indices)});
}

Expr add(Expr a, Expr b) { return Expr::binary(ExprKind::Add, kF32, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return Expr::binary(ExprKind::Mul, kF32, std::move(a), std::move(b)); }

std::vector<ir::LoopLevel> levels_of(std::initializer_list<std::int64_t> spans) {
  std::vector<ir::LoopLevel> levels;
  for (std::int64_t span : spans) {
    ir::LoopLevel level;
    level.index = levels.size();
    level.span = span;
    levels.push_back(level);
  }
  return levels;
}

ir::ScheduleOpt applied(ir::ScheduleKind kind, std::vector<std::size_t> levels,
                        std::int64_t factor) {
  return {kind, true, std::move(levels), factor};
}

}  // namespace

ir::LoopNest make_matmul_chain(std::int64_t ni, std::int64_t nj, std::int64_t nk) {
  ir::LoopNest nest;
  nest.id = "matmul_chain-" + std::to_string(ni) + "x" + std::to_string(nj) + "x" +
            std::to_string(nk);
  nest.levels = levels_of({ni, nj, nk});
  nest.buffers = {{"A", kF32, {ni, nk}},
                  {"B", kF32, {nk, nj}},
                  {"C", kF32, {ni, nj}},
                  {"E", kF32, {nj}},
                  {"D", kF32, {ni, nj}}};
  const Access c{"C", {at(0), at(1)}};
  nest.operations.push_back({1, 0, Expr::constant(kF32, 0.0), c});
  nest.operations.push_back(
      {2, 0, add(Expr::load(c), mul(load("A", {at(0), at(2)}), load("B", {at(2), at(1)}))), c});
  nest.operations.push_back(
      {2, 1, mul(Expr::load(c), load("E", {at(1)})), Access{"D", {at(0), at(1)}}});
  return nest;
}

ir::LoopNest make_blur(std::int64_t height, std::int64_t width) {
  ir::LoopNest nest;
  nest.id = "blur-" + std::to_string(height) + "x" + std::to_string(width);
  nest.levels = levels_of({height, width});
  nest.buffers = {{"in", kF32, {height + 2, width + 2}}, {"out", kF32, {height, width}}};
  Expr sum = add(add(add(add(load("in", {at(0, 0), at(1, 1)}), load("in", {at(0, 1), at(1, 0)})),
                         load("in", {at(0, 1), at(1, 1)})),
                     load("in", {at(0, 1), at(1, 2)})),
                 load("in", {at(0, 2), at(1, 1)}));
  nest.operations.push_back({1, 0,
                             Expr::binary(ExprKind::Div, kF32, std::move(sum),
                                          Expr::constant(kF32, 5.0)),
                             Access{"out", {at(0), at(1)}}});
  return nest;
}

ir::LoopNest make_conv2d(std::int64_t channels, std::int64_t height, std::int64_t width) {
  ir::LoopNest nest;
  nest.id = "conv2d-" + std::to_string(channels) + "x" + std::to_string(height) + "x" +
            std::to_string(width);
  nest.levels = levels_of({channels, height, width});
  nest.buffers = {{"in", kF32, {height + 2, width + 2}},
                  {"w", kF32, {channels, 9}},
                  {"out", kF32, {channels, height, width}}};
  std::optional<Expr> acc;
  for (std::int64_t dy = 0; dy < 3; ++dy) {
    for (std::int64_t dx = 0; dx < 3; ++dx) {
      Expr tap = mul(load("w", {at(0), AffineIndex{std::nullopt, dy * 3 + dx}}),
                     load("in", {at(1, dy), at(2, dx)}));
      acc = acc ? add(std::move(*acc), std::move(tap)) : std::move(tap);
    }
  }
  nest.operations.push_back({2, 0, std::move(*acc), Access{"out", {at(0), at(1), at(2)}}});
  return nest;
}

std::vector<BenchmarkCase> benchmark_suite() {
  using ir::ScheduleKind;
  std::vector<BenchmarkCase> cases;

  cases.push_back({"matmul_chain", "n16", make_matmul_chain(16, 16, 16)});
  cases.push_back({"matmul_chain", "n32", make_matmul_chain(32, 32, 32)});
  BenchmarkCase tiled{"matmul_chain", "n32_tiled", make_matmul_chain(32, 32, 32)};
  tiled.nest.schedule = {applied(ScheduleKind::Interchange, {1, 2}, 0),
                         applied(ScheduleKind::Tiling, {0, 1}, 8)};
  cases.push_back(std::move(tiled));

  cases.push_back({"blur", "128x128", make_blur(128, 128)});
  cases.push_back({"blur", "64x512", make_blur(64, 512)});
  BenchmarkCase vec{"blur", "128x128_vec", make_blur(128, 128)};
  vec.nest.schedule = {applied(ScheduleKind::Vectorization, {1}, 8),
                       applied(ScheduleKind::Parallelization, {0}, 0)};
  cases.push_back(std::move(vec));

  cases.push_back({"conv2d", "c4_32x32", make_conv2d(4, 32, 32)});
  cases.push_back({"conv2d", "c8_64x64", make_conv2d(8, 64, 64)});
  BenchmarkCase par{"conv2d", "c4_32x32_par", make_conv2d(4, 32, 32)};
  par.nest.schedule = {applied(ScheduleKind::Tiling, {1, 2}, 16),
                       applied(ScheduleKind::Parallelization, {0}, 0)};
  cases.push_back(std::move(par));

  for (BenchmarkCase& c : cases) c.nest.id = c.name + "/" + c.variant;
  return cases;
}

EvalReport run_benchmarks(const std::vector<BenchmarkCase>& cases, const Predictor& predictor,
                          const vm::CostModel& cost_model) {
  EvalReport report;
  std::size_t correct = 0;
  double pc_sum = 0.0;
  double sp_sum = 0.0;
  for (const BenchmarkCase& bc : cases) {
    CaseResult r;
    r.benchmark = bc.name;
    r.variant = bc.variant;
    try {
      const data::LabeledSample sample = data::label_exhaustive(bc.nest, cost_model);
      const std::size_t predicted = checked_class(predictor(sample));
      r.costs = sample.costs;
      r.predicted_factor = data::kFactors[predicted];
      r.optimal_factor = data::kFactors[sample.optimal_class];
      r.pc = pc_ratio(sample.costs[sample.optimal_class], sample.costs[predicted]);
      r.sp = sp_ratio(sample.without_cost, sample.costs[predicted]);
      ++report.evaluated;
      if (predicted == sample.optimal_class) ++correct;
      pc_sum += r.pc;
      sp_sum += r.sp;
    } catch (const Error& e) {
      r.error = e.what();
    }
    report.cases.push_back(std::move(r));
  }
  if (report.evaluated > 0) {
    const auto n = static_cast<double>(report.evaluated);
    report.accuracy = static_cast<double>(correct) / n;
    report.mean_pc = pc_sum / n;
    report.mean_sp = sp_sum / n;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json to_json(const EvalReport& report) {
  json cases = json::array();
  for (const CaseResult& r : report.cases) {
    cases.push_back({{"benchmark", r.benchmark},
                     {"variant", r.variant},
                     {"error", r.error ? json(*r.error) : json(nullptr)},
                     {"predicted_factor", r.predicted_factor},
                     {"optimal_factor", r.optimal_factor},
                     {"costs", r.costs},
                     {"pc", r.pc},
                     {"sp", r.sp}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"evaluated", report.evaluated},
          {"accuracy", report.accuracy},
          {"mean_pc", report.mean_pc},
          {"mean_sp", report.mean_sp},
          {"random_baseline", report.random_baseline},
          {"cases", std::move(cases)}};
}

EvalReport report_from_json(const json& doc) {
  try {
    if (doc.at("schema_version") != kReportSchemaVersion) {
      throw ParseError("report: unsupported schema_version");
    }
    EvalReport report;
    report.evaluated = doc.at("evaluated").get<std::size_t>();
    report.accuracy = doc.at("accuracy").get<double>();
    report.mean_pc = doc.at("mean_pc").get<double>();
    report.mean_sp = doc.at("mean_sp").get<double>();
    report.random_baseline = doc.at("random_baseline").get<double>();
    for (const json& c : doc.at("cases")) {
      CaseResult r;
      r.benchmark = c.at("benchmark").get<std::string>();
      r.variant = c.at("variant").get<std::string>();
      if (!c.at("error").is_null()) r.error = c.at("error").get<std::string>();
      r.predicted_factor = c.at("predicted_factor").get<std::int64_t>();
      r.optimal_factor = c.at("optimal_factor").get<std::int64_t>();
      r.costs = c.at("costs").get<std::array<double, data::kNumClasses>>();
      r.pc = c.at("pc").get<double>();
      r.sp = c.at("sp").get<double>();
      report.cases.push_back(std::move(r));
    }
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

namespace {

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_csv(const EvalReport& report, std::ostream& out) {
  out << "benchmark,variant,predicted,optimal,pc,sp\n";
  for (const CaseResult& r : report.cases) {
    out << r.benchmark << ',' << r.variant << ',';
    if (r.error) {
      out << ",,,\n";
      continue;
    }
    out << r.predicted_factor << ',' << r.optimal_factor << ',' << shortest(r.pc) << ','
        << shortest(r.sp) << '\n';
  }
}

}  // namespace unrollpilot::eval
