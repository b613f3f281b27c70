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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

#include "gradient_check.hpp"
#include "reference_interpreter.hpp"
#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/dataset.hpp"
#include "unrollpilot/eval.hpp"
#include "unrollpilot/mlp.hpp"
#include "unrollpilot/random.hpp"
#include "unrollpilot/vm.hpp"

namespace {

using namespace unrollpilot;
using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* title, bool pass, const std::string& detail, double secs) {
  std::printf("[%s] %2d %-34s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title, detail.c_str(),
              secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs one criterion; an exception counts as FAIL.
void criterion(int id, const char* title, const std::function<bool(std::string&)>& body) {
  const auto t0 = Clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(id, title, pass, detail, seconds_since(t0));
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string jsonl(const data::Dataset& ds) {
  std::ostringstream out;
  data::write_jsonl(ds, out);
  return out.str();
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) x(r, c) = rng.uniform(-1.0, 1.0);
  }
  return x;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());

  criterion(1, "semantic preservation", [](std::string& d) {
    const auto t0 = Clock::now();
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const vm::Program base = vm::lower(synth::generate_nest(seed));
      const auto expected = vm::execute(base, {}).buffer_state;
      for (std::int64_t k : data::kFactors) {
        if (k == 1) continue;
        const auto got =
            vm::execute(vm::apply_unroll(base, base.innermost_level(), k), {}).buffer_state;
        mismatches += !vm::bit_identical(expected, got);
      }
    }
    const double secs = seconds_since(t0);
    d = fmt("200 nests x 7 factors, %.0f mismatches, %.1f s", static_cast<double>(mismatches),
            secs);
    return mismatches == 0 && secs < 60.0;
  });

  criterion(2, "gradient check 10-8-6-7", [](std::string& d) {
    mlp::TrainConfig config;
    config.layer_dims = {10, 8, 6, 7};
    const mlp::MlpModel m = mlp::init_model(config);
    const auto check = oracle::check_gradients(m, uniform_matrix(10, 5, 3), {0, 6, 2, 3, 2}, 1e-4);
    d = fmt("max relative error %.3g over %.0f parameters", check.max_relative_error,
            static_cast<double>(check.parameters));
    return check.max_relative_error < 1e-4;
  });

  criterion(3, "zero model loss is ln 7", [](std::string& d) {
    const mlp::MlpModel m = mlp::zero_model(mlp::canonical_dims());
    data::Dataset ds;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      ds.push_back(data::label_exhaustive(synth::generate_nest(seed), {}));
    }
    const double loss = mlp::mean_loss(m, mlp::feature_matrix(ds), mlp::label_vector(ds));
    d = fmt("|loss - ln 7| = %.3g", std::abs(loss - std::log(7.0)));
    return std::abs(loss - std::log(7.0)) < 1e-9;
  });

  criterion(4, "Adam first step", [](std::string& d) {
    const mlp::TrainConfig config;
    mlp::MlpModel m = mlp::zero_model({1, 1});
    mlp::AdamState state(m);
    mlp::Gradients g;
    g.weights = {Eigen::MatrixXd::Ones(1, 1)};
    g.biases = {Eigen::VectorXd::Ones(1)};
    mlp::adam_step(m, state, g, config);
    const double expected = -config.learning_rate / (1.0 + config.adam_epsilon);
    const double err = std::max(std::abs(m.weights[0](0, 0) - expected),
                                std::abs(m.biases[0][0] - expected));
    d = fmt("|theta - (-lr/(1+eps))| = %.3g", err);
    return state.step == 1 && err < 1e-12;
  });

  // Shared by criteria 5, 6 and 10.
  std::printf("labeling 10000 generated nests (seeds 0..), %zu job(s)...\n", jobs);
  std::fflush(stdout);
  const auto t_build = Clock::now();
  data::BuildResult built;
  try {
    built = data::build_dataset(10000, 0, {}, {}, jobs);
  } catch (const std::exception& e) {
    std::printf("dataset build failed: %s\n", e.what());
  }
  const data::Dataset& big = built.samples;
  std::printf("  %zu samples, %zu discarded, %.1f s\n", big.size(), built.discarded.size(),
              seconds_since(t_build));

  criterion(5, "uniform random baseline", [&](std::string& d) {
    const double acc = eval::evaluate_accuracy(eval::uniform_random_predictor(42), big).accuracy;
    d = fmt("accuracy %.4f on %.0f samples", acc, static_cast<double>(big.size()));
    return big.size() >= 10000 && acc >= 0.12 && acc <= 0.165;
  });

  criterion(6, "trained model beats random", [&](std::string& d) {
    const auto t0 = Clock::now();
    const mlp::TrainConfig config;
    const data::Split split = data::split_dataset(big, {}, config.seed);
    const mlp::TrainResult result = mlp::train(split.train, split.val, config);
    const double acc = mlp::accuracy(result.model, split.test);
    const double random_acc =
        eval::evaluate_accuracy(eval::uniform_random_predictor(config.seed), split.test).accuracy;
    const double secs = seconds_since(t0);
    d = fmt("held-out %.4f vs random %.4f, ", acc, random_acc) +
        fmt("%.0f train samples, best epoch %.0f, ", static_cast<double>(split.train.size()),
            static_cast<double>(result.history.best_epoch)) +
        fmt("%.0f s", secs);
    return big.size() >= 5000 && acc >= 0.20 && acc > random_acc && secs <= 1800.0;
  });

  criterion(7, "label_exhaustive vs brute force", [](std::string& d) {
    std::size_t agree = 0;
    for (std::uint64_t seed = 5000; seed < 5100; ++seed) {
      const ir::LoopNest nest = synth::generate_nest(seed);
      agree += data::label_exhaustive(nest, {}).optimal_class == oracle::reference_label(nest);
    }
    d = fmt("%.0f / 100 agree", static_cast<double>(agree));
    return agree == 100;
  });

  criterion(8, "metric identities", [&](std::string& d) {
    std::size_t checked = 0, violations = 0;
    auto check = [&](double optimal, double predicted, double without, bool factor_one) {
      const double pc = eval::pc_ratio(optimal, predicted);
      const double sp = eval::sp_ratio(without, predicted);
      const double oracle_sp = eval::sp_ratio(without, optimal);
      violations += !(pc > 0.0 && pc <= 1.0);
      violations += (pc == 1.0) != (predicted == optimal);
      violations += factor_one && sp != 1.0;
      violations += !(oracle_sp >= 1.0);
      ++checked;
    };
    for (std::size_t i = 0; i < std::min<std::size_t>(big.size(), 2000); ++i) {
      const data::LabeledSample& s = big[i];
      for (std::size_t k = 0; k < data::kNumClasses; ++k) {
        check(s.costs[s.optimal_class], s.costs[k], s.without_cost, k == 0);
      }
    }
    const auto suite = eval::benchmark_suite();
    for (std::size_t k = 0; k < data::kNumClasses; ++k) {
      for (const eval::CaseResult& c :
           eval::run_benchmarks(suite, eval::fixed_predictor(k), {}).cases) {
        if (c.error) {
          ++violations;
          continue;
        }
        const double optimal = c.costs[data::class_of_factor(c.optimal_factor)];
        const double predicted = c.costs[k];
        violations += c.pc != eval::pc_ratio(optimal, predicted);
        check(optimal, predicted, c.costs[0], k == 0);
      }
    }
    d = fmt("%.0f (sample, factor) pairs, %.0f violations", static_cast<double>(checked),
            static_cast<double>(violations));
    return violations == 0 && checked > 0;
  });

  criterion(9, "determinism", [](std::string& d) {
    const std::size_t h1 = std::hash<std::string>{}(jsonl(data::build_dataset(1000, 42, {}, {}).samples));
    const std::size_t h2 = std::hash<std::string>{}(jsonl(data::build_dataset(1000, 42, {}, {}).samples));

    const data::Dataset small = data::build_dataset(400, 7, {}, {}).samples;
    const data::Split split = data::split_dataset(small, {}, 3);
    mlp::TrainConfig config;
    config.seed = 3;
    config.max_epochs = 5;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("unrollpilot-acceptance-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    mlp::save_model(mlp::train(split.train, split.val, config).model, dir / "a.bin");
    mlp::save_model(mlp::train(split.train, split.val, config).model, dir / "b.bin");
    const bool same_model = file_bytes(dir / "a.bin") == file_bytes(dir / "b.bin") &&
                            !file_bytes(dir / "a.bin").empty();
    std::filesystem::remove_all(dir);
    char buf[128];
    std::snprintf(buf, sizeof buf, "dataset hash %016zx %s, model files %s", h1,
                  h1 == h2 ? "stable" : "differs", same_model ? "identical" : "differ");
    d = buf;
    return h1 == h2 && same_model;
  });

  criterion(10, "label diversity", [&](std::string& d) {
    const auto hist = data::class_histogram(big);
    std::string shares;
    bool ok = big.size() >= 10000;
    for (std::size_t c = 0; c < data::kNumClasses; ++c) {
      const double share = static_cast<double>(hist[c]) / static_cast<double>(big.size());
      ok = ok && share >= 0.02 && share <= 0.60;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%ld:%.3f", c ? " " : "", static_cast<long>(data::kFactors[c]),
                    share);
      shares += buf;
    }
    d = shares;
    return ok;
  });

  std::printf("%d criteria failed, total %.1f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
