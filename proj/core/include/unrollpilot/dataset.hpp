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
 * \file dataset.hpp
 * \brief Exhaustive labeling, dataset assembly, splitting and JSONL storage.
 *
 * JSONL layout: a header line
 *
 *     {"schema_version":1,"factors":[1,2,4,8,16,32,64]}
 *
 * followed by one record per sample:
 *
 *     {"nest_id":"gen-7","features":[186 numbers],"costs":[7 numbers],
 *      "optimal_class":3,"without_cost":1234.0}
 *
 * Numbers are written in shortest round-trip form, so reading a file back
 * reproduces every double bit for bit.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/featurizer.hpp"
#include "unrollpilot/loop_ir.hpp"
#include "unrollpilot/vm.hpp"

namespace unrollpilot::data {

inline constexpr std::size_t kNumClasses = 7;
/// Candidate unrolling factors; a class label is an index into this list.
inline constexpr std::array<std::int64_t, kNumClasses> kFactors = {1, 2, 4, 8, 16, 32, 64};
inline constexpr int kSchemaVersion = 1;

/// Throws DomainError for factors outside kFactors.
std::size_t class_of_factor(std::int64_t factor);

struct LabeledSample {
  std::string nest_id;
  features::FeatureVector features{};
  std::array<double, kNumClasses> costs{};
  std::size_t optimal_class = 0;
  double without_cost = 0.0;

  bool operator==(const LabeledSample&) const = default;
};

using Dataset = std::vector<LabeledSample>;

/// Runs the nest under every factor and labels it with the cheapest one
/// (ties go to the smaller factor). Propagates ExecutionError.
LabeledSample label_exhaustive(const ir::LoopNest& nest, const vm::CostModel& cost_model);

struct Discard {
  std::uint64_t seed;
  std::string reason;
};

struct BuildResult {
  Dataset samples;
  std::vector<Discard> discarded;
};

/// Labels generated nests from consecutive seeds starting at `seed` until
/// `count` samples exist, skipping seeds that fail. Output order follows the
/// seeds regardless of `jobs`.
BuildResult build_dataset(std::size_t count, std::uint64_t seed, const synth::GenParams& params,
                          const vm::CostModel& cost_model, std::size_t jobs = 1);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Stratified by optimal_class: within each class the validation and test
/// quotas are apportioned by largest remainder, the rest goes to training.
/// Throws DomainError for bad ratios or when a split would be empty.
Split split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

std::array<std::size_t, kNumClasses> class_histogram(const Dataset& dataset);

void write_jsonl(const Dataset& dataset, std::ostream& out);
void write_jsonl(const Dataset& dataset, const std::filesystem::path& path);

/// Throws ParseError naming the line and field of the first malformed record,
/// SchemaMismatchError for wrong vector lengths. Empty input is an empty
/// dataset.
Dataset read_jsonl(std::istream& in);
Dataset read_jsonl(const std::filesystem::path& path);

}  // namespace unrollpilot::data
