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

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/error.hpp"
#include "unrollpilot/loop_ir_json.hpp"
#include "unrollpilot/vm.hpp"

namespace unrollpilot {
namespace {

using synth::GenParams;
using synth::generate_nest;

TEST(GenerateNest, SeedZeroIsReproducible) {
  const ir::LoopNest a = generate_nest(0);
  const ir::LoopNest b = generate_nest(0);
  EXPECT_TRUE(ir::validate_nest(a).ok());
  EXPECT_EQ(ir::to_json(a).dump(), ir::to_json(b).dump());
  EXPECT_EQ(a.id, "gen-0");
}

TEST(GenerateNest, TenThousandSeedsAreValid) {
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto result = ir::validate_nest(generate_nest(seed));
    ASSERT_TRUE(result.ok()) << "seed " << seed << ": " << result.violations.front();
  }
}

TEST(GenerateNest, CoversTheShapeSpace) {
  std::set<std::size_t> level_counts, op_counts;
  std::size_t min_body = SIZE_MAX, max_body = 0;
  std::size_t annotated = 0, predicated = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const ir::LoopNest nest = generate_nest(seed);
    level_counts.insert(nest.num_levels());
    op_counts.insert(nest.operations.size());
    const std::size_t body = vm::lower(nest).body_sizes.back();
    min_body = std::min(min_body, body);
    max_body = std::max(max_body, body);
    annotated += std::any_of(nest.schedule.begin(), nest.schedule.end(),
                             [](const ir::ScheduleOpt& s) { return s.applied; });
    predicated += std::any_of(nest.levels.begin(), nest.levels.end(),
                              [](const ir::LoopLevel& l) { return l.has_predicate; });
    std::int64_t product = 1;
    for (const auto& l : nest.levels) product *= l.span;
    EXPECT_LE(product, GenParams{}.max_total_iterations);
  }
  EXPECT_EQ(level_counts, (std::set<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(op_counts, (std::set<std::size_t>{1, 2, 3, 4}));
  EXPECT_LE(min_body, 8u);
  EXPECT_GE(max_body, 60u);
  EXPECT_GT(annotated, 0u);
  EXPECT_GT(predicated, 0u);
}

TEST(GenerateNest, HonoursParams) {
  GenParams p;
  p.level_count_range = {2, 2};
  p.op_count_range = {1, 1};
  p.span_choices = {16};
  p.schedule_annotation_probability = 0.0;
  p.predicate_probability = 0.0;
  p.dependency_probability = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ir::LoopNest nest = generate_nest(seed, p);
    ASSERT_TRUE(ir::validate_nest(nest).ok());
    EXPECT_EQ(nest.num_levels(), 2u);
    EXPECT_EQ(nest.operations.size(), 1u);
    for (const auto& s : nest.schedule) EXPECT_FALSE(s.applied);
    for (const auto& l : nest.levels) {
      EXPECT_EQ(l.span, 16);
      EXPECT_FALSE(l.has_predicate);
      EXPECT_TRUE(l.dependent_levels.empty());
    }
  }
}

TEST(GenerateNest, DifferentSeedsDiffer) {
  std::set<std::string> dumps;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ir::LoopNest nest = generate_nest(seed);
    nest.id.clear();
    dumps.insert(ir::to_json(nest).dump());
  }
  EXPECT_GT(dumps.size(), 95u);
}

TEST(GenParams, Validation) {
  EXPECT_NO_THROW(GenParams{}.validate());
  GenParams p;
  p.libcall_probability = 1.5;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.level_count_range = {3, 2};
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.level_count_range = {1, 5};
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.span_choices.clear();
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.span_choices = {0};
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.body_size_range = {1, 4};
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.max_total_iterations = 1;
  EXPECT_THROW(p.validate(), DomainError);
}

}  // namespace
}  // namespace unrollpilot
