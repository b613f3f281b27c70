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

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/error.hpp"
#include "unrollpilot/loop_ir.hpp"
#include "unrollpilot/loop_ir_json.hpp"

namespace unrollpilot {
namespace {

using namespace unrollpilot::testing;
using ir::validate_nest;

TEST(ValidateNest, MinimalNestIsValid) {
  EXPECT_TRUE(validate_nest(increment_nest(8, 8)).ok());
}

TEST(ValidateNest, ReportsFirstOutOfBoundsIteration) {
  const auto result = validate_nest(increment_nest(8, 4));
  ASSERT_FALSE(result.ok());
  EXPECT_TRUE(contains(result.violations, "access out of bounds at iteration 4"));
}

TEST(ValidateNest, OffsetShiftsTheFailingIteration) {
  ir::LoopNest nest = increment_nest(8, 10);
  nest.operations[0].store.indices[0].offset = 5;  // i + 5 < 10 fails from i = 5
  const auto result = validate_nest(nest);
  EXPECT_TRUE(contains(result.violations, "access out of bounds at iteration 5"));
}

TEST(ValidateNest, NegativeOffsetFailsAtIterationZero) {
  ir::LoopNest nest = increment_nest(8, 10);
  nest.operations[0].store.indices[0].offset = -1;
  EXPECT_TRUE(contains(validate_nest(nest).violations, "access out of bounds at iteration 0"));
}

TEST(ValidateNest, OperationLevelOutOfRange) {
  ir::LoopNest nest = increment_nest(8, 8);
  nest.levels.push_back(level(1, 2));
  nest.operations[0].level = 3;
  EXPECT_TRUE(contains(validate_nest(nest).violations, "invalid level index"));
}

TEST(ValidateNest, CollectsEveryViolation) {
  ir::LoopNest nest = increment_nest(8, 4);
  nest.levels[0].span = 0;
  nest.buffers.push_back({"buf", OperandType::Int64, {4}});
  nest.operations[0].rank = 1;
  const auto result = validate_nest(nest);
  EXPECT_TRUE(contains(result.violations, "span 0 must be >= 1"));
  EXPECT_TRUE(contains(result.violations, "declared more than once"));
  EXPECT_TRUE(contains(result.violations, "not consecutive from 0"));
  EXPECT_GE(result.violations.size(), 3u);
}

TEST(ValidateNest, LevelAndOperationCounts) {
  ir::LoopNest nest = increment_nest(2, 2);
  nest.levels.clear();
  EXPECT_TRUE(contains(validate_nest(nest).violations, "number of levels 0"));

  nest = increment_nest(2, 2);
  for (std::size_t l = 1; l < 5; ++l) nest.levels.push_back(level(l, 1));
  EXPECT_TRUE(contains(validate_nest(nest).violations, "number of levels 5"));

  nest = increment_nest(2, 2);
  for (std::size_t r = 1; r < 5; ++r) {
    ir::Operation op = nest.operations[0];
    op.rank = r;
    nest.operations.push_back(op);
  }
  EXPECT_TRUE(contains(validate_nest(nest).violations, "number of operations 5"));

  nest.operations.clear();
  EXPECT_TRUE(contains(validate_nest(nest).violations, "number of operations 0"));
}

TEST(ValidateNest, DependentLevels) {
  ir::LoopNest nest = increment_nest(2, 2);
  nest.levels.push_back(level(1, 2));
  nest.levels[1].dependent_levels = {0};
  EXPECT_TRUE(validate_nest(nest).ok());
  nest.levels[1].dependent_levels = {1};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "depends on itself"));
  nest.levels[1].dependent_levels = {7};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "invalid level index 7"));
}

TEST(ValidateNest, AccessShapeAndDeclaration) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.operations[0].store.buffer = "nope";
  EXPECT_TRUE(contains(validate_nest(nest).violations, "undeclared buffer 'nope'"));

  nest = increment_nest(4, 4);
  nest.operations[0].store.indices.push_back(at(0));
  EXPECT_TRUE(contains(validate_nest(nest).violations, "2 indices for rank-1 buffer"));

  nest = increment_nest(4, 4);
  nest.operations[0].store.indices[0] = {std::nullopt, 4};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "constant index 4 out of bounds"));
}

TEST(ValidateNest, IteratorMustBeInScope) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.levels.push_back(level(1, 3));
  // Operation at level 0 reading the level-1 iterator.
  nest.operations[0].expr.children[0] = Expr::iterator(1);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "not in scope"));
}

TEST(ValidateNest, BufferElementCap) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.buffers.push_back({"big", OperandType::Float64, {2048, 1024}});
  EXPECT_TRUE(contains(validate_nest(nest).violations, "exceed cap"));
  EXPECT_TRUE(validate_nest(nest, std::int64_t{1} << 22).ok());
}

TEST(ValidateNest, ExpressionShape) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.operations[0].expr.children.pop_back();
  EXPECT_TRUE(contains(validate_nest(nest).violations, "node has 1 children, expected 2"));

  nest = increment_nest(4, 4);
  nest.operations[0].expr = Expr::libcall(OperandType::Int32, Expr::iterator(0));
  nest.operations[0].expr.children.push_back(Expr::iterator(0));
  EXPECT_TRUE(contains(validate_nest(nest).violations, "LibCall node has 2 children"));
}

TEST(ValidateNest, StaticallyZeroDivisor) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.operations[0].expr.kind = ExprKind::Div;
  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Int32, 0);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "statically-zero"));

  // 0.5 truncates to zero for an integer division.
  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Float64, 0.5);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "statically-zero"));

  // A Float32 divisor that underflows to zero.
  nest.operations[0].expr.type = OperandType::Float32;
  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Float64, 1e-60);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "statically-zero"));

  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Float32, 0.5);
  EXPECT_TRUE(validate_nest(nest).ok());
}

TEST(ValidateNest, ConstantsMustBeRepresentable) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Int32, 1.5);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "not an exactly representable integer"));
  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Int32, 4294967296.0);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "does not fit Int32"));
  nest.operations[0].expr.children[1] = Expr::constant(OperandType::Float64, INFINITY);
  EXPECT_TRUE(contains(validate_nest(nest).violations, "non-finite constant"));
}

TEST(ValidateNest, ScheduleRules) {
  ir::LoopNest nest = increment_nest(4, 4);
  nest.schedule = {{ir::ScheduleKind::Tiling, false, {0}, 0}};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "not applied but has levels"));
  nest.schedule = {{ir::ScheduleKind::Tiling, true, {2}, 8}};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "invalid level index 2"));
  nest.schedule = {{ir::ScheduleKind::Tiling, true, {0}, 8}, {ir::ScheduleKind::Tiling, false, {}, 0}};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "more than one Tiling"));
  nest.schedule = {{ir::ScheduleKind::Vectorization, true, {0}, -1}};
  EXPECT_TRUE(contains(validate_nest(nest).violations, "negative factor"));
  nest.schedule = {{ir::ScheduleKind::Vectorization, true, {0}, 8},
                   {ir::ScheduleKind::Interchange, false, {}, 0}};
  EXPECT_TRUE(validate_nest(nest).ok());
}

TEST(ValidateNest, IsPure) {
  const ir::LoopNest nest = synth::generate_nest(11);
  const ir::LoopNest copy = nest;
  EXPECT_EQ(validate_nest(nest).violations, validate_nest(nest).violations);
  EXPECT_EQ(nest, copy);
}

TEST(RequireValid, ThrowsWithViolations) {
  try {
    ir::require_valid(increment_nest(8, 4));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(contains(e.violations(), "access out of bounds at iteration 4"));
  }
}

TEST(InnermostLevel, IsLastLevel) {
  ir::LoopNest nest = increment_nest(2, 2);
  EXPECT_EQ(ir::innermost_level(nest), 0u);
  nest.levels.push_back(level(1, 2));
  nest.levels.push_back(level(2, 2));
  EXPECT_EQ(ir::innermost_level(nest), 2u);
  nest.levels.push_back(level(3, 2));
  EXPECT_EQ(ir::innermost_level(nest), 3u);
}

TEST(OperationsInOrder, SortsByLevelThenRank) {
  ir::LoopNest nest = increment_nest(2, 2);
  nest.levels.push_back(level(1, 2));
  ir::Operation a = nest.operations[0];
  a.level = 1;
  a.rank = 1;
  ir::Operation b = a;
  b.rank = 0;
  ir::Operation c = nest.operations[0];
  nest.operations = {a, c, b};
  const auto order = ir::operations_in_order(nest);
  ASSERT_EQ(order.size(), 3u);
  EXPECT_EQ(order[0], &nest.operations[1]);
  EXPECT_EQ(order[1], &nest.operations[2]);
  EXPECT_EQ(order[2], &nest.operations[0]);
}

TEST(EnumNames, RoundTrip) {
  for (OperandType t : ir::kOperandTypes) {
    EXPECT_EQ(ir::parse_operand_type(ir::to_string(t)), t);
  }
  for (ir::ScheduleKind k : ir::kScheduleKinds) {
    EXPECT_EQ(ir::parse_schedule_kind(ir::to_string(k)), k);
  }
  EXPECT_FALSE(ir::parse_operand_type("Float16").has_value());
  EXPECT_EQ(ir::kOperandTypes.size(), 4u);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

TEST(NestJson, RoundTripsGeneratedNests) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ir::LoopNest nest = synth::generate_nest(seed);
    const nlohmann::json doc = ir::to_json(nest);
    EXPECT_EQ(ir::nest_from_json(nlohmann::json::parse(doc.dump())), nest) << "seed " << seed;
  }
}

TEST(NestJson, FileRoundTrip) {
  TempDir dir;
  const ir::LoopNest nest = synth::generate_nest(3);
  ir::write_nest_file(nest, dir / "n.json");
  EXPECT_EQ(ir::read_nest_file(dir / "n.json"), nest);
}

TEST(NestJson, ErrorsNameThePath) {
  nlohmann::json doc = ir::to_json(increment_nest(4, 4));
  doc["operations"][0]["level"] = "zero";
  try {
    ir::nest_from_json(doc);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("$.operations[0].level"), std::string::npos) << e.what();
  }

  doc = ir::to_json(increment_nest(4, 4));
  doc["buffers"][0]["elem_type"] = "Float16";
  EXPECT_THROW(ir::nest_from_json(doc), ParseError);
  doc = ir::to_json(increment_nest(4, 4));
  doc.erase("levels");
  EXPECT_THROW(ir::nest_from_json(doc), ParseError);
}

TEST(NestJson, ScheduleIsOptional) {
  nlohmann::json doc = ir::to_json(increment_nest(4, 4));
  doc.erase("schedule");
  EXPECT_TRUE(ir::nest_from_json(doc).schedule.empty());
}

}  // namespace
}  // namespace unrollpilot
