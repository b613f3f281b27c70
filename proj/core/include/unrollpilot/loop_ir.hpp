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
 * \file loop_ir.hpp
 * \brief Loop-nest intermediate representation.
 *
 * A LoopNest is a perfectly ordered stack of counted loops (level 0 is the
 * outermost), a list of assignment statements attached to levels, the buffers
 * they touch, and optional schedule annotations. Statements attached to level
 * L run once per iteration of loop L, in rank order, before the loop at L + 1
 * is entered. All buffer subscripts are affine: one iterator plus a constant
 * offset, or a constant alone.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace unrollpilot::ir {

inline constexpr std::size_t kMaxLevels = 4;
inline constexpr std::size_t kMaxOperations = 4;
inline constexpr std::int64_t kDefaultBufferElementCap = std::int64_t{1} << 20;

enum class OperandType : std::uint8_t { Int32, Int64, Float32, Float64 };
inline constexpr std::size_t kNumOperandTypes = 4;
inline constexpr std::array<OperandType, kNumOperandTypes> kOperandTypes = {
    OperandType::Int32, OperandType::Int64, OperandType::Float32, OperandType::Float64};

std::string_view to_string(OperandType type);
std::optional<OperandType> parse_operand_type(std::string_view name);
inline bool is_float(OperandType type) {
  return type == OperandType::Float32 || type == OperandType::Float64;
}

struct LoopLevel {
  std::size_t index = 0;
  std::int64_t span = 1;  // trip count
  bool has_predicate = false;
  std::set<std::size_t> dependent_levels;

  bool operator==(const LoopLevel&) const = default;
};

struct Buffer {
  std::string name;
  OperandType elem_type = OperandType::Float32;
  std::vector<std::int64_t> dims;

  std::int64_t element_count() const;
  bool operator==(const Buffer&) const = default;
};

/// One subscript: `iterator + offset`, or just `offset` when iterator is empty.
struct AffineIndex {
  std::optional<std::size_t> iterator;
  std::int64_t offset = 0;

  bool operator==(const AffineIndex&) const = default;
};

struct Access {
  std::string buffer;
  std::vector<AffineIndex> indices;

  bool operator==(const Access&) const = default;
};

enum class ExprKind : std::uint8_t { Load, Iterator, Constant, Add, Sub, Mul, Div, LibCall };

/// Arithmetic node kinds in the order used by the operation histograms.
inline constexpr std::size_t kNumArithKinds = 5;
inline constexpr std::array<ExprKind, kNumArithKinds> kArithKinds = {
    ExprKind::Add, ExprKind::Sub, ExprKind::Mul, ExprKind::Div, ExprKind::LibCall};

std::string_view to_string(ExprKind kind);
std::optional<ExprKind> parse_expr_kind(std::string_view name);
bool is_arithmetic(ExprKind kind);
/// Position of an arithmetic kind inside kArithKinds.
std::size_t arith_index(ExprKind kind);

/// Expression tree node. Leaves are loads, loop iterators and scalar
/// constants; internal nodes are typed arithmetic (LibCall is unary).
struct Expr {
  ExprKind kind = ExprKind::Constant;
  /// Arithmetic tag for internal nodes and the value type of constants.
  /// Iterators are always Int64; loads take the buffer's element type.
  OperandType type = OperandType::Int64;
  Access access;           // Load
  std::size_t level = 0;   // Iterator
  double value = 0.0;      // Constant
  std::vector<Expr> children;

  static Expr load(Access access);
  static Expr iterator(std::size_t level);
  static Expr constant(OperandType type, double value);
  static Expr binary(ExprKind kind, OperandType type, Expr lhs, Expr rhs);
  static Expr libcall(OperandType type, Expr arg);

  bool operator==(const Expr&) const = default;
};

struct Operation {
  std::size_t level = 0;
  std::size_t rank = 0;
  Expr expr;
  Access store;

  bool operator==(const Operation&) const = default;
};

enum class ScheduleKind : std::uint8_t { Interchange, Tiling, Vectorization, Parallelization };
inline constexpr std::size_t kNumScheduleKinds = 4;
inline constexpr std::array<ScheduleKind, kNumScheduleKinds> kScheduleKinds = {
    ScheduleKind::Interchange, ScheduleKind::Tiling, ScheduleKind::Vectorization,
    ScheduleKind::Parallelization};

std::string_view to_string(ScheduleKind kind);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);

/// A previously applied loop optimization. Recorded for featurization only;
/// the execution model does not perform it.
struct ScheduleOpt {
  ScheduleKind kind = ScheduleKind::Interchange;
  bool applied = false;
  std::vector<std::size_t> levels;
  std::int64_t factor = 0;

  bool operator==(const ScheduleOpt&) const = default;
};

struct LoopNest {
  std::string id;
  std::vector<LoopLevel> levels;
  std::vector<Operation> operations;
  std::vector<Buffer> buffers;
  std::vector<ScheduleOpt> schedule;

  std::size_t num_levels() const { return levels.size(); }
  const Buffer* find_buffer(std::string_view name) const;
  const ScheduleOpt* find_schedule(ScheduleKind kind) const;

  bool operator==(const LoopNest&) const = default;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks every structural invariant, including that each access stays in
/// bounds over the full iteration space. Collects all violations.
ValidationResult validate_nest(const LoopNest& nest,
                               std::int64_t buffer_element_cap = kDefaultBufferElementCap);

/// Throws ValidationError when validate_nest reports violations.
void require_valid(const LoopNest& nest);

/// The unrolling target: the deepest loop.
std::size_t innermost_level(const LoopNest& nest);

/// Operations sorted by (level, rank).
std::vector<const Operation*> operations_in_order(const LoopNest& nest);

/// Pre-order traversal.
template <typename Fn>
void visit(const Expr& expr, Fn&& fn) {
  fn(expr);
  for (const Expr& child : expr.children) visit(child, fn);
}

}  // namespace unrollpilot::ir
