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
 * \file vm.hpp
 * \brief Bytecode lowering, innermost-loop unrolling and a costed interpreter.
 *
 * A nest lowers to a stack-machine program. Each loop has the shape
 *
 *     IterInit L
 *     CompareBranch L >= span -> exit    ; guard
 *   body:
 *     ...                                ; statements of level L, then loop L + 1
 *     IterIncr L, 1
 *     CompareBranch L < span -> body     ; backedge
 *   exit:
 *
 * so a loop of span n executes n bodies, n increments and n + 1 compares.
 * apply_unroll rewrites the innermost loop into a main loop of k body copies
 * (iterator offsets +0 .. +k-1, one IterIncr k, bound span - k + 1) followed,
 * when span mod k != 0, by a guarded single-step epilogue loop. Jump is part
 * of the instruction set but the lowering never needs it.
 *
 * The weighted cost charges each executed instruction its opcode cost. When
 * the innermost body's static footprint exceeds the code-size budget B, every
 * instruction executed inside an innermost body is charged an extra
 * instruction-cache factor 1 + p * (footprint - B) / B.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unrollpilot/loop_ir.hpp"

namespace unrollpilot::vm {

enum class Opcode : std::uint8_t {
  LoadConst,
  LoadIter,
  LoadMem,
  StoreMem,
  Add,
  Sub,
  Mul,
  Div,
  LibCall,
  IterInit,
  IterIncr,
  CompareBranch,
  Jump,
};
inline constexpr std::size_t kNumOpcodes = 13;

std::string_view to_string(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view name);

/// Runtime value. Integer types use `i`; floating types use `f` (Float32
/// values are kept as the exactly-representable double of the float).
struct Scalar {
  ir::OperandType type = ir::OperandType::Int64;
  std::int64_t i = 0;
  double f = 0.0;
};

/// One subscript of a resolved access: (iter[level] or 0) + offset, checked
/// against extent and scaled by stride.
struct IndexTerm {
  std::int32_t level = -1;  // -1: constant subscript
  std::int64_t offset = 0;
  std::int64_t extent = 1;
  std::int64_t stride = 1;
};

struct MemRef {
  std::uint32_t buffer = 0;
  std::vector<IndexTerm> terms;
};

struct Instruction {
  Opcode opcode = Opcode::Jump;
  ir::OperandType type = ir::OperandType::Int64;  // arithmetic tag
  std::int32_t level = -1;                        // iterator instructions
  /// LoadIter: iterator offset. IterIncr: step. CompareBranch: exclusive bound.
  std::int64_t imm = 0;
  Scalar constant;           // LoadConst
  std::uint32_t memref = 0;  // LoadMem / StoreMem
  std::int64_t target = -1;  // CompareBranch / Jump
  bool in_innermost_body = false;
  /// CompareBranch: branch when iter >= imm (loop entry) instead of iter < imm.
  bool guard = false;
};

struct BufferDecl {
  std::string name;
  ir::OperandType type = ir::OperandType::Float32;
  std::int64_t elements = 0;
};

/// Instruction ranges of one loop. For an unrolled innermost loop the body
/// is the main (replicated) body and `end` includes the epilogue.
struct LoopRegion {
  std::int64_t span = 1;
  std::size_t begin = 0;       // IterInit
  std::size_t body_begin = 0;
  std::size_t body_end = 0;    // the loop's IterIncr
  std::size_t end = 0;         // one past the last instruction of the loop
};

struct Program {
  std::string nest_id;
  std::vector<Instruction> instructions;
  std::vector<MemRef> memrefs;
  std::vector<BufferDecl> buffers;
  /// Static instruction count of each level's body, nested loops included.
  std::vector<std::size_t> body_sizes;
  std::vector<LoopRegion> loops;
  std::size_t max_stack_depth = 0;
  std::int64_t unroll_factor = 1;

  std::size_t innermost_level() const { return loops.size() - 1; }
};

struct CostModel {
  std::array<double, kNumOpcodes> opcode_costs = {
      1,   // LoadConst
      1,   // LoadIter
      4,   // LoadMem
      4,   // StoreMem
      1,   // Add
      1,   // Sub
      3,   // Mul
      10,  // Div
      20,  // LibCall
      1,   // IterInit
      1,   // IterIncr
      2,   // CompareBranch
      1,   // Jump
  };
  std::int64_t code_size_budget = 256;
  double icache_penalty_slope = 0.5;

  double cost(Opcode op) const { return opcode_costs[static_cast<std::size_t>(op)]; }
  double icache_factor(std::size_t footprint) const;
  /// Throws DomainError unless all costs > 0, budget > 0 and slope >= 0.
  void validate() const;

  bool operator==(const CostModel&) const = default;
};

struct BufferState {
  std::string name;
  ir::OperandType type = ir::OperandType::Float32;
  std::vector<std::int64_t> ints;  // Int32 / Int64 buffers
  std::vector<double> floats;      // Float32 / Float64 buffers
};

/// Bitwise comparison (NaN payloads included).
bool bit_identical(const std::vector<BufferState>& a, const std::vector<BufferState>& b);

/// Deterministic initial contents of buffer number `buffer_index`.
BufferState initial_buffer(const BufferDecl& decl, std::size_t buffer_index);

struct ExecutionReport {
  std::uint64_t executed_instruction_count = 0;
  double weighted_cost = 0.0;
  std::vector<BufferState> buffer_state;
  std::optional<std::int64_t> wall_clock_ns;

  /// Executed instruction counts outside / inside innermost bodies.
  std::array<std::uint64_t, kNumOpcodes> outer_counts{};
  std::array<std::uint64_t, kNumOpcodes> body_counts{};
  std::size_t innermost_footprint = 0;
  double icache_factor = 1.0;
};

/// Throws ValidationError for invalid nests.
Program lower(const ir::LoopNest& nest);

/// Throws InvalidFactorError when factor < 1 and UnsupportedLevelError when
/// `level` is not the innermost loop or the program is already unrolled.
Program apply_unroll(const Program& program, std::size_t level, std::int64_t factor);

/// Throws ExecutionError on division by zero or an out-of-bounds access.
ExecutionReport execute(const Program& program, const CostModel& cost_model,
                        bool measure_wall_clock = false);

/// Control-flow sanity: jump targets in range (the program end included),
/// guards branch forward, exactly one backward CompareBranch per loop copy.
/// Empty when well formed.
std::vector<std::string> check_program(const Program& program);

std::string disassemble(const Program& program);

}  // namespace unrollpilot::vm
