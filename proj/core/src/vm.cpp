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

#include "unrollpilot/vm.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "unrollpilot/error.hpp"

namespace unrollpilot::vm {

using ir::OperandType;

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::LoadConst: return "LoadConst";
    case Opcode::LoadIter: return "LoadIter";
    case Opcode::LoadMem: return "LoadMem";
    case Opcode::StoreMem: return "StoreMem";
    case Opcode::Add: return "Add";
    case Opcode::Sub: return "Sub";
    case Opcode::Mul: return "Mul";
    case Opcode::Div: return "Div";
    case Opcode::LibCall: return "LibCall";
    case Opcode::IterInit: return "IterInit";
    case Opcode::IterIncr: return "IterIncr";
    case Opcode::CompareBranch: return "CompareBranch";
    case Opcode::Jump: return "Jump";
  }
  return "?";
}

std::optional<Opcode> parse_opcode(std::string_view name) {
  for (std::size_t i = 0; i < kNumOpcodes; ++i) {
    auto op = static_cast<Opcode>(i);
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

double CostModel::icache_factor(std::size_t footprint) const {
  const auto fp = static_cast<std::int64_t>(footprint);
  if (fp <= code_size_budget) return 1.0;
  return 1.0 + icache_penalty_slope * static_cast<double>(fp - code_size_budget) /
                   static_cast<double>(code_size_budget);
}

void CostModel::validate() const {
  for (std::size_t i = 0; i < kNumOpcodes; ++i) {
    if (!(opcode_costs[i] > 0.0) || !std::isfinite(opcode_costs[i])) {
      throw DomainError("cost of " + std::string(to_string(static_cast<Opcode>(i))) +
                        " must be a finite value > 0");
    }
  }
  if (code_size_budget <= 0) throw DomainError("code_size_budget must be > 0");
  if (!(icache_penalty_slope >= 0.0) || !std::isfinite(icache_penalty_slope)) {
    throw DomainError("icache_penalty_slope must be >= 0");
  }
}

bool bit_identical(const std::vector<BufferState>& a, const std::vector<BufferState>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const BufferState& x = a[k];
    const BufferState& y = b[k];
    if (x.name != y.name || x.type != y.type || x.ints != y.ints) return false;
    if (x.floats.size() != y.floats.size()) return false;
    if (!x.floats.empty() &&
        std::memcmp(x.floats.data(), y.floats.data(), x.floats.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

BufferState initial_buffer(const BufferDecl& decl, std::size_t buffer_index) {
  BufferState state{decl.name, decl.type, {}, {}};
  const auto n = static_cast<std::size_t>(decl.elements);
  auto pattern = [&](std::size_t e) {
    return static_cast<std::int64_t>((e * 7 + buffer_index * 13 + 3) % 19) - 9;
  };
  if (ir::is_float(decl.type)) {
    state.floats.resize(n);
    for (std::size_t e = 0; e < n; ++e) state.floats[e] = static_cast<double>(pattern(e)) * 0.25;
  } else {
    state.ints.resize(n);
    for (std::size_t e = 0; e < n; ++e) state.ints[e] = pattern(e);
  }
  return state;
}

namespace {

// ---------------------------------------------------------------------------
// Scalar semantics
// ---------------------------------------------------------------------------

std::int64_t saturate_to_int(double x, std::int64_t lo, std::int64_t hi) {
  if (std::isnan(x)) return 0;
  if (x <= static_cast<double>(lo)) return lo;
  if (x >= static_cast<double>(hi)) return hi;
  return static_cast<std::int64_t>(x);  // truncation toward zero
}

double round_to_float(double x) {
  constexpr double kMax = std::numeric_limits<float>::max();
  if (std::isfinite(x) && std::fabs(x) > kMax) {
    // Values beyond the float range round to infinity only past the midpoint
    // to the next power of two; static_cast would be undefined here.
    const double limit = 0x1.ffffffp127;
    if (std::fabs(x) >= limit) return std::copysign(std::numeric_limits<double>::infinity(), x);
    return std::copysign(kMax, x);
  }
  return static_cast<double>(static_cast<float>(x));
}

Scalar convert(const Scalar& v, OperandType to) {
  Scalar out;
  out.type = to;
  const bool from_float = ir::is_float(v.type);
  switch (to) {
    case OperandType::Int32:
      out.i = from_float ? saturate_to_int(v.f, INT32_MIN, INT32_MAX)
                         : static_cast<std::int32_t>(static_cast<std::uint32_t>(v.i));
      break;
    case OperandType::Int64:
      out.i = from_float ? saturate_to_int(v.f, INT64_MIN, INT64_MAX) : v.i;
      break;
    case OperandType::Float32:
      out.f = round_to_float(from_float ? v.f : static_cast<double>(v.i));
      break;
    case OperandType::Float64:
      out.f = from_float ? v.f : static_cast<double>(v.i);
      break;
  }
  return out;
}

template <typename Signed>
Signed wrap_arith(Opcode op, Signed a, Signed b, std::size_t pc) {
  using U = std::make_unsigned_t<Signed>;
  const U ua = static_cast<U>(a);
  const U ub = static_cast<U>(b);
  switch (op) {
    case Opcode::Add: return static_cast<Signed>(ua + ub);
    case Opcode::Sub: return static_cast<Signed>(ua - ub);
    case Opcode::Mul: return static_cast<Signed>(ua * ub);
    case Opcode::Div:
      if (b == 0) throw ExecutionError(pc, "integer division by zero");
      if (b == -1) return static_cast<Signed>(U{0} - ua);
      return static_cast<Signed>(a / b);
    default: return a;
  }
}

template <typename Real>
Real real_arith(Opcode op, Real a, Real b, std::size_t pc) {
  switch (op) {
    case Opcode::Add: return a + b;
    case Opcode::Sub: return a - b;
    case Opcode::Mul: return a * b;
    case Opcode::Div:
      if (b == Real{0}) throw ExecutionError(pc, "floating-point division by zero");
      return a / b;
    default: return a;
  }
}

Scalar binary(Opcode op, OperandType type, const Scalar& lhs, const Scalar& rhs, std::size_t pc) {
  const Scalar a = convert(lhs, type);
  const Scalar b = convert(rhs, type);
  Scalar r;
  r.type = type;
  switch (type) {
    case OperandType::Int32:
      r.i = wrap_arith<std::int32_t>(op, static_cast<std::int32_t>(a.i),
                                     static_cast<std::int32_t>(b.i), pc);
      break;
    case OperandType::Int64:
      r.i = wrap_arith<std::int64_t>(op, a.i, b.i, pc);
      break;
    case OperandType::Float32:
      r.f = real_arith<float>(op, static_cast<float>(a.f), static_cast<float>(b.f), pc);
      break;
    case OperandType::Float64:
      r.f = real_arith<double>(op, a.f, b.f, pc);
      break;
  }
  return r;
}

// The modeled intrinsic: |x| for integers, sqrt(|x|) for floating types.
Scalar libcall(OperandType type, const Scalar& arg) {
  Scalar r = convert(arg, type);
  switch (type) {
    case OperandType::Int32: {
      const auto v = static_cast<std::int32_t>(r.i);
      r.i = v < 0 ? static_cast<std::int32_t>(0u - static_cast<std::uint32_t>(v)) : v;
      break;
    }
    case OperandType::Int64:
      r.i = r.i < 0 ? static_cast<std::int64_t>(0ull - static_cast<std::uint64_t>(r.i)) : r.i;
      break;
    case OperandType::Float32:
      r.f = std::sqrt(std::fabs(static_cast<float>(r.f)));
      break;
    case OperandType::Float64:
      r.f = std::sqrt(std::fabs(r.f));
      break;
  }
  return r;
}

Opcode opcode_of(ir::ExprKind kind) {
  switch (kind) {
    case ir::ExprKind::Add: return Opcode::Add;
    case ir::ExprKind::Sub: return Opcode::Sub;
    case ir::ExprKind::Mul: return Opcode::Mul;
    case ir::ExprKind::Div: return Opcode::Div;
    case ir::ExprKind::LibCall: return Opcode::LibCall;
    default: return Opcode::Jump;
  }
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

class Lowerer {
 public:
  explicit Lowerer(const ir::LoopNest& nest) : nest_(nest) {}

  Program run() {
    prog_.nest_id = nest_.id;
    for (std::size_t b = 0; b < nest_.buffers.size(); ++b) {
      const ir::Buffer& buf = nest_.buffers[b];
      prog_.buffers.push_back({buf.name, buf.elem_type, buf.element_count()});
      buffer_ids_[buf.name] = static_cast<std::uint32_t>(b);
    }
    const std::size_t n = nest_.num_levels();
    ops_at_.resize(n);
    for (const ir::Operation* op : ir::operations_in_order(nest_)) ops_at_[op->level].push_back(op);
    prog_.loops.resize(n);
    prog_.body_sizes.resize(n);
    emit_level(0);
    return std::move(prog_);
  }

 private:
  std::size_t emit(Instruction ins) {
    prog_.instructions.push_back(ins);
    return prog_.instructions.size() - 1;
  }

  std::uint32_t add_memref(const ir::Access& access) {
    const std::uint32_t id = buffer_ids_.at(access.buffer);
    const ir::Buffer& buf = nest_.buffers[id];
    MemRef ref{id, {}};
    std::int64_t stride = 1;
    ref.terms.resize(buf.dims.size());
    for (std::size_t d = buf.dims.size(); d-- > 0;) {
      const ir::AffineIndex& idx = access.indices[d];
      ref.terms[d] = IndexTerm{idx.iterator ? static_cast<std::int32_t>(*idx.iterator) : -1,
                               idx.offset, buf.dims[d], stride};
      stride *= buf.dims[d];
    }
    prog_.memrefs.push_back(std::move(ref));
    return static_cast<std::uint32_t>(prog_.memrefs.size() - 1);
  }

  // Returns the stack depth needed to evaluate `e`.
  std::size_t emit_expr(const ir::Expr& e, bool innermost) {
    Instruction ins;
    ins.in_innermost_body = innermost;
    switch (e.kind) {
      case ir::ExprKind::Load:
        ins.opcode = Opcode::LoadMem;
        ins.memref = add_memref(e.access);
        ins.type = nest_.buffers[prog_.memrefs[ins.memref].buffer].elem_type;
        emit(ins);
        return 1;
      case ir::ExprKind::Iterator:
        ins.opcode = Opcode::LoadIter;
        ins.level = static_cast<std::int32_t>(e.level);
        emit(ins);
        return 1;
      case ir::ExprKind::Constant:
        ins.opcode = Opcode::LoadConst;
        ins.type = e.type;
        ins.constant = ir::is_float(e.type)
                           ? convert(Scalar{OperandType::Float64, 0, e.value}, e.type)
                           : Scalar{e.type, static_cast<std::int64_t>(e.value), 0.0};
        emit(ins);
        return 1;
      case ir::ExprKind::LibCall: {
        const std::size_t depth = emit_expr(e.children[0], innermost);
        ins.opcode = Opcode::LibCall;
        ins.type = e.type;
        emit(ins);
        return depth;
      }
      default: {
        const std::size_t lhs = emit_expr(e.children[0], innermost);
        const std::size_t rhs = emit_expr(e.children[1], innermost);
        ins.opcode = opcode_of(e.kind);
        ins.type = e.type;
        emit(ins);
        return std::max(lhs, rhs + 1);
      }
    }
  }

  void emit_level(std::size_t level) {
    const std::size_t n = nest_.num_levels();
    const bool innermost = level + 1 == n;
    LoopRegion region;
    region.span = nest_.levels[level].span;
    region.begin = emit({.opcode = Opcode::IterInit, .level = static_cast<std::int32_t>(level)});
    const std::size_t guard = emit({.opcode = Opcode::CompareBranch,
                                    .level = static_cast<std::int32_t>(level),
                                    .imm = region.span,
                                    .guard = true});
    region.body_begin = prog_.instructions.size();
    for (const ir::Operation* op : ops_at_[level]) {
      const std::size_t depth = emit_expr(op->expr, innermost);
      prog_.max_stack_depth = std::max(prog_.max_stack_depth, depth);
      Instruction store{.opcode = Opcode::StoreMem, .memref = add_memref(op->store)};
      store.in_innermost_body = innermost;
      emit(store);
    }
    if (!innermost) emit_level(level + 1);
    region.body_end = emit({.opcode = Opcode::IterIncr,
                            .level = static_cast<std::int32_t>(level),
                            .imm = 1});
    emit({.opcode = Opcode::CompareBranch,
          .level = static_cast<std::int32_t>(level),
          .imm = region.span,
          .target = static_cast<std::int64_t>(region.body_begin)});
    region.end = prog_.instructions.size();
    prog_.instructions[guard].target = static_cast<std::int64_t>(region.end);
    prog_.body_sizes[level] = region.body_end - region.body_begin;
    prog_.loops[level] = region;
  }

  const ir::LoopNest& nest_;
  Program prog_;
  std::map<std::string, std::uint32_t> buffer_ids_;
  std::vector<std::vector<const ir::Operation*>> ops_at_;
};

}  // namespace

Program lower(const ir::LoopNest& nest) {
  ir::require_valid(nest);
  return Lowerer(nest).run();
}

// ---------------------------------------------------------------------------
// Unrolling
// ---------------------------------------------------------------------------

Program apply_unroll(const Program& program, std::size_t level, std::int64_t factor) {
  if (factor < 1) {
    throw InvalidFactorError("unrolling factor must be >= 1, got " + std::to_string(factor));
  }
  if (program.loops.empty() || level != program.innermost_level()) {
    throw UnsupportedLevelError("only the innermost loop (level " +
                                std::to_string(program.loops.empty() ? 0 : program.innermost_level()) +
                                ") can be unrolled, got level " + std::to_string(level));
  }
  if (program.unroll_factor != 1) {
    throw UnsupportedLevelError("program is already unrolled by " +
                                std::to_string(program.unroll_factor));
  }

  Program out;
  out.nest_id = program.nest_id;
  out.buffers = program.buffers;
  out.memrefs = program.memrefs;
  out.max_stack_depth = program.max_stack_depth;
  out.unroll_factor = factor;

  const LoopRegion& old = program.loops[level];
  const auto& code = program.instructions;
  const auto inner = static_cast<std::int32_t>(level);
  const std::int64_t span = old.span;
  const std::int64_t remainder = span % factor;
  const std::size_t body_size = old.body_end - old.body_begin;

  // Body copy with the innermost iterator shifted by `shift`.
  auto clone_body = [&](std::vector<Instruction>& seg, std::int64_t shift) {
    for (std::size_t pc = old.body_begin; pc < old.body_end; ++pc) {
      Instruction ins = code[pc];
      if (ins.opcode == Opcode::LoadIter && ins.level == inner) {
        ins.imm += shift;
      } else if (shift != 0 && (ins.opcode == Opcode::LoadMem || ins.opcode == Opcode::StoreMem)) {
        MemRef ref = program.memrefs[ins.memref];
        bool touched = false;
        for (IndexTerm& t : ref.terms) {
          if (t.level == inner) {
            t.offset += shift;
            touched = true;
          }
        }
        if (touched) {
          out.memrefs.push_back(std::move(ref));
          ins.memref = static_cast<std::uint32_t>(out.memrefs.size() - 1);
        }
      }
      ins.in_innermost_body = true;
      seg.push_back(ins);
    }
  };

  const std::size_t base = old.begin;
  std::vector<Instruction> seg;
  seg.push_back(code[old.begin]);  // IterInit
  const std::int64_t main_bound = span - factor + 1;
  const std::size_t main_guard = seg.size();
  seg.push_back({.opcode = Opcode::CompareBranch, .level = inner, .imm = main_bound, .guard = true});
  const std::size_t main_body = seg.size();
  for (std::int64_t u = 0; u < factor; ++u) clone_body(seg, u);
  const std::size_t main_body_end = seg.size();
  seg.push_back({.opcode = Opcode::IterIncr, .level = inner, .imm = factor});
  seg.push_back({.opcode = Opcode::CompareBranch,
                 .level = inner,
                 .imm = main_bound,
                 .target = static_cast<std::int64_t>(base + main_body)});
  seg[main_guard].target = static_cast<std::int64_t>(base + seg.size());
  if (remainder != 0) {
    const std::size_t epi_guard = seg.size();
    seg.push_back({.opcode = Opcode::CompareBranch, .level = inner, .imm = span, .guard = true});
    const std::size_t epi_body = seg.size();
    clone_body(seg, 0);
    seg.push_back({.opcode = Opcode::IterIncr, .level = inner, .imm = 1});
    seg.push_back({.opcode = Opcode::CompareBranch,
                   .level = inner,
                   .imm = span,
                   .target = static_cast<std::int64_t>(base + epi_body)});
    seg[epi_guard].target = static_cast<std::int64_t>(base + seg.size());
  }

  const auto delta = static_cast<std::int64_t>(seg.size()) -
                     static_cast<std::int64_t>(old.end - old.begin);
  auto relocate = [&](Instruction ins) {
    if ((ins.opcode == Opcode::Jump || ins.opcode == Opcode::CompareBranch) &&
        ins.target >= static_cast<std::int64_t>(old.end)) {
      ins.target += delta;
    }
    return ins;
  };

  out.instructions.reserve(code.size() + static_cast<std::size_t>(std::max<std::int64_t>(delta, 0)));
  for (std::size_t pc = 0; pc < old.begin; ++pc) out.instructions.push_back(relocate(code[pc]));
  out.instructions.insert(out.instructions.end(), seg.begin(), seg.end());
  for (std::size_t pc = old.end; pc < code.size(); ++pc) {
    out.instructions.push_back(relocate(code[pc]));
  }

  out.loops = program.loops;
  out.body_sizes = program.body_sizes;
  for (std::size_t l = 0; l < level; ++l) {
    out.loops[l].body_end = static_cast<std::size_t>(static_cast<std::int64_t>(out.loops[l].body_end) + delta);
    out.loops[l].end = static_cast<std::size_t>(static_cast<std::int64_t>(out.loops[l].end) + delta);
    out.body_sizes[l] = static_cast<std::size_t>(static_cast<std::int64_t>(out.body_sizes[l]) + delta);
  }
  LoopRegion& region = out.loops[level];
  region.body_begin = base + main_body;
  region.body_end = base + main_body_end;
  region.end = base + seg.size();
  out.body_sizes[level] = body_size * static_cast<std::size_t>(factor);
  return out;
}

// ---------------------------------------------------------------------------
// Interpreter
// ---------------------------------------------------------------------------

ExecutionReport execute(const Program& program, const CostModel& cost_model,
                        bool measure_wall_clock) {
  const auto started = std::chrono::steady_clock::now();

  std::vector<BufferState> buffers;
  buffers.reserve(program.buffers.size());
  for (std::size_t b = 0; b < program.buffers.size(); ++b) {
    buffers.push_back(initial_buffer(program.buffers[b], b));
  }
  std::vector<std::int64_t> iters(program.loops.size(), 0);
  std::vector<Scalar> stack(program.max_stack_depth + 1);
  std::size_t sp = 0;

  ExecutionReport report;
  std::array<std::uint64_t, kNumOpcodes>* counts[2] = {&report.outer_counts, &report.body_counts};

  auto address = [&](const MemRef& ref, std::size_t pc) {
    std::int64_t addr = 0;
    for (const IndexTerm& t : ref.terms) {
      const std::int64_t idx = (t.level >= 0 ? iters[static_cast<std::size_t>(t.level)] : 0) + t.offset;
      if (idx < 0 || idx >= t.extent) {
        throw ExecutionError(pc, "out-of-bounds access to buffer '" +
                                     program.buffers[ref.buffer].name + "' (index " +
                                     std::to_string(idx) + ", extent " +
                                     std::to_string(t.extent) + ")");
      }
      addr += idx * t.stride;
    }
    return static_cast<std::size_t>(addr);
  };

  const auto& code = program.instructions;
  const std::size_t n = code.size();
  std::size_t pc = 0;
  while (pc < n) {
    const Instruction& ins = code[pc];
    ++(*counts[ins.in_innermost_body])[static_cast<std::size_t>(ins.opcode)];
    switch (ins.opcode) {
      case Opcode::LoadConst:
        stack[sp++] = ins.constant;
        break;
      case Opcode::LoadIter:
        stack[sp++] = Scalar{OperandType::Int64, iters[static_cast<std::size_t>(ins.level)] + ins.imm, 0.0};
        break;
      case Opcode::LoadMem: {
        const MemRef& ref = program.memrefs[ins.memref];
        const BufferState& buf = buffers[ref.buffer];
        const std::size_t a = address(ref, pc);
        Scalar v{buf.type, 0, 0.0};
        if (ir::is_float(buf.type)) {
          v.f = buf.floats[a];
        } else {
          v.i = buf.ints[a];
        }
        stack[sp++] = v;
        break;
      }
      case Opcode::StoreMem: {
        const MemRef& ref = program.memrefs[ins.memref];
        BufferState& buf = buffers[ref.buffer];
        const std::size_t a = address(ref, pc);
        const Scalar v = convert(stack[--sp], buf.type);
        if (ir::is_float(buf.type)) {
          buf.floats[a] = v.f;
        } else {
          buf.ints[a] = v.i;
        }
        break;
      }
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div: {
        const Scalar rhs = stack[--sp];
        stack[sp - 1] = binary(ins.opcode, ins.type, stack[sp - 1], rhs, pc);
        break;
      }
      case Opcode::LibCall:
        stack[sp - 1] = libcall(ins.type, stack[sp - 1]);
        break;
      case Opcode::IterInit:
        iters[static_cast<std::size_t>(ins.level)] = 0;
        break;
      case Opcode::IterIncr:
        iters[static_cast<std::size_t>(ins.level)] += ins.imm;
        break;
      case Opcode::CompareBranch:
        if ((iters[static_cast<std::size_t>(ins.level)] < ins.imm) != ins.guard) {
          pc = static_cast<std::size_t>(ins.target);
          continue;
        }
        break;
      case Opcode::Jump:
        pc = static_cast<std::size_t>(ins.target);
        continue;
    }
    ++pc;
  }

  double outer = 0.0;
  double body = 0.0;
  for (std::size_t op = 0; op < kNumOpcodes; ++op) {
    const double c = cost_model.opcode_costs[op];
    outer += static_cast<double>(report.outer_counts[op]) * c;
    body += static_cast<double>(report.body_counts[op]) * c;
    report.executed_instruction_count += report.outer_counts[op] + report.body_counts[op];
  }
  report.innermost_footprint = program.body_sizes.empty() ? 0 : program.body_sizes.back();
  report.icache_factor = cost_model.icache_factor(report.innermost_footprint);
  report.weighted_cost = outer + body * report.icache_factor;
  report.buffer_state = std::move(buffers);
  if (measure_wall_clock) {
    report.wall_clock_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
  }
  return report;
}

std::vector<std::string> check_program(const Program& program) {
  std::vector<std::string> problems;
  const auto n = static_cast<std::int64_t>(program.instructions.size());
  std::size_t backedges = 0;
  for (std::size_t pc = 0; pc < program.instructions.size(); ++pc) {
    const Instruction& ins = program.instructions[pc];
    if (ins.opcode != Opcode::Jump && ins.opcode != Opcode::CompareBranch) continue;
    if (ins.target < 0 || ins.target > n) {
      problems.push_back("instruction " + std::to_string(pc) + ": target " +
                         std::to_string(ins.target) + " out of range");
      continue;
    }
    if (ins.opcode == Opcode::CompareBranch) {
      const bool forward = ins.target > static_cast<std::int64_t>(pc);
      if (ins.guard != forward) {
        problems.push_back("instruction " + std::to_string(pc) +
                           (ins.guard ? ": loop guard does not branch forward"
                                      : ": CompareBranch is not a backedge"));
      }
      if (!ins.guard) ++backedges;
    }
  }
  std::size_t expected = program.loops.size();
  if (!program.loops.empty()) {
    const LoopRegion& inner = program.loops.back();
    const std::int64_t k = program.unroll_factor;
    if (k > 1 && inner.span % k != 0) ++expected;  // epilogue loop
  }
  if (backedges != expected) {
    problems.push_back("expected " + std::to_string(expected) + " loop backedges, found " +
                       std::to_string(backedges));
  }
  return problems;
}

std::string disassemble(const Program& program) {
  std::ostringstream os;
  for (std::size_t pc = 0; pc < program.instructions.size(); ++pc) {
    const Instruction& ins = program.instructions[pc];
    os << pc << ":\t" << (ins.in_innermost_body ? "* " : "  ") << to_string(ins.opcode);
    switch (ins.opcode) {
      case Opcode::LoadConst:
        os << ' ' << ir::to_string(ins.type) << ' '
           << (ir::is_float(ins.type) ? std::to_string(ins.constant.f)
                                      : std::to_string(ins.constant.i));
        break;
      case Opcode::LoadIter:
        os << " i" << ins.level << (ins.imm != 0 ? " + " + std::to_string(ins.imm) : "");
        break;
      case Opcode::LoadMem:
      case Opcode::StoreMem: {
        const MemRef& ref = program.memrefs[ins.memref];
        os << ' ' << program.buffers[ref.buffer].name;
        for (const IndexTerm& t : ref.terms) {
          os << '[';
          if (t.level >= 0) os << 'i' << t.level << (t.offset >= 0 ? "+" : "");
          os << t.offset << ']';
        }
        break;
      }
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div:
      case Opcode::LibCall:
        os << ' ' << ir::to_string(ins.type);
        break;
      case Opcode::IterInit:
        os << " i" << ins.level;
        break;
      case Opcode::IterIncr:
        os << " i" << ins.level << ", " << ins.imm;
        break;
      case Opcode::CompareBranch:
        os << " i" << ins.level << (ins.guard ? " >= " : " < ") << ins.imm << " -> " << ins.target;
        break;
      case Opcode::Jump:
        os << " -> " << ins.target;
        break;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace unrollpilot::vm
