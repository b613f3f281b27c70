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

#include "unrollpilot/loop_ir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "unrollpilot/error.hpp"

namespace unrollpilot {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::ostringstream os;
  os << "invalid loop nest (" << violations.size() << " violation"
     << (violations.size() == 1 ? "" : "s") << ")";
  for (const auto& v : violations) os << "\n  - " << v;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

ExecutionError::ExecutionError(std::size_t instruction_index, const std::string& what)
    : Error("instruction " + std::to_string(instruction_index) + ": " + what),
      instruction_index_(instruction_index) {}

ParseError::ParseError(const std::string& what, std::optional<std::size_t> line)
    : Error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

}  // namespace unrollpilot

namespace unrollpilot::ir {

std::string_view to_string(OperandType type) {
  switch (type) {
    case OperandType::Int32: return "Int32";
    case OperandType::Int64: return "Int64";
    case OperandType::Float32: return "Float32";
    case OperandType::Float64: return "Float64";
  }
  return "?";
}

std::optional<OperandType> parse_operand_type(std::string_view name) {
  for (OperandType t : kOperandTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view to_string(ExprKind kind) {
  switch (kind) {
    case ExprKind::Load: return "Load";
    case ExprKind::Iterator: return "Iterator";
    case ExprKind::Constant: return "Constant";
    case ExprKind::Add: return "Add";
    case ExprKind::Sub: return "Sub";
    case ExprKind::Mul: return "Mul";
    case ExprKind::Div: return "Div";
    case ExprKind::LibCall: return "LibCall";
  }
  return "?";
}

std::optional<ExprKind> parse_expr_kind(std::string_view name) {
  for (ExprKind k : {ExprKind::Load, ExprKind::Iterator, ExprKind::Constant, ExprKind::Add,
                     ExprKind::Sub, ExprKind::Mul, ExprKind::Div, ExprKind::LibCall}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_arithmetic(ExprKind kind) {
  return kind == ExprKind::Add || kind == ExprKind::Sub || kind == ExprKind::Mul ||
         kind == ExprKind::Div || kind == ExprKind::LibCall;
}

std::size_t arith_index(ExprKind kind) {
  for (std::size_t i = 0; i < kArithKinds.size(); ++i) {
    if (kArithKinds[i] == kind) return i;
  }
  return kArithKinds.size();
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Interchange: return "Interchange";
    case ScheduleKind::Tiling: return "Tiling";
    case ScheduleKind::Vectorization: return "Vectorization";
    case ScheduleKind::Parallelization: return "Parallelization";
  }
  return "?";
}

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  for (ScheduleKind k : kScheduleKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::int64_t Buffer::element_count() const {
  std::int64_t count = 1;
  for (std::int64_t d : dims) {
    if (d <= 0) return 0;
    if (count > std::numeric_limits<std::int64_t>::max() / d) {
      return std::numeric_limits<std::int64_t>::max();
    }
    count *= d;
  }
  return count;
}

Expr Expr::load(Access access) {
  Expr e;
  e.kind = ExprKind::Load;
  e.access = std::move(access);
  return e;
}

Expr Expr::iterator(std::size_t level) {
  Expr e;
  e.kind = ExprKind::Iterator;
  e.type = OperandType::Int64;
  e.level = level;
  return e;
}

Expr Expr::constant(OperandType type, double value) {
  Expr e;
  e.kind = ExprKind::Constant;
  e.type = type;
  e.value = value;
  return e;
}

Expr Expr::binary(ExprKind kind, OperandType type, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = kind;
  e.type = type;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

Expr Expr::libcall(OperandType type, Expr arg) {
  Expr e;
  e.kind = ExprKind::LibCall;
  e.type = type;
  e.children.push_back(std::move(arg));
  return e;
}

const Buffer* LoopNest::find_buffer(std::string_view name) const {
  for (const Buffer& b : buffers) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const ScheduleOpt* LoopNest::find_schedule(ScheduleKind kind) const {
  for (const ScheduleOpt& s : schedule) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

namespace {

class Validator {
 public:
  Validator(const LoopNest& nest, std::int64_t cap) : nest_(nest), cap_(cap) {}

  ValidationResult run() {
    check_levels();
    check_buffers();
    check_operations();
    check_schedule();
    return ValidationResult{std::move(violations_)};
  }

 private:
  template <typename... Parts>
  void report(Parts&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    violations_.push_back(os.str());
  }

  std::size_t num_levels() const { return nest_.levels.size(); }

  void check_levels() {
    const std::size_t n = num_levels();
    if (n < 1 || n > kMaxLevels) {
      report("number of levels ", n, " outside [1, ", kMaxLevels, "]");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const LoopLevel& level = nest_.levels[i];
      if (level.index != i) report("level ", i, ": index field is ", level.index);
      if (level.span < 1) report("level ", i, ": span ", level.span, " must be >= 1");
      for (std::size_t dep : level.dependent_levels) {
        if (dep >= n) {
          report("level ", i, ": invalid level index ", dep, " in dependent_levels");
        } else if (dep == i) {
          report("level ", i, ": depends on itself");
        }
      }
    }
  }

  void check_buffers() {
    std::map<std::string, int> seen;
    for (const Buffer& b : nest_.buffers) {
      if (b.name.empty()) report("buffer with empty name");
      if (++seen[b.name] == 2) report("buffer '", b.name, "' declared more than once");
      if (b.dims.empty()) report("buffer '", b.name, "': dims must be non-empty");
      bool dims_ok = true;
      for (std::int64_t d : b.dims) {
        if (d < 1) {
          report("buffer '", b.name, "': dimension ", d, " must be >= 1");
          dims_ok = false;
        }
      }
      if (dims_ok && b.element_count() > cap_) {
        report("buffer '", b.name, "': ", b.element_count(), " elements exceed cap ", cap_);
      }
    }
  }

  void check_operations() {
    const std::size_t count = nest_.operations.size();
    if (count < 1 || count > kMaxOperations) {
      report("number of operations ", count, " outside [1, ", kMaxOperations, "]");
    }
    std::map<std::size_t, std::vector<std::size_t>> ranks_by_level;
    for (std::size_t k = 0; k < count; ++k) {
      const Operation& op = nest_.operations[k];
      const bool level_ok = op.level < num_levels();
      if (!level_ok) report("operation ", k, ": invalid level index ", op.level);
      ranks_by_level[op.level].push_back(op.rank);
      const std::string where = "operation " + std::to_string(k);
      check_expr(op.expr, op, where + " expr");
      check_access(op.store, op, where + ": store to");
    }
    for (auto& [level, ranks] : ranks_by_level) {
      std::sort(ranks.begin(), ranks.end());
      for (std::size_t r = 0; r < ranks.size(); ++r) {
        if (ranks[r] != r) {
          report("level ", level, ": operation ranks are not consecutive from 0");
          break;
        }
      }
    }
  }

  void check_expr(const Expr& e, const Operation& op, const std::string& where) {
    std::size_t expected_children = 0;
    if (e.kind == ExprKind::LibCall) {
      expected_children = 1;
    } else if (is_arithmetic(e.kind)) {
      expected_children = 2;
    }
    if (e.children.size() != expected_children) {
      report(where, ": ", to_string(e.kind), " node has ", e.children.size(),
             " children, expected ", expected_children);
    }
    switch (e.kind) {
      case ExprKind::Load:
        check_access(e.access, op, where + ": load from");
        break;
      case ExprKind::Iterator:
        check_iterator(e.level, op, where);
        break;
      case ExprKind::Constant:
        if (!std::isfinite(e.value)) {
          report(where, ": non-finite constant");
        } else if (!is_float(e.type) &&
                   (e.value != std::trunc(e.value) || std::fabs(e.value) > 0x1.0p53)) {
          report(where, ": integer constant ", e.value, " is not an exactly representable integer");
        } else if (e.type == OperandType::Int32 &&
                   (e.value < -0x1.0p31 || e.value > 0x1.0p31 - 1)) {
          report(where, ": constant ", e.value, " does not fit Int32");
        }
        break;
      case ExprKind::Div:
        // A literal divisor that is zero once converted to the node's type.
        if (e.children.size() == 2 && e.children[1].kind == ExprKind::Constant &&
            (e.children[1].value == 0.0 ||
             (!is_float(e.type) && std::trunc(e.children[1].value) == 0.0) ||
             (e.type == OperandType::Float32 && std::fabs(e.children[1].value) <= 0x1.0p-150))) {
          report(where, ": Div by statically-zero constant divisor");
        }
        break;
      default:
        break;
    }
    for (const Expr& child : e.children) check_expr(child, op, where);
  }

  void check_iterator(std::size_t level, const Operation& op, const std::string& where) {
    if (level >= num_levels()) {
      report(where, ": invalid level index ", level, " for iterator");
    } else if (op.level < num_levels() && level > op.level) {
      report(where, ": iterator of level ", level, " is not in scope at operation level ",
             op.level);
    }
  }

  void check_access(const Access& a, const Operation& op, const std::string& where) {
    const Buffer* buffer = nest_.find_buffer(a.buffer);
    if (buffer == nullptr) {
      report(where, " undeclared buffer '", a.buffer, "'");
      return;
    }
    const std::string prefix = where + " '" + a.buffer + "'";
    if (a.indices.size() != buffer->dims.size()) {
      report(prefix, ": ", a.indices.size(), " indices for rank-", buffer->dims.size(), " buffer");
      return;
    }
    for (std::size_t d = 0; d < a.indices.size(); ++d) {
      const AffineIndex& idx = a.indices[d];
      const std::int64_t extent = buffer->dims[d];
      if (!idx.iterator) {
        if (idx.offset < 0 || idx.offset >= extent) {
          report(prefix, " dim ", d, ": constant index ", idx.offset, " out of bounds [0, ",
                 extent, ")");
        }
        continue;
      }
      const std::size_t it = *idx.iterator;
      if (it >= num_levels()) {
        report(prefix, " dim ", d, ": invalid level index ", it, " for iterator");
        continue;
      }
      if (op.level < num_levels() && it > op.level) {
        report(prefix, " dim ", d, ": iterator of level ", it,
               " is not in scope at operation level ", op.level);
        continue;
      }
      const std::int64_t span = nest_.levels[it].span;
      if (span < 1) continue;  // already reported
      // Index runs over [offset, offset + span - 1].
      if (idx.offset < 0) {
        report(prefix, " dim ", d, ": access out of bounds at iteration 0");
      } else if (idx.offset + span - 1 >= extent) {
        report(prefix, " dim ", d, ": access out of bounds at iteration ", extent - idx.offset);
      }
    }
  }

  void check_schedule() {
    std::map<ScheduleKind, int> seen;
    for (const ScheduleOpt& s : nest_.schedule) {
      const auto name = to_string(s.kind);
      if (++seen[s.kind] == 2) report("schedule: more than one ", name, " entry");
      if (!s.applied && (!s.levels.empty() || s.factor != 0)) {
        report("schedule ", name, ": not applied but has levels or a factor");
      }
      if (s.factor < 0) report("schedule ", name, ": negative factor ", s.factor);
      for (std::size_t l : s.levels) {
        if (l >= num_levels()) report("schedule ", name, ": invalid level index ", l);
      }
    }
  }

  const LoopNest& nest_;
  std::int64_t cap_;
  std::vector<std::string> violations_;
};

}  // namespace

ValidationResult validate_nest(const LoopNest& nest, std::int64_t buffer_element_cap) {
  return Validator(nest, buffer_element_cap).run();
}

void require_valid(const LoopNest& nest) {
  ValidationResult result = validate_nest(nest);
  if (!result.ok()) throw ValidationError(std::move(result.violations));
}

std::size_t innermost_level(const LoopNest& nest) {
  if (nest.levels.empty()) throw ValidationError({"number of levels 0 outside [1, 4]"});
  return nest.levels.size() - 1;
}

std::vector<const Operation*> operations_in_order(const LoopNest& nest) {
  std::vector<const Operation*> ops;
  ops.reserve(nest.operations.size());
  for (const Operation& op : nest.operations) ops.push_back(&op);
  std::stable_sort(ops.begin(), ops.end(), [](const Operation* a, const Operation* b) {
    return std::pair(a->level, a->rank) < std::pair(b->level, b->rank);
  });
  return ops;
}

}  // namespace unrollpilot::ir
