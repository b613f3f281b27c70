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

#include "unrollpilot/codegen_synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "unrollpilot/error.hpp"
#include "unrollpilot/random.hpp"

namespace unrollpilot::synth {

using ir::Expr;
using ir::ExprKind;
using ir::OperandType;

void GenParams::validate() const {
  auto check_prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
  };
  check_prob(libcall_probability, "libcall_probability");
  check_prob(predicate_probability, "predicate_probability");
  check_prob(schedule_annotation_probability, "schedule_annotation_probability");
  check_prob(dependency_probability, "dependency_probability");

  if (level_count_range[0] < 1 || level_count_range[0] > level_count_range[1] ||
      level_count_range[1] > ir::kMaxLevels) {
    throw DomainError("level_count_range must be a non-empty sub-range of [1, 4]");
  }
  if (op_count_range[0] < 1 || op_count_range[0] > op_count_range[1] ||
      op_count_range[1] > ir::kMaxOperations) {
    throw DomainError("op_count_range must be a non-empty sub-range of [1, 4]");
  }
  if (body_size_range[0] < 2 || body_size_range[0] > body_size_range[1]) {
    throw DomainError("body_size_range must be non-empty with a lower bound >= 2");
  }
  if (outer_op_size_range[0] < 2 || outer_op_size_range[0] > outer_op_size_range[1]) {
    throw DomainError("outer_op_size_range must be non-empty with a lower bound >= 2");
  }
  if (span_choices.empty()) throw DomainError("span_choices must be non-empty");
  for (std::int64_t s : span_choices) {
    if (s < 1) throw DomainError("span_choices entries must be >= 1");
  }
  const auto min_span = static_cast<double>(*std::min_element(span_choices.begin(), span_choices.end()));
  if (std::pow(min_span, static_cast<double>(level_count_range[1])) >
      static_cast<double>(max_total_iterations)) {
    throw DomainError("max_total_iterations cannot fit the deepest nest with the smallest span");
  }
}

namespace {

// Offsets of subscripts are drawn from [0, kMaxOffset]; buffer extents are
// padded accordingly so every access stays in bounds.
constexpr std::int64_t kMaxOffset = 2;

struct BufferPlan {
  ir::Buffer decl;
  std::vector<std::size_t> dim_levels;
  std::size_t deepest = 0;
};

class NestBuilder {
 public:
  NestBuilder(std::uint64_t seed, const GenParams& params) : rng_(seed), p_(params) {
    nest_.id = "gen-" + std::to_string(seed);
  }

  ir::LoopNest build() {
    build_levels();
    build_operations();
    build_schedule();
    for (BufferPlan& b : buffers_) nest_.buffers.push_back(std::move(b.decl));
    return std::move(nest_);
  }

 private:
  std::size_t pick_in(const std::array<std::size_t, 2>& range) {
    return static_cast<std::size_t>(rng_.uniform_int(static_cast<std::int64_t>(range[0]),
                                                     static_cast<std::int64_t>(range[1])));
  }

  std::size_t log_uniform(const std::array<std::size_t, 2>& range) {
    const double lo = std::log(static_cast<double>(range[0]));
    const double hi = std::log(static_cast<double>(range[1]) + 1.0);
    const auto v = static_cast<std::size_t>(std::floor(std::exp(rng_.uniform(lo, hi))));
    return std::clamp(v, range[0], range[1]);
  }

  OperandType random_type() { return ir::kOperandTypes[rng_.index(ir::kNumOperandTypes)]; }

  void build_levels() {
    const std::size_t n = pick_in(p_.level_count_range);
    const std::int64_t min_span = *std::min_element(p_.span_choices.begin(), p_.span_choices.end());
    std::vector<std::int64_t> spans(n);
    std::int64_t product = 1;
    for (std::size_t l = n; l-- > 0;) {
      // Leave room for the outer levels still to be chosen at minimum span.
      std::int64_t reserve = 1;
      for (std::size_t k = 0; k < l; ++k) reserve *= min_span;
      const std::int64_t budget = p_.max_total_iterations / (product * reserve);
      std::vector<std::int64_t> candidates;
      for (std::int64_t s : p_.span_choices) {
        if (s <= budget) candidates.push_back(s);
      }
      spans[l] = candidates[rng_.index(candidates.size())];
      product *= spans[l];
    }
    for (std::size_t l = 0; l < n; ++l) {
      ir::LoopLevel level;
      level.index = l;
      level.span = spans[l];
      level.has_predicate = rng_.bernoulli(p_.predicate_probability);
      nest_.levels.push_back(std::move(level));
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && rng_.bernoulli(p_.dependency_probability)) {
          nest_.levels[a].dependent_levels.insert(b);
        }
      }
    }
  }

  void build_operations() {
    const std::size_t n = nest_.num_levels();
    const std::size_t inner = n - 1;
    const std::size_t count = pick_in(p_.op_count_range);

    std::vector<std::size_t> levels{inner};
    for (std::size_t k = 1; k < count; ++k) levels.push_back(rng_.index(n));

    // Split the innermost body budget across the innermost statements,
    // at least two instructions (a leaf and the store) each.
    const auto inner_ops = static_cast<std::size_t>(std::count(levels.begin(), levels.end(), inner));
    const std::size_t body = std::max(log_uniform(p_.body_size_range), 2 * inner_ops);
    std::vector<std::size_t> inner_sizes(inner_ops, 2);
    for (std::size_t extra = body - 2 * inner_ops; extra > 0; --extra) {
      ++inner_sizes[rng_.index(inner_ops)];
    }

    std::vector<std::size_t> next_rank(n, 0);
    std::size_t inner_seen = 0;
    for (std::size_t level : levels) {
      const std::size_t size =
          level == inner ? inner_sizes[inner_seen++] : log_uniform(p_.outer_op_size_range);
      ir::Operation op;
      op.level = level;
      op.rank = next_rank[level]++;
      op_type_ = random_type();
      op_level_ = level;
      op.expr = build_expr(size - 1);
      op.store = make_store();
      nest_.operations.push_back(std::move(op));
    }
  }

  OperandType node_type() { return rng_.bernoulli(0.9) ? op_type_ : random_type(); }

  // Expression with exactly `nodes` nodes (one instruction each).
  Expr build_expr(std::size_t nodes) {
    if (nodes <= 1) return leaf();
    if (nodes == 2) return Expr::libcall(node_type(), leaf());
    if (rng_.bernoulli(p_.libcall_probability)) {
      return Expr::libcall(node_type(), build_expr(nodes - 1));
    }
    const double r = rng_.uniform01();
    if (r < 0.1) {
      // Division only by a non-zero literal, so execution cannot fault.
      const OperandType type = node_type();
      Expr lhs = build_expr(nodes - 2);
      return Expr::binary(ExprKind::Div, type, std::move(lhs), constant(type));
    }
    const ExprKind kind = r < 0.45 ? ExprKind::Add : (r < 0.7 ? ExprKind::Sub : ExprKind::Mul);
    const auto left = static_cast<std::size_t>(rng_.uniform_int(1, static_cast<std::int64_t>(nodes) - 2));
    Expr lhs = build_expr(left);
    Expr rhs = build_expr(nodes - 1 - left);
    return Expr::binary(kind, node_type(), std::move(lhs), std::move(rhs));
  }

  Expr constant(OperandType type) {
    const double sign = rng_.bernoulli(0.25) ? -1.0 : 1.0;
    if (ir::is_float(type)) return Expr::constant(type, sign * 0.25 * static_cast<double>(rng_.uniform_int(1, 16)));
    return Expr::constant(type, sign * static_cast<double>(rng_.uniform_int(1, 9)));
  }

  Expr leaf() {
    const double r = rng_.uniform01();
    if (r < 0.5) return Expr::load(make_load());
    if (r < 0.7) {
      const std::size_t level = rng_.bernoulli(0.6) ? op_level_ : rng_.index(op_level_ + 1);
      return Expr::iterator(level);
    }
    return constant(node_type());
  }

  std::size_t new_buffer(OperandType type, bool include_own_level) {
    const std::size_t max_rank = std::min<std::size_t>(2, op_level_ + 1);
    const auto rank = static_cast<std::size_t>(rng_.uniform_int(1, static_cast<std::int64_t>(max_rank)));
    std::vector<std::size_t> pool;
    for (std::size_t l = 0; l <= op_level_; ++l) pool.push_back(l);
    std::vector<std::size_t> dims;
    if (include_own_level) {
      dims.push_back(op_level_);
      pool.pop_back();
    }
    rng_.shuffle(pool);
    for (std::size_t k = 0; dims.size() < rank; ++k) dims.push_back(pool[k]);
    std::sort(dims.begin(), dims.end());
    if (dims.size() == 2 && rng_.bernoulli(0.2)) std::swap(dims[0], dims[1]);

    BufferPlan plan;
    plan.decl.name = "b" + std::to_string(buffers_.size());
    plan.decl.elem_type = type;
    for (std::size_t l : dims) plan.decl.dims.push_back(nest_.levels[l].span + kMaxOffset);
    plan.dim_levels = dims;
    plan.deepest = *std::max_element(dims.begin(), dims.end());
    buffers_.push_back(std::move(plan));
    return buffers_.size() - 1;
  }

  ir::Access access_to(std::size_t buffer, bool allow_offsets) {
    const BufferPlan& plan = buffers_[buffer];
    ir::Access a;
    a.buffer = plan.decl.name;
    for (std::size_t d = 0; d < plan.dim_levels.size(); ++d) {
      ir::AffineIndex idx;
      if (rng_.bernoulli(0.1)) {
        idx.offset = rng_.uniform_int(0, plan.decl.dims[d] - 1);
      } else {
        idx.iterator = plan.dim_levels[d];
        idx.offset = allow_offsets ? rng_.uniform_int(0, kMaxOffset) : 0;
      }
      a.indices.push_back(idx);
    }
    return a;
  }

  std::vector<std::size_t> visible_buffers() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < buffers_.size(); ++b) {
      if (buffers_[b].deepest <= op_level_) out.push_back(b);
    }
    return out;
  }

  ir::Access make_load() {
    const auto visible = visible_buffers();
    std::size_t b;
    if (!visible.empty() && rng_.bernoulli(0.7)) {
      b = visible[rng_.index(visible.size())];
    } else {
      b = new_buffer(rng_.bernoulli(0.7) ? op_type_ : random_type(), rng_.bernoulli(0.8));
    }
    return access_to(b, true);
  }

  ir::Access make_store() {
    const auto visible = visible_buffers();
    std::size_t b;
    if (!visible.empty() && rng_.bernoulli(0.3)) {
      b = visible[rng_.index(visible.size())];
    } else {
      b = new_buffer(op_type_, rng_.bernoulli(0.7));
    }
    return access_to(b, rng_.bernoulli(0.3));
  }

  void build_schedule() {
    static constexpr std::array<std::int64_t, 4> kTileSizes{8, 16, 32, 64};
    static constexpr std::array<std::int64_t, 3> kVectorWidths{4, 8, 16};
    const std::size_t n = nest_.num_levels();
    for (ir::ScheduleKind kind : ir::kScheduleKinds) {
      ir::ScheduleOpt opt;
      opt.kind = kind;
      if (rng_.bernoulli(p_.schedule_annotation_probability)) {
        switch (kind) {
          case ir::ScheduleKind::Interchange:
            if (n >= 2) {
              const std::size_t a = rng_.index(n - 1);
              const auto b = static_cast<std::size_t>(
                  rng_.uniform_int(static_cast<std::int64_t>(a) + 1, static_cast<std::int64_t>(n) - 1));
              opt.applied = true;
              opt.levels = {a, b};
            }
            break;
          case ir::ScheduleKind::Tiling: {
            const std::size_t l = rng_.index(n);
            opt.applied = true;
            opt.levels = {l};
            if (l + 1 < n && rng_.bernoulli(0.5)) opt.levels.push_back(l + 1);
            opt.factor = kTileSizes[rng_.index(kTileSizes.size())];
            break;
          }
          case ir::ScheduleKind::Vectorization:
            opt.applied = true;
            opt.levels = {n - 1};
            opt.factor = kVectorWidths[rng_.index(kVectorWidths.size())];
            break;
          case ir::ScheduleKind::Parallelization:
            opt.applied = true;
            opt.levels = {rng_.bernoulli(0.7) ? std::size_t{0} : rng_.index(n)};
            break;
        }
      }
      nest_.schedule.push_back(std::move(opt));
    }
  }

  Rng rng_;
  const GenParams& p_;
  ir::LoopNest nest_;
  std::vector<BufferPlan> buffers_;
  OperandType op_type_ = OperandType::Float32;
  std::size_t op_level_ = 0;
};

}  // namespace

ir::LoopNest generate_nest(std::uint64_t seed, const GenParams& params) {
  params.validate();
  return NestBuilder(seed, params).build();
}

}  // namespace unrollpilot::synth
