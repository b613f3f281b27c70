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

#include "unrollpilot/featurizer.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace unrollpilot::features {

using ir::ExprKind;

namespace {

double log2p1(double x) { return std::log2(1.0 + x); }

std::size_t type_index(ir::OperandType t) { return static_cast<std::size_t>(t); }

// Offsets inside an operation slot.
constexpr std::size_t kOpLevel = 0;
constexpr std::size_t kOpRank = 1;
constexpr std::size_t kOpVariables = 2;
constexpr std::size_t kOpInvariants = 3;
constexpr std::size_t kOpArithHist = 4;
constexpr std::size_t kOpLoadHist = kOpArithHist + ir::kNumArithKinds * ir::kNumOperandTypes;
constexpr std::size_t kOpStoreHist = kOpLoadHist + ir::kNumOperandTypes;
constexpr std::size_t kOpLibCalls = kOpStoreHist + ir::kNumOperandTypes;
static_assert(kOpLibCalls + 1 == kOpSlotWidth);

struct OpSummary {
  std::set<std::size_t> iterators;
  std::set<std::pair<ir::OperandType, double>> constants;
  std::array<double, ir::kNumArithKinds * ir::kNumOperandTypes> arith{};
  std::array<double, ir::kNumOperandTypes> loads{};
  double libcalls = 0;
};

OpSummary summarize(const ir::LoopNest& nest, const ir::Operation& op) {
  OpSummary s;
  ir::visit(op.expr, [&](const ir::Expr& e) {
    switch (e.kind) {
      case ExprKind::Load:
        s.loads[type_index(nest.find_buffer(e.access.buffer)->elem_type)] += 1;
        for (const ir::AffineIndex& idx : e.access.indices) {
          if (idx.iterator) s.iterators.insert(*idx.iterator);
        }
        break;
      case ExprKind::Iterator:
        s.iterators.insert(e.level);
        break;
      case ExprKind::Constant:
        s.constants.emplace(e.type, e.value);
        break;
      default:
        s.arith[ir::arith_index(e.kind) * ir::kNumOperandTypes + type_index(e.type)] += 1;
        if (e.kind == ExprKind::LibCall) s.libcalls += 1;
    }
  });
  return s;
}

}  // namespace

std::string_view to_string(Transform transform) {
  switch (transform) {
    case Transform::Raw: return "raw";
    case Transform::Flag: return "flag";
    case Transform::Log2p1: return "log2p1";
  }
  return "?";
}

FeatureVector extract_features(const ir::LoopNest& nest) {
  ir::require_valid(nest);
  FeatureVector fv{};
  const std::size_t n = nest.num_levels();

  std::size_t dependencies = 0;
  for (const ir::LoopLevel& l : nest.levels) dependencies += l.dependent_levels.size();
  fv[0] = static_cast<double>(n);
  fv[1] = static_cast<double>(dependencies);

  const auto ops = ir::operations_in_order(nest);
  std::vector<OpSummary> summaries;
  summaries.reserve(ops.size());
  std::array<double, ir::kMaxLevels> libcalls_at_level{};
  for (const ir::Operation* op : ops) {
    summaries.push_back(summarize(nest, *op));
    libcalls_at_level[op->level] += summaries.back().libcalls;
  }

  for (std::size_t l = 0; l < n; ++l) {
    const ir::LoopLevel& level = nest.levels[l];
    double* slot = fv.data() + kLevelBlockOffset + l * kLevelSlotWidth;
    slot[0] = log2p1(static_cast<double>(level.span));
    slot[1] = level.has_predicate ? 1.0 : 0.0;
    slot[2] = log2p1(libcalls_at_level[l]);
    for (std::size_t dep : level.dependent_levels) slot[3 + dep] = 1.0;
  }

  for (std::size_t k = 0; k < ops.size(); ++k) {
    const ir::Operation& op = *ops[k];
    const OpSummary& s = summaries[k];
    double* slot = fv.data() + kOpBlockOffset + k * kOpSlotWidth;
    slot[kOpLevel] = static_cast<double>(op.level);
    slot[kOpRank] = static_cast<double>(op.rank);
    slot[kOpVariables] = log2p1(static_cast<double>(s.iterators.size()));
    slot[kOpInvariants] = log2p1(static_cast<double>(s.constants.size()));
    for (std::size_t c = 0; c < s.arith.size(); ++c) slot[kOpArithHist + c] = log2p1(s.arith[c]);
    for (std::size_t t = 0; t < ir::kNumOperandTypes; ++t) {
      slot[kOpLoadHist + t] = log2p1(s.loads[t]);
    }
    slot[kOpStoreHist + type_index(nest.find_buffer(op.store.buffer)->elem_type)] = log2p1(1.0);
    slot[kOpLibCalls] = log2p1(s.libcalls);
  }

  for (std::size_t k = 0; k < ir::kNumScheduleKinds; ++k) {
    const ir::ScheduleOpt* opt = nest.find_schedule(ir::kScheduleKinds[k]);
    if (opt == nullptr || !opt->applied) continue;
    double* slot = fv.data() + kScheduleBlockOffset + k * kScheduleSlotWidth;
    slot[0] = 1.0;
    for (std::size_t l : opt->levels) slot[1 + l] = 1.0;
    slot[1 + ir::kMaxLevels] = log2p1(static_cast<double>(opt->factor));
  }
  return fv;
}

const std::vector<FeatureDescriptor>& feature_schema() {
  static const std::vector<FeatureDescriptor> schema = [] {
    std::vector<FeatureDescriptor> s;
    auto add = [&](std::string name, Transform t) { s.push_back({s.size(), std::move(name), t}); };
    add("num_levels", Transform::Raw);
    add("num_dependencies", Transform::Raw);
    for (std::size_t l = 0; l < ir::kMaxLevels; ++l) {
      const std::string p = "level" + std::to_string(l) + ".";
      add(p + "span", Transform::Log2p1);
      add(p + "has_predicate", Transform::Flag);
      add(p + "libcalls", Transform::Log2p1);
      for (std::size_t d = 0; d < ir::kMaxLevels; ++d) {
        add(p + "depends_on_level" + std::to_string(d), Transform::Flag);
      }
    }
    for (std::size_t k = 0; k < ir::kMaxOperations; ++k) {
      const std::string p = "op" + std::to_string(k) + ".";
      add(p + "level", Transform::Raw);
      add(p + "rank", Transform::Raw);
      add(p + "num_variables", Transform::Log2p1);
      add(p + "num_invariants", Transform::Log2p1);
      for (ir::ExprKind kind : ir::kArithKinds) {
        for (ir::OperandType t : ir::kOperandTypes) {
          add(p + "arith." + std::string(ir::to_string(kind)) + "." + std::string(ir::to_string(t)),
              Transform::Log2p1);
        }
      }
      for (ir::OperandType t : ir::kOperandTypes) {
        add(p + "loads." + std::string(ir::to_string(t)), Transform::Log2p1);
      }
      for (ir::OperandType t : ir::kOperandTypes) {
        add(p + "stores." + std::string(ir::to_string(t)), Transform::Log2p1);
      }
      add(p + "libcalls", Transform::Log2p1);
    }
    for (ir::ScheduleKind kind : ir::kScheduleKinds) {
      const std::string p = "schedule." + std::string(ir::to_string(kind)) + ".";
      add(p + "applied", Transform::Flag);
      for (std::size_t l = 0; l < ir::kMaxLevels; ++l) {
        add(p + "level" + std::to_string(l), Transform::Flag);
      }
      add(p + "factor", Transform::Log2p1);
    }
    return s;
  }();
  return schema;
}

}  // namespace unrollpilot::features
