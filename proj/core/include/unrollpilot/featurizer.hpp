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
 * \file featurizer.hpp
 * \brief Fixed-length numeric encoding of a loop nest.
 *
 * Layout (186 entries):
 *
 *   [0]        number of loop levels
 *   [1]        number of level dependencies (sum of |dependent_levels|)
 *   per level slot (4 x 7):
 *              log2(1 + span), predicate flag, log2(1 + library calls at the
 *              level), dependency row (4 flags)
 *   per operation slot (4 x 33), operations sorted by (level, rank):
 *              level, rank, log2(1 + distinct iterators), log2(1 + distinct
 *              constants), arithmetic kind x operand type histogram (5 x 4),
 *              load histogram by type (4), store histogram by type (4),
 *              library calls
 *   per schedule kind (Interchange, Tiling, Vectorization, Parallelization):
 *              applied flag, level multi-hot (4), log2(1 + factor)
 *
 * Every count, including histogram cells, goes through log2(1 + x); flags,
 * indices and the two leading scalars stay raw. Unused slots are zero.
 */

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "unrollpilot/loop_ir.hpp"

namespace unrollpilot::features {

inline constexpr std::size_t kLevelSlotWidth = 3 + ir::kMaxLevels;
inline constexpr std::size_t kOpSlotWidth =
    4 + ir::kNumArithKinds * ir::kNumOperandTypes + 2 * ir::kNumOperandTypes + 1;
inline constexpr std::size_t kScheduleSlotWidth = 1 + ir::kMaxLevels + 1;

inline constexpr std::size_t kLevelBlockOffset = 2;
inline constexpr std::size_t kOpBlockOffset = kLevelBlockOffset + ir::kMaxLevels * kLevelSlotWidth;
inline constexpr std::size_t kScheduleBlockOffset = kOpBlockOffset + ir::kMaxOperations * kOpSlotWidth;
inline constexpr std::size_t kFeatureCount =
    kScheduleBlockOffset + ir::kNumScheduleKinds * kScheduleSlotWidth;
static_assert(kFeatureCount == 186);

using FeatureVector = std::array<double, kFeatureCount>;

enum class Transform { Raw, Flag, Log2p1 };

struct FeatureDescriptor {
  std::size_t index;
  std::string name;
  Transform transform;
};

std::string_view to_string(Transform transform);

/// Throws ValidationError for invalid nests.
FeatureVector extract_features(const ir::LoopNest& nest);

/// One descriptor per entry of FeatureVector, in index order.
const std::vector<FeatureDescriptor>& feature_schema();

}  // namespace unrollpilot::features
