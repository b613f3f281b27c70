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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "unrollpilot/loop_ir.hpp"

namespace unrollpilot::synth {

/// Knobs of the random nest generator. Ranges are closed intervals.
///
/// The innermost body size is drawn log-uniformly from body_size_range and
/// then realized as random expression trees of exactly that many
/// instructions, so the optimal unrolling factor spreads over all classes.
struct GenParams {
  std::array<std::size_t, 2> level_count_range{1, 4};
  std::vector<std::int64_t> span_choices{8, 16, 32, 64, 128, 256, 512, 1024};
  std::array<std::size_t, 2> op_count_range{1, 4};
  /// Static instruction count of the innermost loop body.
  std::array<std::size_t, 2> body_size_range{3, 320};
  /// Instruction count of each statement attached to an outer level.
  std::array<std::size_t, 2> outer_op_size_range{2, 24};
  double libcall_probability = 0.1;
  double predicate_probability = 0.2;
  double schedule_annotation_probability = 0.3;
  double dependency_probability = 0.3;
  /// Upper bound on the product of all spans (executed innermost iterations).
  std::int64_t max_total_iterations = 8192;

  /// Throws DomainError when a probability or range is invalid.
  void validate() const;

  bool operator==(const GenParams&) const = default;
};

/// Deterministic in (seed, params); the result always passes validate_nest.
ir::LoopNest generate_nest(std::uint64_t seed, const GenParams& params = {});

}  // namespace unrollpilot::synth
