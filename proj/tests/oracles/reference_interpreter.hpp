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

// Test oracles. Nothing here calls into the bytecode VM: loop nests are
// interpreted straight from the IR tree, with the value semantics and the
// loop cost accounting re-implemented from their written definitions.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "unrollpilot/loop_ir.hpp"

namespace unrollpilot::oracle {

/// Final contents of one buffer. Floating buffers keep the raw IEEE bits so
/// that comparisons are exact.
struct RefBuffer {
  std::string name;
  ir::OperandType type;
  std::vector<std::int64_t> ints;
  std::vector<std::uint64_t> float_bits;
};

struct RefResult {
  std::vector<RefBuffer> buffers;
  double weighted_cost = 0.0;
  std::uint64_t executed = 0;  // instruction instances
};

struct RefCosts {
  // Indexed like the VM opcode list.
  std::array<double, 13> opcode{1, 1, 4, 4, 1, 1, 3, 10, 20, 1, 1, 2, 1};
  double budget = 256;
  double slope = 0.5;
};

struct RefFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Interprets `nest` with its innermost loop executed as k-wide chunks plus
/// a remainder loop, charging every instruction the documented program
/// would run. Throws RefFault on division by zero.
RefResult reference_execute(const ir::LoopNest& nest, std::int64_t factor = 1,
                            const RefCosts& costs = {});

/// Brute-force label: index of the cheapest of {1, 2, 4, ..., 64} under
/// reference_execute, ties to the smaller factor.
std::size_t reference_label(const ir::LoopNest& nest, const RefCosts& costs = {});

/// Closed-form weighted cost of the documented loop shape, from static
/// instruction counts only.
double analytic_cost(const ir::LoopNest& nest, std::int64_t factor, const RefCosts& costs = {});

bool same_buffers(const std::vector<RefBuffer>& a, const std::vector<RefBuffer>& b);

}  // namespace unrollpilot::oracle
