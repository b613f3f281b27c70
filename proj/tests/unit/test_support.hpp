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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "reference_interpreter.hpp"
#include "unrollpilot/loop_ir.hpp"
#include "unrollpilot/vm.hpp"

namespace unrollpilot::testing {

using ir::AffineIndex;
using ir::Expr;
using ir::ExprKind;
using ir::OperandType;

inline AffineIndex at(std::size_t level, std::int64_t offset = 0) { return {level, offset}; }

inline ir::LoopLevel level(std::size_t index, std::int64_t span) {
  ir::LoopLevel l;
  l.index = index;
  l.span = span;
  return l;
}

/// One loop of `span` iterations computing buf[i] = i + 1 into an Int32
/// buffer of `extent` elements.
inline ir::LoopNest increment_nest(std::int64_t span, std::int64_t extent) {
  ir::LoopNest nest;
  nest.id = "increment";
  nest.levels = {level(0, span)};
  nest.buffers = {{"buf", OperandType::Int32, {extent}}};
  nest.operations = {{0, 0,
                      Expr::binary(ExprKind::Add, OperandType::Int32, Expr::iterator(0),
                                   Expr::constant(OperandType::Int32, 1)),
                      {"buf", {at(0)}}}};
  return nest;
}

/// Innermost body of exactly `body_size` (>= 2) static instructions:
/// out[i] = in[i] + in[i] + ... (Float32), one statement.
inline ir::LoopNest sized_nest(std::int64_t span, std::size_t body_size) {
  ir::LoopNest nest;
  nest.id = "sized";
  nest.levels = {level(0, span)};
  nest.buffers = {{"in", OperandType::Float32, {span}}, {"out", OperandType::Float32, {span}}};
  // loads + (loads - 1) adds + 1 store, plus a LibCall when body_size is odd.
  const std::size_t loads = body_size / 2;
  Expr e = Expr::load({"in", {at(0)}});
  for (std::size_t k = 1; k < loads; ++k) {
    e = Expr::binary(ExprKind::Add, OperandType::Float32, std::move(e),
                     Expr::load({"in", {at(0)}}));
  }
  if (body_size % 2 == 1) e = Expr::libcall(OperandType::Float32, std::move(e));
  nest.operations = {{0, 0, std::move(e), {"out", {at(0)}}}};
  return nest;
}

inline std::vector<oracle::RefBuffer> to_ref(const std::vector<vm::BufferState>& state) {
  std::vector<oracle::RefBuffer> out;
  for (const vm::BufferState& b : state) {
    oracle::RefBuffer r{b.name, b.type, b.ints, {}};
    for (double f : b.floats) r.float_bits.push_back(std::bit_cast<std::uint64_t>(f));
    out.push_back(std::move(r));
  }
  return out;
}

inline oracle::RefCosts ref_costs(const vm::CostModel& model) {
  oracle::RefCosts c;
  for (std::size_t i = 0; i < vm::kNumOpcodes; ++i) c.opcode[i] = model.opcode_costs[i];
  c.budget = static_cast<double>(model.code_size_budget);
  c.slope = model.icache_penalty_slope;
  return c;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("unrollpilot-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline bool contains(const std::vector<std::string>& items, const std::string& needle) {
  return std::any_of(items.begin(), items.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace unrollpilot::testing
