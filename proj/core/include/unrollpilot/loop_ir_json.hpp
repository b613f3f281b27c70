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

// JSON encoding of LoopNest. The document layout is described in
// docs/loop_nest_format.md; field names follow the C++ members and enums are
// spelled as strings ("Float32", "Tiling", ...).

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "unrollpilot/loop_ir.hpp"

namespace unrollpilot::ir {

nlohmann::json to_json(const LoopNest& nest);

/// Structural decoding only; run validate_nest on the result. Throws
/// ParseError naming the offending JSON path.
LoopNest nest_from_json(const nlohmann::json& doc);

LoopNest read_nest_file(const std::filesystem::path& path);
void write_nest_file(const LoopNest& nest, const std::filesystem::path& path);

}  // namespace unrollpilot::ir
