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
 * \file config.hpp
 * \brief Experiment configuration file (JSON).
 *
 *     {
 *       "gen_params":   {"level_count_range": [1, 4], "span_choices": [...], ...},
 *       "cost_model":   {"opcode_costs": {"Div": 10, ...}, "code_size_budget": 256,
 *                        "icache_penalty_slope": 0.5},
 *       "train_config": {"learning_rate": 0.001, "batch_size": 32, ...},
 *       "paths":        {"data": "...", "model": "...", "reports": "..."}
 *     }
 *
 * Every key is optional and falls back to the built-in default; unknown keys
 * are rejected so that typos do not go unnoticed. Field names match the
 * struct members of GenParams, CostModel and TrainConfig; opcode costs are
 * keyed by opcode name.
 */

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/mlp.hpp"
#include "unrollpilot/vm.hpp"

namespace unrollpilot {

struct PathConfig {
  std::string data;
  std::string model;
  std::string reports;

  bool operator==(const PathConfig&) const = default;
};

struct CliConfig {
  synth::GenParams gen_params;
  vm::CostModel cost_model;
  mlp::TrainConfig train_config;
  PathConfig paths;

  /// Throws DomainError when a nested config is invalid.
  void validate() const;

  bool operator==(const CliConfig&) const = default;
};

nlohmann::json to_json(const CliConfig& config);
/// Throws ParseError for unknown keys or wrong types, DomainError for values
/// out of range.
CliConfig config_from_json(const nlohmann::json& doc);
CliConfig load_config(const std::filesystem::path& path);

}  // namespace unrollpilot
