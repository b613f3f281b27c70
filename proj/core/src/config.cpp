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

#include "unrollpilot/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "unrollpilot/dataset.hpp"
#include "unrollpilot/error.hpp"
#include "unrollpilot/featurizer.hpp"

namespace unrollpilot {

using nlohmann::json;

void CliConfig::validate() const {
  gen_params.validate();
  cost_model.validate();
  train_config.validate();
  // The CLI feeds feature vectors in and reads factor classes out.
  const auto& dims = train_config.layer_dims;
  if (dims.front() != features::kFeatureCount || dims.back() != data::kNumClasses) {
    throw DomainError("train_config.layer_dims must start with " +
                      std::to_string(features::kFeatureCount) + " and end with " +
                      std::to_string(data::kNumClasses));
  }
}

json to_json(const CliConfig& config) {
  const synth::GenParams& g = config.gen_params;
  const vm::CostModel& c = config.cost_model;
  const mlp::TrainConfig& t = config.train_config;
  json costs = json::object();
  for (std::size_t i = 0; i < vm::kNumOpcodes; ++i) {
    costs[std::string(vm::to_string(static_cast<vm::Opcode>(i)))] = c.opcode_costs[i];
  }
  return {
      {"gen_params",
       {{"level_count_range", g.level_count_range},
        {"span_choices", g.span_choices},
        {"op_count_range", g.op_count_range},
        {"body_size_range", g.body_size_range},
        {"outer_op_size_range", g.outer_op_size_range},
        {"libcall_probability", g.libcall_probability},
        {"predicate_probability", g.predicate_probability},
        {"schedule_annotation_probability", g.schedule_annotation_probability},
        {"dependency_probability", g.dependency_probability},
        {"max_total_iterations", g.max_total_iterations}}},
      {"cost_model",
       {{"opcode_costs", costs},
        {"code_size_budget", c.code_size_budget},
        {"icache_penalty_slope", c.icache_penalty_slope}}},
      {"train_config",
       {{"layer_dims", t.layer_dims},
        {"learning_rate", t.learning_rate},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_epsilon", t.adam_epsilon},
        {"batch_size", t.batch_size},
        {"max_epochs", t.max_epochs},
        {"early_stop_patience", t.early_stop_patience},
        {"init_range", t.init_range},
        {"seed", t.seed}}},
      {"paths",
       {{"data", config.paths.data},
        {"model", config.paths.model},
        {"reports", config.paths.reports}}},
  };
}

namespace {

// Reads optional members of one object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ParseError(path_ + "." + key + ": wrong type " + std::string(it->type_name()));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) throw ParseError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

CliConfig config_from_json(const json& doc) {
  CliConfig config;
  Section root(doc, "$");

  if (const json* node = root.child("gen_params")) {
    Section s(*node, root.path("gen_params"));
    synth::GenParams& g = config.gen_params;
    s.read("level_count_range", g.level_count_range);
    s.read("span_choices", g.span_choices);
    s.read("op_count_range", g.op_count_range);
    s.read("body_size_range", g.body_size_range);
    s.read("outer_op_size_range", g.outer_op_size_range);
    s.read("libcall_probability", g.libcall_probability);
    s.read("predicate_probability", g.predicate_probability);
    s.read("schedule_annotation_probability", g.schedule_annotation_probability);
    s.read("dependency_probability", g.dependency_probability);
    s.read("max_total_iterations", g.max_total_iterations);
    s.finish();
  }

  if (const json* node = root.child("cost_model")) {
    Section s(*node, root.path("cost_model"));
    vm::CostModel& c = config.cost_model;
    if (const json* costs = s.child("opcode_costs")) {
      Section oc(*costs, s.path("opcode_costs"));
      for (std::size_t i = 0; i < vm::kNumOpcodes; ++i) {
        const std::string name(vm::to_string(static_cast<vm::Opcode>(i)));
        oc.read(name.c_str(), c.opcode_costs[i]);
      }
      oc.finish();
    }
    s.read("code_size_budget", c.code_size_budget);
    s.read("icache_penalty_slope", c.icache_penalty_slope);
    s.finish();
  }

  if (const json* node = root.child("train_config")) {
    Section s(*node, root.path("train_config"));
    mlp::TrainConfig& t = config.train_config;
    s.read("layer_dims", t.layer_dims);
    s.read("learning_rate", t.learning_rate);
    s.read("adam_beta1", t.adam_beta1);
    s.read("adam_beta2", t.adam_beta2);
    s.read("adam_epsilon", t.adam_epsilon);
    s.read("batch_size", t.batch_size);
    s.read("max_epochs", t.max_epochs);
    s.read("early_stop_patience", t.early_stop_patience);
    s.read("init_range", t.init_range);
    s.read("seed", t.seed);
    s.finish();
  }

  if (const json* node = root.child("paths")) {
    Section s(*node, root.path("paths"));
    s.read("data", config.paths.data);
    s.read("model", config.paths.model);
    s.read("reports", config.paths.reports);
    s.finish();
  }

  root.finish();
  config.validate();
  return config;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace unrollpilot
