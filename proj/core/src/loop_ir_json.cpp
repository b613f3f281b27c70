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

#include "unrollpilot/loop_ir_json.hpp"

#include <fstream>
#include <string>

#include "unrollpilot/error.hpp"

namespace unrollpilot::ir {

using nlohmann::json;

namespace {

json access_to_json(const Access& a) {
  json indices = json::array();
  for (const AffineIndex& idx : a.indices) {
    indices.push_back({{"iterator", idx.iterator ? json(*idx.iterator) : json(nullptr)},
                       {"offset", idx.offset}});
  }
  return {{"buffer", a.buffer}, {"indices", std::move(indices)}};
}

json expr_to_json(const Expr& e) {
  json j = {{"kind", to_string(e.kind)}};
  switch (e.kind) {
    case ExprKind::Load:
      j["access"] = access_to_json(e.access);
      break;
    case ExprKind::Iterator:
      j["level"] = e.level;
      break;
    case ExprKind::Constant:
      j["type"] = to_string(e.type);
      j["value"] = e.value;
      break;
    default: {
      j["type"] = to_string(e.type);
      json children = json::array();
      for (const Expr& c : e.children) children.push_back(expr_to_json(c));
      j["children"] = std::move(children);
    }
  }
  return j;
}

// Field accessors that report the JSON path of whatever is wrong.
const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

const json& array_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_array()) throw ParseError(path + "." + key + ": expected an array");
  return v;
}

std::string string_of(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected a string");
  return v.get<std::string>();
}

std::int64_t int_of(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  return v.get<std::int64_t>();
}

std::size_t index_of(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) throw ParseError(path + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

double number_of(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  return v.get<double>();
}

bool bool_of(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ParseError(path + ": expected a boolean");
  return v.get<bool>();
}

OperandType type_of(const json& v, const std::string& path) {
  auto t = parse_operand_type(string_of(v, path));
  if (!t) throw ParseError(path + ": unknown operand type '" + v.get<std::string>() + "'");
  return *t;
}

Access access_from_json(const json& j, const std::string& path) {
  Access a;
  a.buffer = string_of(field(j, "buffer", path), path + ".buffer");
  const json& indices = array_field(j, "indices", path);
  for (std::size_t d = 0; d < indices.size(); ++d) {
    const std::string p = path + ".indices[" + std::to_string(d) + "]";
    AffineIndex idx;
    const json& it = field(indices[d], "iterator", p);
    if (!it.is_null()) idx.iterator = index_of(it, p + ".iterator");
    idx.offset = int_of(field(indices[d], "offset", p), p + ".offset");
    a.indices.push_back(idx);
  }
  return a;
}

Expr expr_from_json(const json& j, const std::string& path) {
  const std::string kind_name = string_of(field(j, "kind", path), path + ".kind");
  auto kind = parse_expr_kind(kind_name);
  if (!kind) throw ParseError(path + ".kind: unknown expression kind '" + kind_name + "'");
  Expr e;
  e.kind = *kind;
  switch (e.kind) {
    case ExprKind::Load:
      e.access = access_from_json(field(j, "access", path), path + ".access");
      break;
    case ExprKind::Iterator:
      e.type = OperandType::Int64;
      e.level = index_of(field(j, "level", path), path + ".level");
      break;
    case ExprKind::Constant:
      e.type = type_of(field(j, "type", path), path + ".type");
      e.value = number_of(field(j, "value", path), path + ".value");
      break;
    default: {
      e.type = type_of(field(j, "type", path), path + ".type");
      const json& children = array_field(j, "children", path);
      for (std::size_t c = 0; c < children.size(); ++c) {
        e.children.push_back(
            expr_from_json(children[c], path + ".children[" + std::to_string(c) + "]"));
      }
    }
  }
  return e;
}

}  // namespace

json to_json(const LoopNest& nest) {
  json levels = json::array();
  for (const LoopLevel& l : nest.levels) {
    levels.push_back({{"index", l.index},
                      {"span", l.span},
                      {"has_predicate", l.has_predicate},
                      {"dependent_levels", l.dependent_levels}});
  }
  json buffers = json::array();
  for (const Buffer& b : nest.buffers) {
    buffers.push_back({{"name", b.name}, {"elem_type", to_string(b.elem_type)}, {"dims", b.dims}});
  }
  json operations = json::array();
  for (const Operation& op : nest.operations) {
    operations.push_back({{"level", op.level},
                          {"rank", op.rank},
                          {"expr", expr_to_json(op.expr)},
                          {"store", access_to_json(op.store)}});
  }
  json schedule = json::array();
  for (const ScheduleOpt& s : nest.schedule) {
    schedule.push_back({{"kind", to_string(s.kind)},
                        {"applied", s.applied},
                        {"levels", s.levels},
                        {"factor", s.factor}});
  }
  return {{"id", nest.id},
          {"levels", std::move(levels)},
          {"operations", std::move(operations)},
          {"buffers", std::move(buffers)},
          {"schedule", std::move(schedule)}};
}

LoopNest nest_from_json(const json& doc) {
  const std::string root = "$";
  LoopNest nest;
  nest.id = string_of(field(doc, "id", root), "$.id");

  const json& levels = array_field(doc, "levels", root);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string p = "$.levels[" + std::to_string(i) + "]";
    LoopLevel l;
    l.index = index_of(field(levels[i], "index", p), p + ".index");
    l.span = int_of(field(levels[i], "span", p), p + ".span");
    l.has_predicate = bool_of(field(levels[i], "has_predicate", p), p + ".has_predicate");
    const json& deps = array_field(levels[i], "dependent_levels", p);
    for (std::size_t d = 0; d < deps.size(); ++d) {
      l.dependent_levels.insert(
          index_of(deps[d], p + ".dependent_levels[" + std::to_string(d) + "]"));
    }
    nest.levels.push_back(std::move(l));
  }

  const json& buffers = array_field(doc, "buffers", root);
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const std::string p = "$.buffers[" + std::to_string(i) + "]";
    Buffer b;
    b.name = string_of(field(buffers[i], "name", p), p + ".name");
    b.elem_type = type_of(field(buffers[i], "elem_type", p), p + ".elem_type");
    const json& dims = array_field(buffers[i], "dims", p);
    for (std::size_t d = 0; d < dims.size(); ++d) {
      b.dims.push_back(int_of(dims[d], p + ".dims[" + std::to_string(d) + "]"));
    }
    nest.buffers.push_back(std::move(b));
  }

  const json& operations = array_field(doc, "operations", root);
  for (std::size_t i = 0; i < operations.size(); ++i) {
    const std::string p = "$.operations[" + std::to_string(i) + "]";
    Operation op;
    op.level = index_of(field(operations[i], "level", p), p + ".level");
    op.rank = index_of(field(operations[i], "rank", p), p + ".rank");
    op.expr = expr_from_json(field(operations[i], "expr", p), p + ".expr");
    op.store = access_from_json(field(operations[i], "store", p), p + ".store");
    nest.operations.push_back(std::move(op));
  }

  // The schedule list is optional: a missing key means no annotations.
  if (doc.contains("schedule")) {
    const json& schedule = array_field(doc, "schedule", root);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const std::string p = "$.schedule[" + std::to_string(i) + "]";
      ScheduleOpt s;
      const std::string kind = string_of(field(schedule[i], "kind", p), p + ".kind");
      auto parsed = parse_schedule_kind(kind);
      if (!parsed) throw ParseError(p + ".kind: unknown schedule kind '" + kind + "'");
      s.kind = *parsed;
      s.applied = bool_of(field(schedule[i], "applied", p), p + ".applied");
      const json& lv = array_field(schedule[i], "levels", p);
      for (std::size_t d = 0; d < lv.size(); ++d) {
        s.levels.push_back(index_of(lv[d], p + ".levels[" + std::to_string(d) + "]"));
      }
      s.factor = int_of(field(schedule[i], "factor", p), p + ".factor");
      nest.schedule.push_back(std::move(s));
    }
  }
  return nest;
}

LoopNest read_nest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open nest file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return nest_from_json(doc);
}

void write_nest_file(const LoopNest& nest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write nest file '" + path.string() + "'");
  out << to_json(nest).dump(2) << '\n';
}

}  // namespace unrollpilot::ir
