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

#include "unrollpilot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "unrollpilot/error.hpp"
#include "unrollpilot/random.hpp"

namespace unrollpilot::data {

using nlohmann::json;

std::size_t class_of_factor(std::int64_t factor) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (kFactors[c] == factor) return c;
  }
  throw DomainError("factor " + std::to_string(factor) + " is not a candidate unrolling factor");
}

LabeledSample label_exhaustive(const ir::LoopNest& nest, const vm::CostModel& cost_model) {
  LabeledSample sample;
  sample.nest_id = nest.id;
  sample.features = features::extract_features(nest);
  const vm::Program base = vm::lower(nest);
  const std::size_t inner = base.innermost_level();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const vm::Program unrolled = vm::apply_unroll(base, inner, kFactors[c]);
    sample.costs[c] = vm::execute(unrolled, cost_model).weighted_cost;
    if (sample.costs[c] < sample.costs[sample.optimal_class]) sample.optimal_class = c;
  }
  sample.without_cost = sample.costs[class_of_factor(1)];
  return sample;
}

BuildResult build_dataset(std::size_t count, std::uint64_t seed, const synth::GenParams& params,
                          const vm::CostModel& cost_model, std::size_t jobs) {
  params.validate();
  cost_model.validate();
  jobs = std::max<std::size_t>(jobs, 1);

  struct Slot {
    std::optional<LabeledSample> sample;
    std::string error;
  };

  BuildResult result;
  result.samples.reserve(count);
  std::uint64_t next_seed = seed;
  // Every seed failing would otherwise loop forever.
  const std::size_t max_attempts = count * 4 + 64;
  std::size_t attempts = 0;

  while (result.samples.size() < count) {
    const std::size_t batch = count - result.samples.size();
    if (attempts + batch > max_attempts) {
      throw Error("build_dataset: too many discarded seeds (" +
                  std::to_string(result.discarded.size()) + ")");
    }
    std::vector<Slot> slots(batch);
    auto work = [&](std::size_t worker) {
      for (std::size_t i = worker; i < batch; i += jobs) {
        try {
          slots[i].sample = label_exhaustive(synth::generate_nest(next_seed + i, params), cost_model);
        } catch (const Error& e) {
          slots[i].error = e.what();
        }
      }
    };
    if (jobs == 1 || batch == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(jobs, batch); ++w) pool.emplace_back(work, w);
    }
    for (std::size_t i = 0; i < batch; ++i) {
      if (slots[i].sample) {
        result.samples.push_back(std::move(*slots[i].sample));
      } else {
        result.discarded.push_back({next_seed + i, std::move(slots[i].error)});
      }
    }
    next_seed += batch;
    attempts += batch;
  }
  return result;
}

std::array<std::size_t, kNumClasses> class_histogram(const Dataset& dataset) {
  std::array<std::size_t, kNumClasses> hist{};
  for (const LabeledSample& s : dataset) ++hist.at(s.optimal_class);
  return hist;
}

namespace {

// Largest-remainder apportionment of round(total * ratio) over the classes.
std::array<std::size_t, kNumClasses> apportion(const std::array<std::size_t, kNumClasses>& sizes,
                                               const std::array<std::size_t, kNumClasses>& taken,
                                               double ratio) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(total) * ratio));
  std::array<std::size_t, kNumClasses> quota{};
  std::array<double, kNumClasses> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = static_cast<double>(sizes[c]) * ratio;
    quota[c] = std::min(static_cast<std::size_t>(std::floor(exact)), sizes[c] - taken[c]);
    remainder[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::array<std::size_t, kNumClasses> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t c : order) {
    if (assigned >= target) break;
    if (quota[c] + taken[c] < sizes[c] && remainder[c] > 0.0) {
      ++quota[c];
      ++assigned;
    }
  }
  return quota;
}

}  // namespace

Split split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
  for (double r : {ratios.train, ratios.val, ratios.test}) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("split ratios must be positive");
  }
  if (std::fabs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw DomainError("split ratios must sum to 1");
  }
  if (dataset.empty()) throw DomainError("cannot split an empty dataset");

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class.at(dataset[i].optimal_class).push_back(i);
  Rng rng(seed);
  std::array<std::size_t, kNumClasses> sizes{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    rng.shuffle(by_class[c]);
    sizes[c] = by_class[c].size();
  }

  const std::array<std::size_t, kNumClasses> none{};
  const auto val_quota = apportion(sizes, none, ratios.val);
  const auto test_quota = apportion(sizes, val_quota, ratios.test);

  Split split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t k = 0; k < by_class[c].size(); ++k) {
      const LabeledSample& s = dataset[by_class[c][k]];
      if (k < val_quota[c]) {
        split.val.push_back(s);
      } else if (k < val_quota[c] + test_quota[c]) {
        split.test.push_back(s);
      } else {
        split.train.push_back(s);
      }
    }
  }
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw DomainError("split of " + std::to_string(dataset.size()) +
                      " samples leaves a partition empty");
  }
  rng.shuffle(split.train);
  rng.shuffle(split.val);
  rng.shuffle(split.test);
  return split;
}

// ---------------------------------------------------------------------------
// JSON Lines
// ---------------------------------------------------------------------------

void write_jsonl(const Dataset& dataset, std::ostream& out) {
  // Key order is part of the file format, hence ordered_json.
  out << nlohmann::ordered_json{{"schema_version", kSchemaVersion}, {"factors", kFactors}}.dump()
      << '\n';
  for (const LabeledSample& s : dataset) {
    nlohmann::ordered_json record = {{"nest_id", s.nest_id},
                   {"features", s.features},
                   {"costs", s.costs},
                   {"optimal_class", s.optimal_class},
                   {"without_cost", s.without_cost}};
    out << record.dump() << '\n';
  }
}

void write_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset '" + path.string() + "'");
  write_jsonl(dataset, out);
  if (!out) throw Error("failed writing dataset '" + path.string() + "'");
}

namespace {

const json& record_field(const json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  return *it;
}

template <std::size_t N>
std::array<double, N> fixed_numbers(const json& v, const char* key, std::size_t line) {
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array", line);
  if (v.size() != N) {
    throw SchemaMismatchError(std::string("field '") + key + "' has " + std::to_string(v.size()) +
                                  " entries, expected " + std::to_string(N),
                              line);
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) {
      throw ParseError(std::string("field '") + key + "' entry " + std::to_string(i) +
                           " is not a number",
                       line);
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

Dataset read_jsonl(std::istream& in) {
  Dataset dataset;
  std::string text;
  std::size_t line = 0;
  bool saw_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!rec.is_object()) throw ParseError("record must be a JSON object", line);
    if (!saw_header) {
      if (!rec.contains("schema_version")) throw ParseError("missing header line", line);
      const json& version = rec["schema_version"];
      if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
        throw SchemaMismatchError("unsupported schema_version, expected " +
                                      std::to_string(kSchemaVersion),
                                  line);
      }
      const json& factors = record_field(rec, "factors", line);
      if (factors != json(kFactors)) {
        throw SchemaMismatchError("factor set differs from [1,2,4,8,16,32,64]", line);
      }
      saw_header = true;
      continue;
    }
    LabeledSample s;
    const json& id = record_field(rec, "nest_id", line);
    if (!id.is_string()) throw ParseError("field 'nest_id' must be a string", line);
    s.nest_id = id.get<std::string>();
    s.features = fixed_numbers<features::kFeatureCount>(record_field(rec, "features", line),
                                                        "features", line);
    s.costs = fixed_numbers<kNumClasses>(record_field(rec, "costs", line), "costs", line);
    const json& cls = record_field(rec, "optimal_class", line);
    if (!cls.is_number_unsigned() || cls.get<std::size_t>() >= kNumClasses) {
      throw ParseError("field 'optimal_class' must be an integer in [0, 6]", line);
    }
    s.optimal_class = cls.get<std::size_t>();
    const json& without = record_field(rec, "without_cost", line);
    if (!without.is_number()) throw ParseError("field 'without_cost' must be a number", line);
    s.without_cost = without.get<double>();
    dataset.push_back(std::move(s));
  }
  return dataset;
}

Dataset read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
  return read_jsonl(in);
}

}  // namespace unrollpilot::data
