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

#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "unrollpilot/codegen_synth.hpp"
#include "unrollpilot/config.hpp"
#include "unrollpilot/dataset.hpp"
#include "unrollpilot/error.hpp"
#include "unrollpilot/eval.hpp"
#include "unrollpilot/featurizer.hpp"
#include "unrollpilot/loop_ir_json.hpp"
#include "unrollpilot/mlp.hpp"

#ifndef UNROLLPILOT_VERSION
#define UNROLLPILOT_VERSION "0.0.0"
#endif

namespace unrollpilot::cli {

namespace {

using nlohmann::json;

// Thrown for argument combinations CLI11 cannot express; maps to kUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string version_text() {
  std::ostringstream s;
  s << "unrollpilot " << UNROLLPILOT_VERSION << " (dataset schema " << data::kSchemaVersion
    << ", model schema " << mlp::kModelSchemaVersion << ", report schema "
    << eval::kReportSchemaVersion << ", " << features::kFeatureCount << " features)";
  return s.str();
}

data::SplitRatios parse_split(const std::string& text) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    double v = 0.0;
    const char* first = text.data() + pos;
    const char* last = text.data() + comma;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw UsageError("--split expects three comma-separated numbers, got '" + text + "'");
    }
    parts.push_back(v);
    pos = comma + 1;
  }
  if (parts.size() != 3) {
    throw UsageError("--split expects three comma-separated numbers, got '" + text + "'");
  }
  return {parts[0], parts[1], parts[2]};
}

std::string require_path(const std::string& flag_value, const std::string& config_value,
                         const char* flag) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  throw UsageError(std::string(flag) + " is required (or set it in the config paths)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

void print_confusion(std::ostream& out, const eval::ConfusionMatrix& m) {
  out << "confusion (rows: optimal factor, columns: predicted factor)\n      ";
  for (std::int64_t f : data::kFactors) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%7ld", static_cast<long>(f));
    out << buf;
  }
  out << '\n';
  for (std::size_t r = 0; r < data::kNumClasses; ++r) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6ld", static_cast<long>(data::kFactors[r]));
    out << buf;
    for (std::size_t c = 0; c < data::kNumClasses; ++c) {
      std::snprintf(buf, sizeof buf, "%7zu", m[r][c]);
      out << buf;
    }
    out << '\n';
  }
}

struct Options {
  std::string config_path;
  std::size_t jobs = 1;

  std::size_t count = 0;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string data_path;
  std::string model_path;
  std::string nest_path;
  std::string report_path;
  std::string csv_path;
  std::optional<std::string> split;
  std::optional<std::size_t> max_epochs;
  bool quiet = false;
};

CliConfig effective_config(const Options& o) {
  CliConfig config = o.config_path.empty() ? CliConfig{} : load_config(o.config_path);
  if (o.max_epochs) config.train_config.max_epochs = *o.max_epochs;
  config.validate();
  return config;
}

int run_generate(const Options& o, std::ostream& out, std::ostream& err) {
  const CliConfig config = effective_config(o);
  const std::string path = require_path(o.out_path, config.paths.data, "--out");
  const data::BuildResult result = data::build_dataset(o.count, o.seed.value_or(0),
                                                       config.gen_params, config.cost_model,
                                                       o.jobs);
  for (const data::Discard& d : result.discarded) {
    err << "discarded seed " << d.seed << ": " << d.reason << '\n';
  }
  data::write_jsonl(result.samples, std::filesystem::path(path));
  const auto hist = data::class_histogram(result.samples);
  out << "wrote " << result.samples.size() << " samples to " << path << " ("
      << result.discarded.size() << " seeds discarded)\n";
  out << "optimal factor histogram:";
  for (std::size_t c = 0; c < data::kNumClasses; ++c) {
    out << ' ' << data::kFactors[c] << ':' << hist[c];
  }
  out << '\n';
  return kOk;
}

int run_nest(const Options& o, std::ostream& out) {
  const CliConfig config = effective_config(o);
  const ir::LoopNest nest = synth::generate_nest(o.seed.value_or(0), config.gen_params);
  const std::string text = ir::to_json(nest).dump(2) + "\n";
  if (o.out_path.empty()) {
    out << text;
  } else {
    write_text(o.out_path, text);
  }
  return kOk;
}

int run_train(const Options& o, std::ostream& out, std::ostream& err) {
  CliConfig config = effective_config(o);
  if (o.seed) config.train_config.seed = *o.seed;
  const std::string data_path = require_path(o.data_path, config.paths.data, "--data");
  const std::string model_path = require_path(o.out_path, config.paths.model, "--out");
  const data::SplitRatios ratios = parse_split(o.split.value_or("0.8,0.1,0.1"));

  const data::Dataset dataset = data::read_jsonl(std::filesystem::path(data_path));
  const data::Split split = data::split_dataset(dataset, ratios, config.train_config.seed);
  err << "train " << split.train.size() << ", validation " << split.val.size() << ", test "
      << split.test.size() << " samples\n";

  mlp::EpochCallback progress;
  if (!o.quiet) {
    progress = [&err](const mlp::EpochRecord& r) {
      err << "epoch " << r.epoch << "  train_loss " << fixed(r.train_loss, 6) << "  val_loss "
          << fixed(r.val_loss, 6) << "  val_acc " << fixed(r.val_accuracy) << '\n';
    };
  }
  const mlp::TrainResult result = mlp::train(split.train, split.val, config.train_config, progress);
  mlp::save_model(result.model, model_path);

  const double test_acc = mlp::accuracy(result.model, split.test);
  out << "best epoch " << result.history.best_epoch << " of " << result.history.epochs.size()
      << (result.history.early_stopped ? " (early stop)" : "") << '\n';
  out << "held-out accuracy " << fixed(test_acc) << " (" << split.test.size()
      << " samples), random baseline " << fixed(eval::kRandomBaseline) << '\n';
  out << "model written to " << model_path << '\n';
  return kOk;
}

int run_predict(const Options& o, std::ostream& out) {
  const CliConfig config = effective_config(o);
  const std::string model_path = require_path(o.model_path, config.paths.model, "--model");
  const mlp::MlpModel model = mlp::load_model(model_path);
  const ir::LoopNest nest = ir::read_nest_file(o.nest_path);
  const mlp::Prediction p = mlp::predict_factor(model, nest);
  json probs = json::object();
  for (std::size_t c = 0; c < data::kNumClasses; ++c) {
    probs[std::to_string(data::kFactors[c])] = p.probabilities(static_cast<Eigen::Index>(c));
  }
  out << json{{"nest_id", nest.id}, {"factor", p.factor}, {"probabilities", probs}}.dump(2)
      << '\n';
  return kOk;
}

int run_eval(const Options& o, std::ostream& out, std::ostream& err) {
  CliConfig config = effective_config(o);
  if (o.seed) config.train_config.seed = *o.seed;
  const std::string data_path = require_path(o.data_path, config.paths.data, "--data");
  const std::string model_path = require_path(o.model_path, config.paths.model, "--model");
  const mlp::MlpModel model = mlp::load_model(model_path);
  data::Dataset samples = data::read_jsonl(std::filesystem::path(data_path));
  if (o.split) {
    // Same ratios and seed as `train` select the same held-out partition.
    samples = data::split_dataset(samples, parse_split(*o.split), config.train_config.seed).test;
    err << "evaluating the held-out partition (" << samples.size() << " samples)\n";
  }
  const eval::AccuracyReport model_report =
      eval::evaluate_accuracy(eval::model_predictor(model), samples);
  const eval::AccuracyReport random_report =
      eval::evaluate_accuracy(eval::uniform_random_predictor(config.train_config.seed), samples);

  out << "samples " << model_report.sample_count << '\n';
  out << "accuracy " << fixed(model_report.accuracy) << '\n';
  out << "random baseline " << fixed(model_report.random_baseline) << " (uniform predictor measured "
      << fixed(random_report.accuracy) << ")\n";
  print_confusion(out, model_report.confusion);

  if (!o.report_path.empty()) {
    json doc = {{"samples", model_report.sample_count},
                {"accuracy", model_report.accuracy},
                {"random_baseline", model_report.random_baseline},
                {"random_predictor_accuracy", random_report.accuracy},
                {"confusion", model_report.confusion}};
    write_text(o.report_path, doc.dump(2) + "\n");
  }
  return kOk;
}

int run_bench(const Options& o, std::ostream& out, std::ostream& err) {
  const CliConfig config = effective_config(o);
  const std::string model_path = require_path(o.model_path, config.paths.model, "--model");
  const std::string report_path = require_path(o.report_path, config.paths.reports, "--report");
  std::string csv_path = o.csv_path;
  if (csv_path.empty()) {
    csv_path = std::filesystem::path(report_path).replace_extension(".csv").string();
    if (csv_path == report_path) csv_path += ".csv";
  }
  const mlp::MlpModel model = mlp::load_model(model_path);
  const eval::EvalReport report =
      eval::run_benchmarks(eval::benchmark_suite(), eval::model_predictor(model), config.cost_model);

  write_text(report_path, eval::to_json(report).dump(2) + "\n");
  std::ostringstream csv;
  eval::write_csv(report, csv);
  write_text(csv_path, csv.str());

  out << "benchmark      variant        predicted  optimal  PC      SP\n";
  for (const eval::CaseResult& r : report.cases) {
    char line[160];
    if (r.error) {
      err << r.benchmark << '/' << r.variant << ": " << *r.error << '\n';
      std::snprintf(line, sizeof line, "%-14s %-14s error\n", r.benchmark.c_str(),
                    r.variant.c_str());
    } else {
      std::snprintf(line, sizeof line, "%-14s %-14s %9ld  %7ld  %.4f  %.4f\n", r.benchmark.c_str(),
                    r.variant.c_str(), static_cast<long>(r.predicted_factor),
                    static_cast<long>(r.optimal_factor), r.pc, r.sp);
    }
    out << line;
  }
  out << "accuracy " << fixed(report.accuracy) << ", mean PC " << fixed(report.mean_pc)
      << ", mean SP " << fixed(report.mean_sp) << '\n';
  out << "report written to " << report_path << " and " << csv_path << '\n';
  return report.evaluated == report.cases.size() ? kOk : kDataError;
}

int run_schema(std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["dimension"] = features::kFeatureCount;
  doc["features"] = nlohmann::ordered_json::array();
  for (const features::FeatureDescriptor& d : features::feature_schema()) {
    doc["features"].push_back(
        {{"index", d.index}, {"name", d.name}, {"transform", features::to_string(d.transform)}});
  }
  out << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loop unrolling factor prediction: generate, label, train, evaluate.",
               "unrollpilot"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);

  Options o;
  app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--jobs", o.jobs, "Worker threads for labeling")
      ->check(CLI::PositiveNumber);

  CLI::App* generate = app.add_subcommand("generate", "Generate and label a dataset");
  generate->fallthrough();
  generate->add_option("--count", o.count, "Number of samples")->required();
  generate->add_option("--seed", o.seed, "First generator seed (default 0)");
  generate->add_option("--out", o.out_path, "Output JSONL file");

  CLI::App* nest = app.add_subcommand("nest", "Print the loop nest generated for one seed");
  nest->fallthrough();
  nest->add_option("--seed", o.seed, "Generator seed")->required();
  nest->add_option("--out", o.out_path, "Write to a file instead of stdout");

  CLI::App* train = app.add_subcommand("train", "Train the classifier");
  train->fallthrough();
  train->add_option("--data", o.data_path, "Labeled JSONL dataset");
  train->add_option("--split", o.split, "train,validation,test ratios (default 0.8,0.1,0.1)");
  train->add_option("--out", o.out_path, "Model output file");
  train->add_option("--seed", o.seed, "Split and training seed (overrides the config)");
  train->add_option("--max-epochs", o.max_epochs, "Override train_config.max_epochs")
      ->check(CLI::PositiveNumber);
  train->add_flag("--quiet", o.quiet, "No per-epoch progress");

  CLI::App* predict = app.add_subcommand("predict", "Predict the unrolling factor of a nest");
  predict->fallthrough();
  predict->add_option("--model", o.model_path, "Model file");
  predict->add_option("--nest", o.nest_path, "Loop nest JSON file")->required();

  CLI::App* evaluate = app.add_subcommand("eval", "Accuracy of a model on a dataset");
  evaluate->fallthrough();
  evaluate->add_option("--model", o.model_path, "Model file");
  evaluate->add_option("--data", o.data_path, "Labeled JSONL dataset");
  evaluate->add_option("--split", o.split,
                       "Evaluate only the test partition of this split (as used by train)");
  evaluate->add_option("--seed", o.seed, "Split seed (overrides the config)");
  evaluate->add_option("--report", o.report_path, "Also write a JSON report");

  CLI::App* bench = app.add_subcommand("bench", "Run the benchmark suite");
  bench->fallthrough();
  bench->add_option("--model", o.model_path, "Model file");
  bench->add_option("--report", o.report_path, "JSON report path");
  bench->add_option("--csv", o.csv_path, "CSV path (default: report path with .csv)");

  CLI::App* schema = app.add_subcommand("schema", "List the feature vector layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kUsage;
  }

  try {
    if (generate->parsed()) return run_generate(o, out, err);
    if (nest->parsed()) return run_nest(o, out);
    if (train->parsed()) return run_train(o, out, err);
    if (predict->parsed()) return run_predict(o, out);
    if (evaluate->parsed()) return run_eval(o, out, err);
    if (bench->parsed()) return run_bench(o, out, err);
    if (schema->parsed()) return run_schema(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: invalid loop nest\n";
    for (const std::string& v : e.violations()) err << "  " << v << '\n';
    return kDataError;
  } catch (const ParseError& e) {
    err << "error: " << e.what();
    if (e.line()) err << " (line " << *e.line() << ')';
    err << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace unrollpilot::cli
