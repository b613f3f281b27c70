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

#include "unrollpilot/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "unrollpilot/error.hpp"
#include "unrollpilot/random.hpp"

namespace unrollpilot::mlp {

using nlohmann::json;

const std::vector<std::size_t>& canonical_dims() {
  static const std::vector<std::size_t> dims = {features::kFeatureCount, 500, 400, 250, 100,
                                                data::kNumClasses};
  return dims;
}

void TrainConfig::validate() const {
  if (layer_dims.size() < 2) throw DomainError("layer_dims needs at least two entries");
  for (std::size_t d : layer_dims) {
    if (d == 0) throw DomainError("layer_dims entries must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("learning_rate must be positive");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) throw DomainError("adam_beta1 must be in (0, 1)");
  if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) throw DomainError("adam_beta2 must be in (0, 1)");
  if (!(adam_epsilon > 0.0)) throw DomainError("adam_epsilon must be positive");
  if (batch_size == 0) throw DomainError("batch_size must be positive");
  if (max_epochs == 0) throw DomainError("max_epochs must be positive");
  if (early_stop_patience == 0) throw DomainError("early_stop_patience must be at least 1");
  if (!(init_range >= 0.0) || !std::isfinite(init_range)) {
    throw DomainError("init_range must be non-negative");
  }
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool MlpModel::operator==(const MlpModel& other) const {
  if (layer_dims != other.layer_dims || weights.size() != other.weights.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols() ||
        biases[l].size() != other.biases[l].size()) {
      return false;
    }
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

MlpModel zero_model(const std::vector<std::size_t>& layer_dims) {
  if (layer_dims.size() < 2) throw DomainError("layer_dims needs at least two entries");
  MlpModel model;
  model.layer_dims = layer_dims;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(layer_dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(layer_dims[l + 1]);
    model.weights.push_back(Eigen::MatrixXd::Zero(fan_out, fan_in));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

MlpModel init_model(const TrainConfig& config) {
  config.validate();
  MlpModel model = zero_model(config.layer_dims);
  Rng rng = Rng::derived(config.seed, 0);
  const double r = config.init_range;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Eigen::MatrixXd& w = model.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-r, r);
    }
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) model.biases[l](i) = rng.uniform(-r, r);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace {

void check_input(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (model.num_layers() == 0) throw ShapeError("model has no layers");
  if (static_cast<std::size_t>(inputs.rows()) != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(inputs.rows()) + " features, model expects " +
                     std::to_string(model.input_dim()));
  }
}

// Pre-activations of every layer for a batch; the last entry holds logits.
std::vector<Eigen::MatrixXd> forward_pre(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  std::vector<Eigen::MatrixXd> z(model.num_layers());
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    if (l == 0) {
      z[l] = model.weights[l] * inputs;
    } else {
      z[l] = model.weights[l] * z[l - 1].cwiseMax(0.0);
    }
    z[l].colwise() += model.biases[l];
  }
  return z;
}

// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const Eigen::VectorXd shifted = logits.col(c).array() - m;
    out.col(c) = shifted.array() - std::log(shifted.array().exp().sum());
  }
  return out;
}

void check_labels(const MlpModel& model, const Eigen::MatrixXd& inputs,
                  const std::vector<std::size_t>& labels) {
  check_input(model, inputs);
  if (inputs.cols() == 0) throw DomainError("empty batch");
  if (labels.size() != static_cast<std::size_t>(inputs.cols())) {
    throw ShapeError("batch has " + std::to_string(inputs.cols()) + " inputs but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (std::size_t y : labels) {
    if (y >= model.output_dim()) throw DomainError("label " + std::to_string(y) + " out of range");
  }
}

double mean_nll(const Eigen::MatrixXd& log_probs, const std::vector<std::size_t>& labels) {
  double sum = 0.0;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    sum -= log_probs(static_cast<Eigen::Index>(labels[c]), static_cast<Eigen::Index>(c));
  }
  const double loss = sum / static_cast<double>(labels.size());
  if (!std::isfinite(loss)) throw NumericalError("non-finite loss");
  return loss;
}

}  // namespace

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  return log_softmax(logits).array().exp();
}

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  check_input(model, inputs);
  return softmax(forward_pre(model, inputs).back());
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x) {
  return forward_batch(model, x);
}

Eigen::VectorXd forward(const MlpModel& model, const features::FeatureVector& x) {
  return forward(model, Eigen::Map<const Eigen::VectorXd>(x.data(), features::kFeatureCount));
}

double mean_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                 const std::vector<std::size_t>& labels) {
  check_labels(model, inputs, labels);
  return mean_nll(log_softmax(forward_pre(model, inputs).back()), labels);
}

Gradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                             const std::vector<std::size_t>& labels) {
  check_labels(model, inputs, labels);
  const std::vector<Eigen::MatrixXd> z = forward_pre(model, inputs);
  const Eigen::MatrixXd log_probs = log_softmax(z.back());

  Gradients g;
  g.loss = mean_nll(log_probs, labels);
  const std::size_t layers = model.num_layers();
  g.weights.resize(layers);
  g.biases.resize(layers);

  const double inv_batch = 1.0 / static_cast<double>(labels.size());
  Eigen::MatrixXd delta = log_probs.array().exp();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    delta(static_cast<Eigen::Index>(labels[c]), static_cast<Eigen::Index>(c)) -= 1.0;
  }
  delta *= inv_batch;

  for (std::size_t l = layers; l-- > 0;) {
    if (l == 0) {
      g.weights[l] = delta * inputs.transpose();
    } else {
      g.weights[l] = delta * z[l - 1].cwiseMax(0.0).transpose();
    }
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = model.weights[l].transpose() * delta;
      // ReLU'(0) is taken as 0.
      delta = (z[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

AdamState::AdamState(const MlpModel& model) {
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    m_weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    v_weights.push_back(m_weights.back());
    m_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    v_biases.push_back(m_biases.back());
  }
}

namespace {

template <typename T>
struct AdamUpdate {
  T m, v, theta;
};

template <typename T>
AdamUpdate<T> adam_update(const T& theta, const T& m, const T& v, const T& g,
                          const TrainConfig& cfg, double bc1, double bc2) {
  AdamUpdate<T> u;
  u.m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
  u.v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
  u.theta = theta.array() - cfg.learning_rate * (u.m.array() / bc1) /
                                ((u.v.array() / bc2).sqrt() + cfg.adam_epsilon);
  return u;
}

}  // namespace

void adam_step(MlpModel& model, AdamState& state, const Gradients& grads,
               const TrainConfig& config) {
  const std::size_t layers = model.num_layers();
  if (grads.weights.size() != layers || grads.biases.size() != layers ||
      state.m_weights.size() != layers) {
    throw ShapeError("gradient or optimizer state does not match the model");
  }
  const std::uint64_t t = state.step + 1;
  const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(t));

  std::vector<AdamUpdate<Eigen::MatrixXd>> w(layers);
  std::vector<AdamUpdate<Eigen::VectorXd>> b(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    if (grads.weights[l].rows() != model.weights[l].rows() ||
        grads.weights[l].cols() != model.weights[l].cols() ||
        grads.biases[l].size() != model.biases[l].size()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(l));
    }
    w[l] = adam_update(model.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l],
                       config, bc1, bc2);
    b[l] = adam_update(model.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l],
                       config, bc1, bc2);
    if (!w[l].theta.allFinite() || !b[l].theta.allFinite() || !w[l].v.allFinite() ||
        !b[l].v.allFinite()) {
      throw NumericalError("non-finite Adam update at layer " + std::to_string(l) + ", step " +
                           std::to_string(t));
    }
  }
  for (std::size_t l = 0; l < layers; ++l) {
    model.weights[l] = std::move(w[l].theta);
    state.m_weights[l] = std::move(w[l].m);
    state.v_weights[l] = std::move(w[l].v);
    model.biases[l] = std::move(b[l].theta);
    state.m_biases[l] = std::move(b[l].m);
    state.v_biases[l] = std::move(b[l].v);
  }
  state.step = t;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

Eigen::MatrixXd feature_matrix(const data::Dataset& samples) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features::kFeatureCount),
                    static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(samples[i].features.data(), features::kFeatureCount);
  }
  return x;
}

std::vector<std::size_t> label_vector(const data::Dataset& samples) {
  std::vector<std::size_t> y;
  y.reserve(samples.size());
  for (const data::LabeledSample& s : samples) y.push_back(s.optimal_class);
  return y;
}

namespace {

std::size_t argmax(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

struct Evaluation {
  double loss;
  double accuracy;
};

Evaluation evaluate(const MlpModel& model, const Eigen::MatrixXd& x,
                    const std::vector<std::size_t>& y) {
  const Eigen::MatrixXd log_probs = log_softmax(forward_pre(model, x).back());
  std::size_t correct = 0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (argmax(log_probs.col(static_cast<Eigen::Index>(c))) == y[c]) ++correct;
  }
  return {mean_nll(log_probs, y), static_cast<double>(correct) / static_cast<double>(y.size())};
}

}  // namespace

TrainResult train(const data::Dataset& train_set, const data::Dataset& val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty() || val_set.empty()) {
    throw DomainError("training and validation sets must be non-empty");
  }
  if (config.layer_dims.front() != features::kFeatureCount ||
      config.layer_dims.back() != data::kNumClasses) {
    throw ShapeError("layer_dims must start at " + std::to_string(features::kFeatureCount) +
                     " and end at " + std::to_string(data::kNumClasses));
  }

  const Eigen::MatrixXd x_train = feature_matrix(train_set);
  const std::vector<std::size_t> y_train = label_vector(train_set);
  const Eigen::MatrixXd x_val = feature_matrix(val_set);
  const std::vector<std::size_t> y_val = label_vector(val_set);

  TrainResult result{init_model(config), {}};
  MlpModel model = result.model;
  AdamState adam(model);
  Rng order_rng = Rng::derived(config.seed, 1);
  std::vector<Eigen::Index> order(train_set.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<std::size_t> y(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) y[k] = y_train[static_cast<std::size_t>(idx[k])];
      try {
        const Gradients g = loss_and_gradients(model, x_train(Eigen::all, idx), y);
        adam_step(model, adam, g, config);
        loss_sum += g.loss * static_cast<double>(idx.size());
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + ": " + e.what());
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    const Evaluation val = evaluate(model, x_val, y_val);
    record.val_loss = val.loss;
    record.val_accuracy = val.accuracy;
    result.history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_loss < best_val) {
      best_val = record.val_loss;
      result.history.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      result.history.early_stopped = true;
      break;
    }
  }
  return result;
}

Prediction predict_factor(const MlpModel& model, const features::FeatureVector& x) {
  Prediction p;
  p.probabilities = forward(model, x);
  p.class_index = argmax(p.probabilities);
  if (p.class_index >= data::kNumClasses) throw ShapeError("model has more outputs than classes");
  p.factor = data::kFactors[p.class_index];
  return p;
}

Prediction predict_factor(const MlpModel& model, const ir::LoopNest& nest) {
  return predict_factor(model, features::extract_features(nest));
}

double accuracy(const MlpModel& model, const data::Dataset& samples) {
  if (samples.empty()) throw DomainError("accuracy of an empty dataset");
  return evaluate(model, feature_matrix(samples), label_vector(samples)).accuracy;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json to_json(const MlpModel& model) {
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const Eigen::MatrixXd& w = model.weights[l];
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < w.cols(); ++j) row.push_back(w(i, j));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    biases.push_back(std::vector<double>(model.biases[l].data(),
                                         model.biases[l].data() + model.biases[l].size()));
  }
  return {{"schema_version", kModelSchemaVersion},
          {"layer_dims", model.layer_dims},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)}};
}

namespace {

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where + ": non-finite parameter");
  return d;
}

const json& array_of(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  if (v.size() != n) {
    throw ParseError(where + ": expected " + std::to_string(n) + " entries, found " +
                     std::to_string(v.size()));
  }
  return v;
}

}  // namespace

MlpModel model_from_json(const json& doc,
                         const std::optional<std::vector<std::size_t>>& expected_dims) {
  if (!doc.is_object()) throw ParseError("model: expected an object");
  for (const char* key : {"schema_version", "layer_dims", "weights", "biases"}) {
    if (!doc.contains(key)) throw ParseError(std::string("model: missing '") + key + "'");
  }
  if (doc["schema_version"] != kModelSchemaVersion) {
    throw IncompatibleModelError("model schema_version " + doc["schema_version"].dump() +
                                 ", expected " + std::to_string(kModelSchemaVersion));
  }
  const json& dims_json = doc["layer_dims"];
  if (!dims_json.is_array() || dims_json.size() < 2) {
    throw ParseError("layer_dims: expected an array of at least two sizes");
  }
  std::vector<std::size_t> dims;
  for (const json& d : dims_json) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      throw ParseError("layer_dims: entries must be positive integers");
    }
    dims.push_back(d.get<std::size_t>());
  }
  if (expected_dims && dims != *expected_dims) {
    throw IncompatibleModelError("model layer_dims " + dims_json.dump() + " do not match " +
                                 json(*expected_dims).dump());
  }

  MlpModel model = zero_model(dims);
  const json& weights = array_of(doc["weights"], model.num_layers(), "weights");
  const json& biases = array_of(doc["biases"], model.num_layers(), "biases");
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Eigen::MatrixXd& w = model.weights[l];
    const std::string wl = "weights[" + std::to_string(l) + "]";
    const json& rows = array_of(weights[l], static_cast<std::size_t>(w.rows()), wl);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const std::string wi = wl + "[" + std::to_string(i) + "]";
      const json& row = array_of(rows[static_cast<std::size_t>(i)],
                                 static_cast<std::size_t>(w.cols()), wi);
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = finite_number(row[static_cast<std::size_t>(j)], wi);
      }
    }
    const std::string bl = "biases[" + std::to_string(l) + "]";
    const json& bias = array_of(biases[l], static_cast<std::size_t>(model.biases[l].size()), bl);
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) {
      model.biases[l](i) = finite_number(bias[static_cast<std::size_t>(i)], bl);
    }
  }
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model '" + path.string() + "'");
  out << to_json(model).dump() << '\n';
  if (!out) throw Error("failed writing model '" + path.string() + "'");
}

MlpModel load_model(const std::filesystem::path& path,
                    const std::optional<std::vector<std::size_t>>& expected_dims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("model '" + path.string() + "': " + e.what());
  }
  return model_from_json(doc, expected_dims);
}

}  // namespace unrollpilot::mlp
