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
 * \file mlp.hpp
 * \brief Fully connected ReLU classifier with softmax output, trained by Adam.
 *
 * Activations are laid out column-major: a batch of B inputs of width d is a
 * d x B matrix, so layer l computes W_l * A + b_l with W_l of shape
 * fan_out x fan_in.
 *
 * Model file (JSON):
 *
 *     {"schema_version":1,"layer_dims":[186,500,400,250,100,7],
 *      "weights":[[[row],[row],...], ...],"biases":[[...], ...]}
 *
 * Doubles are printed in shortest round-trip form, so loading restores every
 * parameter bit for bit.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "unrollpilot/dataset.hpp"
#include "unrollpilot/featurizer.hpp"

namespace unrollpilot::mlp {

inline constexpr int kModelSchemaVersion = 1;

/// 186 inputs, hidden layers of 500, 400, 250 and 100, 7 classes.
const std::vector<std::size_t>& canonical_dims();

struct TrainConfig {
  std::vector<std::size_t> layer_dims = canonical_dims();
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 500;
  std::size_t early_stop_patience = 10;
  double init_range = 0.05;
  std::uint64_t seed = 1;

  /// Throws DomainError when a field is out of range.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<Eigen::MatrixXd> weights;  // fan_out x fan_in
  std::vector<Eigen::VectorXd> biases;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t parameter_count() const;

  bool operator==(const MlpModel& other) const;
};

/// All parameters zero; every input then maps to the uniform distribution.
MlpModel zero_model(const std::vector<std::size_t>& layer_dims);

/// Parameters i.i.d. uniform on [-init_range, init_range], drawn in layer
/// order (weights row by row, then biases) from config.seed.
MlpModel init_model(const TrainConfig& config);

/// Class probabilities for each column of `inputs`. Throws ShapeError.
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd forward(const MlpModel& model, const features::FeatureVector& x);

/// Numerically stable column-wise softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

struct Gradients {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean natural-log cross-entropy over the columns of `inputs` and its exact
/// gradient. Throws ShapeError, DomainError for an empty batch or a label
/// outside the output range, NumericalError for a non-finite loss.
Gradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                             const std::vector<std::size_t>& labels);

/// Mean cross-entropy only (no backward pass).
double mean_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                 const std::vector<std::size_t>& labels);

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;

  explicit AdamState(const MlpModel& model);
};

/// One bias-corrected Adam update. The model and state are left untouched
/// when any updated value would be non-finite (NumericalError).
void adam_step(MlpModel& model, AdamState& state, const Gradients& grads,
               const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool early_stopped = false;

  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  MlpModel model;  // parameters from best_epoch
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam with early stopping on validation loss and restore-best.
/// `val` is only ever evaluated, never differentiated.
TrainResult train(const data::Dataset& train_set, const data::Dataset& val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Features of `samples` as columns.
Eigen::MatrixXd feature_matrix(const data::Dataset& samples);
std::vector<std::size_t> label_vector(const data::Dataset& samples);

struct Prediction {
  std::int64_t factor = 1;
  std::size_t class_index = 0;
  Eigen::VectorXd probabilities;
};

/// Argmax class (ties to the smaller index) and its unrolling factor.
Prediction predict_factor(const MlpModel& model, const features::FeatureVector& x);
Prediction predict_factor(const MlpModel& model, const ir::LoopNest& nest);

/// Fraction of samples whose predicted class equals optimal_class.
double accuracy(const MlpModel& model, const data::Dataset& samples);

nlohmann::json to_json(const MlpModel& model);
/// Throws ParseError for malformed documents and IncompatibleModelError when
/// the dimensions differ from `expected_dims` (when given).
MlpModel model_from_json(const nlohmann::json& doc,
                         const std::optional<std::vector<std::size_t>>& expected_dims =
                             canonical_dims());

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path,
                    const std::optional<std::vector<std::size_t>>& expected_dims =
                        canonical_dims());

}  // namespace unrollpilot::mlp
