// Copyright 2026 The pvlstm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PVLSTM__TRAIN_HPP_
#define PVLSTM__TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvlstm/data.hpp"
#include "pvlstm/kvconfig.hpp"
#include "pvlstm/model.hpp"

namespace pvlstm
{

struct TrainConfig
{
  double lr0 = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch = 128;
  double factor = 0.1;
  std::size_t patience = 10;
  double threshold = 1e-8;
  std::uint64_t seed = 0;
  bool multi_task = false;            // add attribute cross-entropy to the box loss
  bool attr_final_step_only = true;   // score the attribute loss on the last step only
  bool attr_only = false;             // single-task attribute training, no box loss

  bool uses_box_loss() const { return !attr_only; }
  bool uses_attr_loss() const { return multi_task || attr_only; }
  void validate() const;
};

struct LossGrad
{
  double loss = 0.0;
  std::vector<Vector> grads;
};

/// Mean squared error over all 6 * steps components.
LossGrad mse_loss(std::span<const Velocity6> pred, std::span<const Velocity6> target);

struct CrossEntropy
{
  double loss = 0.0;
  Vector grad_logits;  // probs - onehot(label)
};

/// -log(max(probs[label], 1e-12)) for softmax outputs.
CrossEntropy ce_loss(std::span<const double> probs, std::size_t label);

/// Bias-corrected Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState
{
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<std::string> names;
  std::vector<Vector> m;
  std::vector<Vector> v;
  std::uint64_t t = 0;

  static AdamState for_params(std::span<const ParamView> params);
};

/// Applies one update in parameter order. Throws TrainingError on a non-finite gradient.
void adam_step(
  std::span<const ParamView> params, std::span<const ParamView> grads, AdamState & state,
  double lr);

struct SchedulerState
{
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improve = 0;
  double current_lr = 1e-3;

  static SchedulerState initial(const TrainConfig & cfg);
};

/// Reduce-on-plateau with an absolute improvement threshold.
SchedulerState scheduler_step(SchedulerState state, double val_loss, const TrainConfig & cfg);

struct LossParts
{
  double box = 0.0;
  double attr = 0.0;
  double total() const { return box + attr; }
};

/// Velocity targets of a sample: differences over [last observed, future...].
std::vector<Velocity6> target_velocities(const Sample & sample);

/**
 * @brief Loss of one sample under `cfg`; adds gradients into `grads` when given.
 *
 * `scale` multiplies the gradient contribution (1 / batch size in fit()).
 */
LossParts sample_loss(
  const PvLstmModel & model, const Sample & sample, const TrainConfig & cfg,
  PvLstmModel * grads = nullptr, double scale = 1.0);

/// Mean loss over samples, with gradients of that mean when `grads` is given.
LossParts batch_loss(
  const PvLstmModel & model, std::span<const Sample> samples, const TrainConfig & cfg,
  PvLstmModel * grads = nullptr);

struct HistoryRow
{
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double train_box = 0.0;
  double train_attr = 0.0;
  double val_box = 0.0;
  double val_attr = 0.0;
};

/// epoch,train_loss,val_loss,lr,train_box_loss,train_attr_loss,val_box_loss,val_attr_loss
std::string history_csv(std::span<const HistoryRow> history);

struct FitOptions
{
  /// When set, the best-validation checkpoint is written here.
  std::filesystem::path out_dir;
  std::function<void(const HistoryRow &)> on_epoch;
};

struct FitResult
{
  PvLstmModel model;  // parameters at the best validation loss
  std::vector<HistoryRow> history;
  std::filesystem::path checkpoint;
  std::size_t best_epoch = 0;
};

/**
 * @brief Mini-batch training with Adam and the plateau scheduler.
 *
 * Samples are shuffled each epoch from Rng(cfg.seed); gradients are reduced in
 * sample order so identical inputs give bit-identical results. Throws
 * TrainingError with epoch/batch context on a non-finite loss.
 */
FitResult fit(
  PvLstmModel model, std::span<const Sample> train_set, std::span<const Sample> val_set,
  const TrainConfig & cfg, const FitOptions & options = {});

TrainConfig train_config_from(const KvConfig & cfg, TrainConfig base = {});
nlohmann::ordered_json train_config_to_json(const TrainConfig & cfg);

}  // namespace pvlstm

#endif  // PVLSTM__TRAIN_HPP_
