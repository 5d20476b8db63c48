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

#include "pvlstm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pvlstm/checkpoint.hpp"
#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"

namespace pvlstm
{

namespace
{

constexpr double kProbFloor = 1e-12;

LossParts indexed_batch_loss(
  const PvLstmModel & model, std::span<const Sample> samples, std::span<const std::size_t> index,
  const TrainConfig & cfg, PvLstmModel * grads)
{
  LossParts sum;
  const double scale = 1.0 / static_cast<double>(index.size());
  for (const std::size_t i : index) {
    const LossParts part = sample_loss(model, samples[i], cfg, grads, scale);
    sum.box += part.box;
    sum.attr += part.attr;
  }
  return {sum.box * scale, sum.attr * scale};
}

void check_samples(const PvLstmModel & model, std::span<const Sample> samples, const char * which)
{
  for (const Sample & s : samples) {
    if (s.obs.size() != model.config.t_obs || s.future.size() != model.config.t_pred) {
      throw ArgumentError(fmt::format(
        "{} sample {}/{}@{} has {}+{} boxes, model expects {}+{}", which, s.id.scene_id,
        s.id.ped_id, s.id.start_frame, s.obs.size(), s.future.size(), model.config.t_obs,
        model.config.t_pred));
    }
  }
}

}  // namespace

void TrainConfig::validate() const
{
  if (!(lr0 > 0.0)) {
    throw ConfigError("lr0 must be positive");
  }
  if (!(factor > 0.0 && factor < 1.0)) {
    throw ConfigError("factor must lie in (0, 1)");
  }
  if (batch < 1) {
    throw ConfigError("batch must be at least 1");
  }
  if (!(threshold >= 0.0)) {
    throw ConfigError("threshold must be non-negative");
  }
}

LossGrad mse_loss(std::span<const Velocity6> pred, std::span<const Velocity6> target)
{
  if (pred.empty() || pred.size() != target.size()) {
    throw ArgumentError(fmt::format(
      "mse_loss: need equal non-zero lengths, got {} and {}", pred.size(), target.size()));
  }
  const double n = static_cast<double>(kBoxDim * pred.size());
  LossGrad out;
  out.grads.reserve(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const auto p = pred[k].as_array();
    const auto t = target[k].as_array();
    Vector g(kBoxDim);
    for (std::size_t c = 0; c < kBoxDim; ++c) {
      const double diff = p[c] - t[c];
      out.loss += diff * diff;
      g[c] = 2.0 * diff / n;
    }
    out.grads.push_back(std::move(g));
  }
  out.loss /= n;
  return out;
}

CrossEntropy ce_loss(std::span<const double> probs, std::size_t label)
{
  if (label >= probs.size()) {
    throw ArgumentError(
      fmt::format("ce_loss: label {} out of range for {} classes", label, probs.size()));
  }
  CrossEntropy out;
  out.loss = -std::log(std::max(probs[label], kProbFloor));
  out.grad_logits.assign(probs.begin(), probs.end());
  out.grad_logits[label] -= 1.0;
  return out;
}

AdamState AdamState::for_params(std::span<const ParamView> params)
{
  AdamState s;
  for (const ParamView & p : params) {
    s.names.push_back(p.name);
    s.m.emplace_back(p.values.size(), 0.0);
    s.v.emplace_back(p.values.size(), 0.0);
  }
  return s;
}

void adam_step(
  std::span<const ParamView> params, std::span<const ParamView> grads, AdamState & state,
  double lr)
{
  if (!(lr > 0.0)) {
    throw ArgumentError("adam_step: learning rate must be positive");
  }
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: parameter, gradient and state lists differ in length");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].values.size() != grads[p].values.size() ||
        params[p].values.size() != state.m[p].size() || params[p].name != state.names[p]) {
      throw ShapeError("adam_step: shape mismatch at " + params[p].name);
    }
    for (const double g : grads[p].values) {
      if (!std::isfinite(g)) {
        throw TrainingError("adam_step: non-finite gradient in " + params[p].name);
      }
    }
  }

  ++state.t;
  const double bc1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::span<double> w = params[p].values;
    const std::span<const double> g = grads[p].values;
    Vector & m = state.m[p];
    Vector & v = state.v[p];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = AdamState::kBeta1 * m[k] + (1.0 - AdamState::kBeta1) * g[k];
      v[k] = AdamState::kBeta2 * v[k] + (1.0 - AdamState::kBeta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      w[k] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEps);
    }
  }
}

SchedulerState SchedulerState::initial(const TrainConfig & cfg)
{
  SchedulerState s;
  s.current_lr = cfg.lr0;
  return s;
}

SchedulerState scheduler_step(SchedulerState state, double val_loss, const TrainConfig & cfg)
{
  if (val_loss < state.best_val - cfg.threshold) {
    state.best_val = val_loss;
    state.epochs_since_improve = 0;
    return state;
  }
  ++state.epochs_since_improve;
  if (state.epochs_since_improve > cfg.patience) {
    state.current_lr *= cfg.factor;
    state.epochs_since_improve = 0;
  }
  return state;
}

std::vector<Velocity6> target_velocities(const Sample & sample)
{
  if (sample.obs.empty()) {
    throw ArgumentError("target_velocities: sample has no observed boxes");
  }
  std::vector<BBox3d> seq;
  seq.reserve(sample.future.size() + 1);
  seq.push_back(sample.obs.back());
  seq.insert(seq.end(), sample.future.begin(), sample.future.end());
  return to_velocities(seq);
}

LossParts sample_loss(
  const PvLstmModel & model, const Sample & sample, const TrainConfig & cfg, PvLstmModel * grads,
  double scale)
{
  const ForwardTape tape = forward(model, sample.obs);
  const std::size_t steps = tape.velocities.size();
  LossParts parts;
  std::vector<Vector> d_vel;
  std::vector<Vector> d_logits;

  if (cfg.uses_box_loss()) {
    std::vector<Velocity6> pred;
    pred.reserve(steps);
    for (const Vector & v : tape.velocities) {
      pred.push_back(Velocity6::from(v));
    }
    LossGrad mse = mse_loss(pred, target_velocities(sample));
    parts.box = mse.loss;
    d_vel = std::move(mse.grads);
  }

  if (cfg.uses_attr_loss()) {
    if (!model.dec_a) {
      throw ConfigError("attribute loss requested but the model has no attribute decoder");
    }
    if (!sample.attr_labels || sample.attr_labels->size() != steps) {
      throw ArgumentError(fmt::format(
        "sample {}/{}@{} lacks attribute labels for all {} predicted steps", sample.id.scene_id,
        sample.id.ped_id, sample.id.start_frame, steps));
    }
    const std::size_t classes = model.config.n_attr_classes;
    d_logits.assign(steps, Vector(classes, 0.0));
    const std::size_t first = cfg.attr_final_step_only ? steps - 1 : 0;
    const double weight = 1.0 / static_cast<double>(steps - first);
    for (std::size_t k = first; k < steps; ++k) {
      CrossEntropy ce = ce_loss(tape.attr_probs[k], (*sample.attr_labels)[k]);
      parts.attr += weight * ce.loss;
      for (std::size_t c = 0; c < classes; ++c) {
        d_logits[k][c] = weight * ce.grad_logits[c];
      }
    }
  }

  if (grads != nullptr) {
    for (auto & g : d_vel) {
      for (double & x : g) {
        x *= scale;
      }
    }
    for (auto & g : d_logits) {
      for (double & x : g) {
        x *= scale;
      }
    }
    backward(model, tape, d_vel, d_logits, *grads);
  }
  return parts;
}

LossParts batch_loss(
  const PvLstmModel & model, std::span<const Sample> samples, const TrainConfig & cfg,
  PvLstmModel * grads)
{
  if (samples.empty()) {
    throw ArgumentError("batch_loss: empty batch");
  }
  std::vector<std::size_t> index(samples.size());
  std::iota(index.begin(), index.end(), 0);
  return indexed_batch_loss(model, samples, index, cfg, grads);
}

std::string history_csv(std::span<const HistoryRow> history)
{
  std::string out =
    "epoch,train_loss,val_loss,lr,train_box_loss,train_attr_loss,val_box_loss,val_attr_loss\n";
  for (const HistoryRow & r : history) {
    out += fmt::format(
      "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.epoch, r.train_loss,
      r.val_loss, r.lr, r.train_box, r.train_attr, r.val_box, r.val_attr);
  }
  return out;
}

FitResult fit(
  PvLstmModel model, std::span<const Sample> train_set, std::span<const Sample> val_set,
  const TrainConfig & cfg, const FitOptions & options)
{
  cfg.validate();
  if (train_set.empty() || val_set.empty()) {
    throw ArgumentError("fit: training and validation sets must be non-empty");
  }
  check_samples(model, train_set, "training");
  check_samples(model, val_set, "validation");
  if (cfg.uses_attr_loss() && !model.dec_a) {
    throw ConfigError("fit: attribute loss requested but the model has no attribute decoder");
  }

  FitResult result{model, {}, {}, 0};
  if (cfg.epochs == 0) {
    return result;
  }

  Rng rng(cfg.seed);
  AdamState adam = AdamState::for_params(model.params());
  SchedulerState sched = SchedulerState::initial(cfg);
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    const double lr = sched.current_lr;
    LossParts epoch_sum;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch, ++batch_no) {
      const std::size_t len = std::min(cfg.batch, order.size() - start);
      const std::span<const std::size_t> index(order.data() + start, len);
      PvLstmModel grads = PvLstmModel::zeros(model.config);
      const LossParts loss = indexed_batch_loss(model, train_set, index, cfg, &grads);
      if (!std::isfinite(loss.total())) {
        throw TrainingError(fmt::format(
          "non-finite training loss at epoch {}, batch {} (box {}, attr {})", epoch, batch_no,
          loss.box, loss.attr));
      }
      try {
        adam_step(model.params(), grads.params(), adam, lr);
      } catch (const TrainingError & e) {
        throw TrainingError(fmt::format("epoch {}, batch {}: {}", epoch, batch_no, e.what()));
      }
      epoch_sum.box += loss.box * static_cast<double>(len);
      epoch_sum.attr += loss.attr * static_cast<double>(len);
    }

    const LossParts val = batch_loss(model, val_set, cfg);
    if (!std::isfinite(val.total())) {
      throw TrainingError(fmt::format("non-finite validation loss at epoch {}", epoch));
    }
    const double n = static_cast<double>(train_set.size());
    HistoryRow row{
      epoch,   (epoch_sum.box + epoch_sum.attr) / n, val.total(), lr, epoch_sum.box / n,
      epoch_sum.attr / n, val.box, val.attr};
    result.history.push_back(row);

    if (val.total() < best_val) {
      best_val = val.total();
      result.model = model;
      result.best_epoch = epoch;
      if (!options.out_dir.empty()) {
        nlohmann::ordered_json meta;
        meta["epoch"] = epoch;
        meta["train_loss"] = row.train_loss;
        meta["val_loss"] = row.val_loss;
        meta["lr"] = lr;
        meta["train_config"] = train_config_to_json(cfg);
        const auto path = options.out_dir / fmt::format("ckpt-best-e{:03d}.json", epoch);
        save_checkpoint(path, model, meta);
        if (!result.checkpoint.empty()) {
          std::filesystem::remove(result.checkpoint);
        }
        result.checkpoint = path;
      }
    }
    sched = scheduler_step(sched, val.total(), cfg);
    if (options.on_epoch) {
      options.on_epoch(row);
    }
  }
  return result;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig & c)
{
  nlohmann::ordered_json j;
  j["lr0"] = c.lr0;
  j["epochs"] = c.epochs;
  j["batch"] = c.batch;
  j["factor"] = c.factor;
  j["patience"] = c.patience;
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["multi_task"] = c.multi_task;
  j["attr_final_step_only"] = c.attr_final_step_only;
  j["attr_only"] = c.attr_only;
  return j;
}

TrainConfig train_config_from(const KvConfig & cfg, TrainConfig base)
{
  base.lr0 = cfg.get_double("lr0", base.lr0);
  base.epochs = cfg.get_uint("epochs", base.epochs);
  base.batch = cfg.get_uint("batch", base.batch);
  base.factor = cfg.get_double("factor", base.factor);
  base.patience = cfg.get_uint("patience", base.patience);
  base.threshold = cfg.get_double("threshold", base.threshold);
  base.seed = cfg.get_uint("seed", base.seed);
  base.multi_task = cfg.get_bool("multi_task", base.multi_task);
  base.attr_final_step_only = cfg.get_bool("attr_final_step_only", base.attr_final_step_only);
  base.attr_only = cfg.get_bool("attr_only", base.attr_only);
  base.validate();
  return base;
}

}  // namespace pvlstm
