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

#include "pvlstm/model.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"

namespace pvlstm
{

namespace
{

void require_window(const PvLstmModel & model, std::span<const BBox3d> window)
{
  if (window.size() != model.config.t_obs) {
    throw ArgumentError(
      "observation window has " + std::to_string(window.size()) + " boxes, model expects t_obs=" +
      std::to_string(model.config.t_obs));
  }
}

void require_fused(const PvLstmModel & model, const LstmState & fused)
{
  const std::size_t fd = model.config.fused_dim();
  if (fused.h.size() != fd || fused.c.size() != fd) {
    throw ShapeError(
      "fused state has h(" + std::to_string(fused.h.size()) + ") c(" +
      std::to_string(fused.c.size()) + "), decoder expects " + std::to_string(fd));
  }
}

void add_into(Vector & acc, std::span<const double> v)
{
  for (std::size_t k = 0; k < acc.size(); ++k) {
    acc[k] += v[k];
  }
}

// Runs `params` from a zero state over `inputs`, recording every step.
LstmState run_encoder(
  const LstmParams & params, const std::vector<std::array<double, kBoxDim>> & inputs,
  std::vector<StepCache> * caches)
{
  LstmState state = LstmState::zeros(params.hidden_dim);
  for (const auto & x : inputs) {
    auto [next, cache] = lstm_step(params, state, x);
    state = std::move(next);
    if (caches != nullptr) {
      caches->push_back(std::move(cache));
    }
  }
  return state;
}

}  // namespace

Velocity6 Velocity6::from(std::span<const double> v)
{
  if (v.size() != kBoxDim) {
    throw ShapeError("Velocity6 needs 6 values, got " + std::to_string(v.size()));
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

BBox3d BBox3d::from(std::span<const double> v)
{
  if (v.size() != kBoxDim) {
    throw ShapeError("BBox3d needs 6 values, got " + std::to_string(v.size()));
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::vector<Velocity6> to_velocities(std::span<const BBox3d> boxes)
{
  if (boxes.size() < 2) {
    throw ArgumentError(
      "to_velocities needs at least 2 boxes, got " + std::to_string(boxes.size()));
  }
  std::vector<Velocity6> out;
  out.reserve(boxes.size() - 1);
  for (std::size_t t = 1; t < boxes.size(); ++t) {
    out.push_back(boxes[t] - boxes[t - 1]);
  }
  return out;
}

std::vector<BBox3d> integrate(const BBox3d & anchor, std::span<const Velocity6> vels)
{
  std::vector<BBox3d> out;
  out.reserve(vels.size());
  BBox3d cur = anchor;
  for (const Velocity6 & v : vels) {
    cur = cur + v;
    out.push_back(cur);
  }
  return out;
}

std::vector<std::size_t> invalid_boxes(std::span<const BBox3d> boxes)
{
  std::vector<std::size_t> bad;
  for (std::size_t t = 0; t < boxes.size(); ++t) {
    if (boxes[t].w < 0.0 || boxes[t].h < 0.0 || boxes[t].d < 0.0) {
      bad.push_back(t);
    }
  }
  return bad;
}

void ModelConfig::validate() const
{
  if (t_obs < 2) {
    throw ConfigError("t_obs must be at least 2 (velocities need two frames), got " + std::to_string(t_obs));
  }
  if (t_pred < 1) {
    throw ConfigError("t_pred must be at least 1");
  }
  if (hidden < 1) {
    throw ConfigError("hidden must be at least 1");
  }
  if (n_attr_classes == 1) {
    throw ConfigError("attribute decoder needs at least 2 classes (or 0 to disable)");
  }
}

std::string ModelConfig::describe() const
{
  std::ostringstream s;
  s << "hidden=" << hidden << " t_obs=" << t_obs << " t_pred=" << t_pred
    << " model=" << (use_velocity_encoder ? "pv-lstm" : "p-lstm")
    << " n_attr_classes=" << n_attr_classes << " seed=" << seed;
  return s.str();
}

PvLstmModel PvLstmModel::zeros(const ModelConfig & config)
{
  config.validate();
  PvLstmModel m;
  m.config = config;
  const std::size_t fd = config.fused_dim();
  m.enc_p = LstmParams::zeros(kBoxDim, config.hidden);
  if (config.use_velocity_encoder) {
    m.enc_v = LstmParams::zeros(kBoxDim, config.hidden);
  }
  m.dec_v = LstmParams::zeros(kBoxDim, fd);
  m.fc_v = Linear::zeros(fd, kBoxDim);
  if (config.has_attributes()) {
    m.dec_a = LstmParams::zeros(kBoxDim, fd);
    m.fc_a = Linear::zeros(fd, config.n_attr_classes);
  }
  return m;
}

PvLstmModel PvLstmModel::init(const ModelConfig & config)
{
  config.validate();
  PvLstmModel m;
  m.config = config;
  const std::size_t fd = config.fused_dim();
  m.enc_p = lstm_init(derive_seed(config.seed, 0), kBoxDim, config.hidden);
  if (config.use_velocity_encoder) {
    m.enc_v = lstm_init(derive_seed(config.seed, 1), kBoxDim, config.hidden);
  }
  m.dec_v = lstm_init(derive_seed(config.seed, 2), kBoxDim, fd);
  m.fc_v = linear_init(derive_seed(config.seed, 3), fd, kBoxDim);
  if (config.has_attributes()) {
    m.dec_a = lstm_init(derive_seed(config.seed, 4), kBoxDim, fd);
    m.fc_a = linear_init(derive_seed(config.seed, 5), fd, config.n_attr_classes);
  }
  return m;
}

std::vector<ParamView> PvLstmModel::params()
{
  std::vector<ParamView> out;
  enc_p.collect("enc_p", out);
  if (enc_v) {
    enc_v->collect("enc_v", out);
  }
  dec_v.collect("dec_v", out);
  fc_v.collect("fc_v", out);
  if (dec_a) {
    dec_a->collect("dec_a", out);
  }
  if (fc_a) {
    fc_a->collect("fc_a", out);
  }
  return out;
}

std::size_t PvLstmModel::param_count() const
{
  auto lstm = [](const LstmParams & p) {
    return p.w_ih.size() + p.w_hh.size() + p.b_ih.size() + p.b_hh.size();
  };
  auto linear = [](const Linear & l) { return l.w.size() + l.b.size(); };
  std::size_t n = lstm(enc_p) + lstm(dec_v) + linear(fc_v);
  n += enc_v ? lstm(*enc_v) : 0;
  n += dec_a ? lstm(*dec_a) : 0;
  n += fc_a ? linear(*fc_a) : 0;
  return n;
}

ForwardTape forward(const PvLstmModel & model, std::span<const BBox3d> window)
{
  require_window(model, window);
  ForwardTape tape;

  std::vector<std::array<double, kBoxDim>> positions;
  positions.reserve(window.size());
  for (const BBox3d & b : window) {
    positions.push_back(b.as_array());
  }
  const std::vector<Velocity6> observed = to_velocities(window);
  tape.v_last = observed.back();

  LstmState hp = run_encoder(model.enc_p, positions, &tape.enc_p);
  if (model.enc_v) {
    std::vector<std::array<double, kBoxDim>> vels;
    vels.reserve(observed.size());
    for (const Velocity6 & v : observed) {
      vels.push_back(v.as_array());
    }
    LstmState hv = run_encoder(*model.enc_v, vels, &tape.enc_v);
    tape.fused = {concat(hp.h, hv.h), concat(hp.c, hv.c)};
  } else {
    tape.fused = std::move(hp);
  }

  const std::size_t steps = model.config.t_pred;
  LstmState sv = tape.fused;
  std::optional<LstmState> sa;
  if (model.dec_a) {
    sa = tape.fused;
  }
  std::array<double, kBoxDim> input = tape.v_last.as_array();
  for (std::size_t k = 0; k < steps; ++k) {
    if (sa) {
      auto [next_a, cache_a] = lstm_step(*model.dec_a, *sa, input);
      tape.attr_logits.push_back(affine(model.fc_a->w, next_a.h, model.fc_a->b));
      tape.attr_probs.push_back(softmax(tape.attr_logits.back()));
      sa = std::move(next_a);
      tape.dec_a.push_back(std::move(cache_a));
    }
    auto [next_v, cache_v] = lstm_step(model.dec_v, sv, input);
    tape.velocities.push_back(affine(model.fc_v.w, next_v.h, model.fc_v.b));
    std::copy(tape.velocities.back().begin(), tape.velocities.back().end(), input.begin());
    sv = std::move(next_v);
    tape.dec_v.push_back(std::move(cache_v));
  }
  return tape;
}

void backward(
  const PvLstmModel & model, const ForwardTape & tape, const std::vector<Vector> & d_velocities,
  const std::vector<Vector> & d_logits, PvLstmModel & grads)
{
  const std::size_t steps = tape.dec_v.size();
  const std::size_t fd = model.config.fused_dim();
  const std::size_t hd = model.config.hidden;
  if (!d_velocities.empty() && d_velocities.size() != steps) {
    throw ShapeError("backward: velocity gradient has wrong number of steps");
  }
  if (!d_logits.empty() && (!model.dec_a || d_logits.size() != steps)) {
    throw ShapeError("backward: attribute gradient does not match the attribute decoder");
  }
  if (grads.config.fused_dim() != fd || grads.config.hidden != hd ||
      grads.dec_a.has_value() != model.dec_a.has_value()) {
    throw ShapeError("backward: gradient buffer shape does not match the model");
  }

  Vector dh_v(fd, 0.0);
  Vector dc_v(fd, 0.0);
  Vector dh_a(fd, 0.0);
  Vector dc_a(fd, 0.0);
  // Gradient w.r.t. the decoder input of step k + 1, i.e. the velocity emitted at step k.
  Vector d_next_input(kBoxDim, 0.0);

  for (std::size_t k = steps; k-- > 0;) {
    Vector g_vel = d_next_input;
    if (!d_velocities.empty()) {
      add_into(g_vel, d_velocities[k]);
    }
    const StepCache & cv = tape.dec_v[k];
    outer_accumulate(grads.fc_v.w, g_vel, cv.h);
    add_into(grads.fc_v.b, g_vel);
    transposed_accumulate(model.fc_v.w, g_vel, dh_v);
    StepGrads sv = lstm_step_backward(model.dec_v, cv, dh_v, dc_v, grads.dec_v);
    dh_v = std::move(sv.dh_prev);
    dc_v = std::move(sv.dc_prev);
    Vector d_input = std::move(sv.dx);

    if (model.dec_a) {
      const StepCache & ca = tape.dec_a[k];
      if (!d_logits.empty()) {
        outer_accumulate(grads.fc_a->w, d_logits[k], ca.h);
        add_into(grads.fc_a->b, d_logits[k]);
        transposed_accumulate(model.fc_a->w, d_logits[k], dh_a);
      }
      StepGrads sa = lstm_step_backward(*model.dec_a, ca, dh_a, dc_a, *grads.dec_a);
      dh_a = std::move(sa.dh_prev);
      dc_a = std::move(sa.dc_prev);
      add_into(d_input, sa.dx);
    }
    // The first step consumes observed data, which carries no gradient.
    d_next_input = std::move(d_input);
  }

  add_into(dh_v, dh_a);
  add_into(dc_v, dc_a);

  auto encoder_backward = [](
    const LstmParams & params, const std::vector<StepCache> & caches, Vector dh, Vector dc,
    LstmParams & g) {
      for (std::size_t t = caches.size(); t-- > 0;) {
        StepGrads s = lstm_step_backward(params, caches[t], dh, dc, g);
        dh = std::move(s.dh_prev);
        dc = std::move(s.dc_prev);
      }
    };

  encoder_backward(
    model.enc_p, tape.enc_p, Vector(dh_v.begin(), dh_v.begin() + hd),
    Vector(dc_v.begin(), dc_v.begin() + hd), grads.enc_p);
  if (model.enc_v) {
    encoder_backward(
      *model.enc_v, tape.enc_v, Vector(dh_v.begin() + hd, dh_v.end()),
      Vector(dc_v.begin() + hd, dc_v.end()), *grads.enc_v);
  }
}

LstmState encode(const PvLstmModel & model, std::span<const BBox3d> window)
{
  require_window(model, window);
  std::vector<std::array<double, kBoxDim>> positions;
  for (const BBox3d & b : window) {
    positions.push_back(b.as_array());
  }
  LstmState hp = run_encoder(model.enc_p, positions, nullptr);
  if (!model.enc_v) {
    return hp;
  }
  std::vector<std::array<double, kBoxDim>> vels;
  for (const Velocity6 & v : to_velocities(window)) {
    vels.push_back(v.as_array());
  }
  LstmState hv = run_encoder(*model.enc_v, vels, nullptr);
  return {concat(hp.h, hv.h), concat(hp.c, hv.c)};
}

std::vector<Velocity6> decode_velocities(
  const PvLstmModel & model, const LstmState & fused, const Velocity6 & v_last)
{
  require_fused(model, fused);
  std::vector<Velocity6> out;
  out.reserve(model.config.t_pred);
  LstmState state = fused;
  std::array<double, kBoxDim> input = v_last.as_array();
  Vector v(kBoxDim);
  for (std::size_t k = 0; k < model.config.t_pred; ++k) {
    state = lstm_step(model.dec_v, state, input).first;
    affine_into(model.fc_v.w, state.h, model.fc_v.b, v);
    out.push_back(Velocity6::from(v));
    input = out.back().as_array();
  }
  return out;
}

std::vector<Vector> decode_attributes(
  const PvLstmModel & model, const LstmState & fused, const Velocity6 & v_last)
{
  if (!model.dec_a) {
    throw ConfigError("decode_attributes: the attribute decoder is disabled (n_attr_classes=0)");
  }
  require_fused(model, fused);
  // The attribute decoder reads the same closed-loop input stream as the velocity decoder.
  const std::vector<Velocity6> vels = decode_velocities(model, fused, v_last);
  std::vector<Vector> out;
  out.reserve(vels.size());
  LstmState state = fused;
  std::array<double, kBoxDim> input = v_last.as_array();
  for (std::size_t k = 0; k < vels.size(); ++k) {
    state = lstm_step(*model.dec_a, state, input).first;
    out.push_back(softmax(affine(model.fc_a->w, state.h, model.fc_a->b)));
    input = vels[k].as_array();
  }
  return out;
}

Prediction predict(const PvLstmModel & model, std::span<const BBox3d> window)
{
  const LstmState fused = encode(model, window);
  const Velocity6 v_last = window[window.size() - 1] - window[window.size() - 2];
  Prediction out;
  out.boxes = integrate(window.back(), decode_velocities(model, fused, v_last));
  if (model.dec_a) {
    out.attrs = decode_attributes(model, fused, v_last);
  }
  return out;
}

std::vector<BBox3d> zero_vel_predict(std::span<const BBox3d> window, std::size_t t_pred)
{
  if (window.empty()) {
    throw ArgumentError("zero_vel_predict: empty observation window");
  }
  return std::vector<BBox3d>(t_pred, window.back());
}

}  // namespace pvlstm
