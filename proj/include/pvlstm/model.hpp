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

#ifndef PVLSTM__MODEL_HPP_
#define PVLSTM__MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvlstm/linalg.hpp"
#include "pvlstm/nn.hpp"

namespace pvlstm
{

/// Per-frame change of every box element, meters per frame.
struct Velocity6
{
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double dw = 0.0;
  double dh = 0.0;
  double dd = 0.0;

  std::array<double, 6> as_array() const { return {dx, dy, dz, dw, dh, dd}; }
  static Velocity6 from(std::span<const double> v);

  friend bool operator==(const Velocity6 &, const Velocity6 &) = default;
};

/// Axis-aligned pedestrian box in camera coordinates: center (x, y, z), size (w, h, d).
struct BBox3d
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 0.0;
  double h = 0.0;
  double d = 0.0;

  std::array<double, 6> as_array() const { return {x, y, z, w, h, d}; }
  static BBox3d from(std::span<const double> v);

  BBox3d operator+(const Velocity6 & v) const
  {
    return {x + v.dx, y + v.dy, z + v.dz, w + v.dw, h + v.dh, d + v.dd};
  }
  Velocity6 operator-(const BBox3d & o) const
  {
    return {x - o.x, y - o.y, z - o.z, w - o.w, h - o.h, d - o.d};
  }

  friend bool operator==(const BBox3d &, const BBox3d &) = default;
};

inline constexpr std::size_t kBoxDim = 6;

std::vector<Velocity6> to_velocities(std::span<const BBox3d> boxes);

/// Cumulative sum of `vels` starting from `anchor`; the anchor itself is not emitted.
std::vector<BBox3d> integrate(const BBox3d & anchor, std::span<const Velocity6> vels);

/// Indices of boxes with a negative size component. Integration never clamps,
/// so reports call this to flag physically impossible predictions.
std::vector<std::size_t> invalid_boxes(std::span<const BBox3d> boxes);

struct ModelConfig
{
  std::size_t hidden = 512;
  std::size_t t_obs = 4;
  std::size_t t_pred = 4;
  bool use_velocity_encoder = true;  // false selects the P-LSTM ablation
  std::size_t n_attr_classes = 0;    // 0 disables the attribute decoder
  std::uint64_t seed = 0;

  /// Decoder hidden size: position state, plus velocity state when enabled.
  std::size_t fused_dim() const { return hidden * (use_velocity_encoder ? 2 : 1); }
  bool has_attributes() const { return n_attr_classes > 0; }

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
  std::string describe() const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

/**
 * @brief Position-velocity encoder-decoder for 3D box sequences.
 *
 * Two encoders summarize the observed boxes and their frame-to-frame
 * velocities; their final states are concatenated ([position | velocity]) to
 * seed a velocity decoder that runs closed-loop for t_pred steps. An optional
 * attribute decoder consumes the same input stream and emits class
 * distributions.
 */
struct PvLstmModel
{
  ModelConfig config;
  LstmParams enc_p;
  std::optional<LstmParams> enc_v;
  LstmParams dec_v;
  Linear fc_v;
  std::optional<LstmParams> dec_a;
  std::optional<Linear> fc_a;

  /// Random initialization; every sub-network draws from a seed derived from config.seed.
  static PvLstmModel init(const ModelConfig & config);
  /// Same shapes as init(), every parameter zero. Also used as a gradient buffer.
  static PvLstmModel zeros(const ModelConfig & config);

  /// All parameters in checkpoint order, named enc_p.w_ih, ..., fc_a.b.
  std::vector<ParamView> params();
  std::size_t param_count() const;

  friend bool operator==(const PvLstmModel &, const PvLstmModel &) = default;
};

/// Runs the encoders over an observation window and returns the fused decoder seed.
LstmState encode(const PvLstmModel & model, std::span<const BBox3d> window);

std::vector<Velocity6> decode_velocities(
  const PvLstmModel & model, const LstmState & fused, const Velocity6 & v_last);

/// One probability vector per predicted step.
std::vector<Vector> decode_attributes(
  const PvLstmModel & model, const LstmState & fused, const Velocity6 & v_last);

struct Prediction
{
  std::vector<BBox3d> boxes;
  std::optional<std::vector<Vector>> attrs;
};

Prediction predict(const PvLstmModel & model, std::span<const BBox3d> window);

/// Repeats the last observed box.
std::vector<BBox3d> zero_vel_predict(std::span<const BBox3d> window, std::size_t t_pred);

/// Forward record of one window, kept for backpropagation.
struct ForwardTape
{
  Velocity6 v_last;
  std::vector<StepCache> enc_p;
  std::vector<StepCache> enc_v;
  LstmState fused;
  std::vector<StepCache> dec_v;
  std::vector<Vector> velocities;  // t_pred x 6
  std::vector<StepCache> dec_a;
  std::vector<Vector> attr_logits;  // t_pred x classes, empty without attributes
  std::vector<Vector> attr_probs;
};

ForwardTape forward(const PvLstmModel & model, std::span<const BBox3d> window);

/**
 * @brief Exact reverse pass through both decoders and both encoders.
 *
 * `d_velocities` and `d_logits` hold the loss gradients w.r.t. the tape's
 * velocities and attribute logits; either may be empty (treated as zero).
 * Gradients are added into `grads`, which must have the model's shape.
 */
void backward(
  const PvLstmModel & model, const ForwardTape & tape, const std::vector<Vector> & d_velocities,
  const std::vector<Vector> & d_logits, PvLstmModel & grads);

}  // namespace pvlstm

#endif  // PVLSTM__MODEL_HPP_
