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

#include "pvlstm/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"

namespace pvlstm
{

namespace
{

constexpr double kCameraHeight = 1.6;  // ground plane at y = +1.6 (camera y axis points down)
constexpr double kGrid = 0x1.0p-30;    // noise-free coordinates live on this dyadic grid
constexpr double kSittingScale = 0.55;

// Snapping to the grid makes sums of steps exact, so differencing a noise-free
// constant-velocity track recovers exactly the same step every frame.
double snap(double v) { return std::round(v / kGrid) * kGrid; }

std::string numbered(const char * prefix, std::size_t i)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05zu", prefix, i);
  return buf;
}

}  // namespace

void SynthSpec::validate() const
{
  const double probs[] = {p_constant, p_stop_and_go, p_turning, p_standing};
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw ArgumentError("synth spec: regime proportions must be non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ArgumentError(
      "synth spec: regime proportions sum to " + std::to_string(total) + ", expected 1");
  }
  if (!(sitting_fraction >= 0.0 && sitting_fraction <= 1.0)) {
    throw ArgumentError("synth spec: sitting_fraction must lie in [0, 1]");
  }
  if (!(fps > 0.0) || !(duration > 0.0)) {
    throw ArgumentError("synth spec: fps and duration must be positive");
  }
  if (!(speed_min >= 0.0 && speed_min <= speed_max)) {
    throw ArgumentError("synth spec: need 0 <= speed_min <= speed_max");
  }
  if (!(height_min > 0.0 && height_min <= height_max)) {
    throw ArgumentError("synth spec: need 0 < height_min <= height_max");
  }
  if (!(heading_min <= heading_max)) {
    throw ArgumentError("synth spec: need heading_min <= heading_max");
  }
  if (!(noise_sigma >= 0.0)) {
    throw ArgumentError("synth spec: noise_sigma must be non-negative");
  }
}

SynthSpec SynthSpec::from_config(const KvConfig & cfg)
{
  cfg.require_known(
    {"n_tracks", "fps", "duration", "p_constant", "p_stop_and_go", "p_turning", "p_standing",
     "sitting_fraction", "speed_min", "speed_max", "height_min", "height_max", "heading_min",
     "heading_max", "noise_sigma", "seed"});
  SynthSpec s;
  s.n_tracks = cfg.get_uint("n_tracks", s.n_tracks);
  s.fps = cfg.get_double("fps", s.fps);
  s.duration = cfg.get_double("duration", s.duration);
  s.p_constant = cfg.get_double("p_constant", s.p_constant);
  s.p_stop_and_go = cfg.get_double("p_stop_and_go", s.p_stop_and_go);
  s.p_turning = cfg.get_double("p_turning", s.p_turning);
  s.p_standing = cfg.get_double("p_standing", s.p_standing);
  s.sitting_fraction = cfg.get_double("sitting_fraction", s.sitting_fraction);
  s.speed_min = cfg.get_double("speed_min", s.speed_min);
  s.speed_max = cfg.get_double("speed_max", s.speed_max);
  s.height_min = cfg.get_double("height_min", s.height_min);
  s.height_max = cfg.get_double("height_max", s.height_max);
  s.heading_min = cfg.get_double("heading_min", s.heading_min);
  s.heading_max = cfg.get_double("heading_max", s.heading_max);
  s.noise_sigma = cfg.get_double("noise_sigma", s.noise_sigma);
  s.seed = cfg.get_uint("seed", s.seed);
  s.validate();
  return s;
}

Regime synth_regime(const SynthSpec & spec, std::size_t index)
{
  Rng rng(derive_seed(spec.seed, index));
  const double u = rng.uniform();
  if (u < spec.p_constant) {
    return Regime::kConstantVelocity;
  }
  if (u < spec.p_constant + spec.p_stop_and_go) {
    return Regime::kStopAndGo;
  }
  if (u < spec.p_constant + spec.p_stop_and_go + spec.p_turning) {
    return Regime::kTurning;
  }
  return Regime::kStanding;
}

std::vector<TrackRecord> synth_generate(const SynthSpec & spec)
{
  spec.validate();
  const auto n_frames =
    static_cast<std::size_t>(std::max<long long>(1, std::llround(spec.duration * spec.fps)));
  const double dt = 1.0 / spec.fps;

  std::vector<TrackRecord> out;
  out.reserve(spec.n_tracks * n_frames);
  for (std::size_t i = 0; i < spec.n_tracks; ++i) {
    const Regime regime = synth_regime(spec, i);
    Rng rng(derive_seed(spec.seed, i));
    rng.uniform();  // regime draw, consumed by synth_regime
    const bool sitting = rng.uniform() < spec.sitting_fraction && regime == Regime::kStanding;
    const double stature = rng.uniform(spec.height_min, spec.height_max);
    const double h = snap(sitting ? kSittingScale * stature : stature);
    const double w = snap(0.3 * stature);
    const double d = snap(0.25 * stature);
    double x = snap(rng.uniform(-6.0, 6.0));
    double z = snap(rng.uniform(6.0, 20.0));
    const double y = snap(kCameraHeight - h / 2.0);
    double heading = rng.uniform(spec.heading_min, spec.heading_max);
    const double speed = rng.uniform(spec.speed_min, spec.speed_max);
    const double turn_rate = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 0.6);
    bool moving = rng.uniform() < 0.5;
    double phase_left = rng.uniform(1.0, 3.0);

    // Noise-free per-step displacement; constant-velocity tracks reuse one snapped step.
    const double cv_dx = snap(speed * dt * std::cos(heading));
    const double cv_dz = snap(speed * dt * std::sin(heading));

    std::vector<double> xs{x};
    std::vector<double> zs{z};
    std::vector<double> step_speed;
    for (std::size_t t = 1; t < n_frames; ++t) {
      double dx = 0.0;
      double dz = 0.0;
      switch (regime) {
        case Regime::kConstantVelocity:
          dx = cv_dx;
          dz = cv_dz;
          break;
        case Regime::kStopAndGo:
          if (moving) {
            dx = cv_dx;
            dz = cv_dz;
          }
          phase_left -= dt;
          if (phase_left <= 0.0) {
            moving = !moving;
            phase_left = rng.uniform(1.0, 3.0);
          }
          break;
        case Regime::kTurning:
          dx = snap(speed * dt * std::cos(heading));
          dz = snap(speed * dt * std::sin(heading));
          heading += turn_rate * dt;
          break;
        case Regime::kStanding:
          break;
      }
      x += dx;
      z += dz;
      xs.push_back(x);
      zs.push_back(z);
      step_speed.push_back(std::hypot(dx, dz) / dt);
    }

    const std::string scene = numbered("synth_", i);
    const std::string ped = numbered("ped_", i);
    for (std::size_t t = 0; t < n_frames; ++t) {
      TrackRecord r;
      r.scene_id = scene;
      r.ped_id = ped;
      r.frame = static_cast<std::int64_t>(t);
      r.source_fps = spec.fps;
      r.box = {xs[t], y, zs[t], w, h, d};
      if (spec.noise_sigma > 0.0) {
        r.box.x += rng.normal(0.0, spec.noise_sigma);
        r.box.y += rng.normal(0.0, spec.noise_sigma);
        r.box.z += rng.normal(0.0, spec.noise_sigma);
      }
      const double v = step_speed.empty() ? 0.0 : step_speed[t == 0 ? 0 : t - 1];
      if (sitting) {
        r.attr = kSitting;
      } else {
        r.attr = v < kStandingSpeed ? kStanding : kMoving;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace pvlstm
