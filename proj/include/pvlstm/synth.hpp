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

#ifndef PVLSTM__SYNTH_HPP_
#define PVLSTM__SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pvlstm/data.hpp"
#include "pvlstm/kvconfig.hpp"

namespace pvlstm
{

/// Moving/standing boundary for synthetic attribute labels, m/s.
inline constexpr double kStandingSpeed = 0.2;

/**
 * @brief Parameters of the synthetic pedestrian generator.
 *
 * Each track draws one motion regime with the given proportions (which must
 * sum to 1). `sitting_fraction` of the standing tracks are emitted as
 * sitting/lying pedestrians: shorter boxes labelled kSitting.
 */
struct SynthSpec
{
  std::size_t n_tracks = 100;
  double fps = 2.0;
  double duration = 8.0;  // seconds per track
  double p_constant = 1.0;
  double p_stop_and_go = 0.0;
  double p_turning = 0.0;
  double p_standing = 0.0;
  double sitting_fraction = 0.0;
  double speed_min = 0.5;  // m/s
  double speed_max = 1.5;
  double height_min = 1.5;  // m
  double height_max = 1.9;
  double heading_min = 0.0;  // rad, walking direction in the ground (x, z) plane
  double heading_max = 2.0 * std::numbers::pi;
  double noise_sigma = 0.0;  // m, added to box centers
  std::uint64_t seed = 0;

  void validate() const;
  static SynthSpec from_config(const KvConfig & cfg);
};

enum class Regime
{
  kConstantVelocity,
  kStopAndGo,
  kTurning,
  kStanding,
};

/// Tracks are independent: track i draws from derive_seed(seed, i).
std::vector<TrackRecord> synth_generate(const SynthSpec & spec);

/// Regime drawn for track `index` (exposed for tests).
Regime synth_regime(const SynthSpec & spec, std::size_t index);

}  // namespace pvlstm

#endif  // PVLSTM__SYNTH_HPP_
