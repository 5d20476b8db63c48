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

#ifndef PVLSTM__DATA_HPP_
#define PVLSTM__DATA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pvlstm/model.hpp"

namespace pvlstm
{

/// Attribute classes for pedestrian actions.
enum AttrClass : std::size_t
{
  kMoving = 0,
  kStanding = 1,
  kSitting = 2,
};
inline constexpr std::size_t kNumAttrClasses = 3;

struct TrackRecord
{
  std::string scene_id;
  std::string ped_id;
  std::int64_t frame = 0;
  BBox3d box;
  std::optional<std::size_t> attr;
  double source_fps = 1.0;
};

enum class TrackFormat
{
  kBoxes,      // {"box": {"x":..,"y":..,"z":..,"w":..,"h":..,"d":..}}
  kJtaJoints,  // {"joints": [[x,y,z], ...]}
};

TrackFormat parse_track_format(const std::string & name);

/**
 * @brief Reads a JSON Lines track file.
 *
 * Each line carries scene_id, ped_id, frame, fps, optional attr, and either a
 * `box` object or a `joints` array depending on `format`. Output is sorted by
 * (scene_id, ped_id, frame). Throws ParseError with the offending line number
 * on malformed input or a duplicate (scene, ped, frame) key.
 */
std::vector<TrackRecord> parse_tracks(std::istream & in, TrackFormat format);
std::vector<TrackRecord> load_tracks(const std::filesystem::path & path, TrackFormat format);

/// Writes records in the `boxes` format, one JSON object per line.
void write_tracks(std::ostream & out, std::span<const TrackRecord> records);

/// Axis-aligned hull of a skeleton: x extent -> w, y -> h, z -> d.
BBox3d box_from_keypoints(std::span<const std::array<double, 3>> joints);

struct SampleId
{
  std::string scene_id;
  std::string ped_id;
  std::int64_t start_frame = 0;

  friend bool operator==(const SampleId &, const SampleId &) = default;
};

struct Sample
{
  std::vector<BBox3d> obs;
  std::vector<BBox3d> future;
  std::optional<std::vector<std::size_t>> attr_labels;  // one per future step
  SampleId id;
};

/**
 * @brief Cuts every gap-free strided window of t_obs + t_pred frames.
 *
 * `tracks` must be sorted as load_tracks() returns them. Window starts advance
 * one strided frame at a time from each pedestrian's first frame.
 */
std::vector<Sample> window_samples(
  std::span<const TrackRecord> tracks, std::size_t t_obs, std::size_t t_pred, std::size_t stride);

/// Observation-only windows (empty `future`), used for inference on raw tracks.
std::vector<Sample> observation_windows(
  std::span<const TrackRecord> tracks, std::size_t t_obs, std::size_t stride);

/// Undersamples so every class has the same number of final-step labels. Survivors keep input order.
std::vector<Sample> balance_classes(
  std::span<const Sample> samples, std::size_t n_classes, std::uint64_t seed);

struct TrackSplit
{
  std::vector<TrackRecord> train;
  std::vector<TrackRecord> val;
  std::vector<TrackRecord> test;
};

/// Partitions whole scenes (never windows) into train/val/test.
TrackSplit split_by_scene(
  std::span<const TrackRecord> tracks, double val_fraction, double test_fraction,
  std::uint64_t seed);

/// Named windowing setups matching the two source datasets' frame rates.
struct WindowPreset
{
  std::string name;
  double fps = 0.0;
  std::size_t stride = 1;
  std::size_t t_obs = 0;
  std::size_t t_pred = 0;
};

/// "jta" (30 fps, 0.5 s / 0.5 s), "jta-long" (30 fps, 0.5 s / 2 s), "nuscenes" (2 fps, 2 s / 2 s).
WindowPreset window_preset(const std::string & name);

}  // namespace pvlstm

#endif  // PVLSTM__DATA_HPP_
