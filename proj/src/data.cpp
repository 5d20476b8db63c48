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

#include "pvlstm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"

namespace pvlstm
{

using nlohmann::json;

namespace
{

std::string id_string(const json & v)
{
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_number_integer()) {
    return std::to_string(v.get<std::int64_t>());
  }
  throw ParseError("id must be a string or integer");
}

TrackRecord parse_record(const std::string & line, TrackFormat format)
{
  const json j = json::parse(line);
  if (!j.is_object()) {
    throw ParseError("record is not a JSON object");
  }
  TrackRecord r;
  r.scene_id = id_string(j.at("scene_id"));
  r.ped_id = id_string(j.at("ped_id"));
  r.frame = j.at("frame").get<std::int64_t>();
  r.source_fps = j.at("fps").get<double>();
  if (r.frame < 0) {
    throw ParseError("negative frame index");
  }
  if (!(r.source_fps > 0.0)) {
    throw ParseError("fps must be positive");
  }
  if (j.contains("attr") && !j.at("attr").is_null()) {
    const auto a = j.at("attr").get<std::int64_t>();
    if (a < 0) {
      throw ParseError("negative attribute class");
    }
    r.attr = static_cast<std::size_t>(a);
  }
  if (format == TrackFormat::kBoxes) {
    const json & b = j.at("box");
    r.box = {
      b.at("x").get<double>(), b.at("y").get<double>(), b.at("z").get<double>(),
      b.at("w").get<double>(), b.at("h").get<double>(), b.at("d").get<double>()};
  } else {
    std::vector<std::array<double, 3>> joints;
    for (const json & p : j.at("joints")) {
      if (!p.is_array() || p.size() != 3) {
        throw ParseError("each joint must be [x, y, z]");
      }
      joints.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    r.box = box_from_keypoints(joints);
  }
  require_finite(std::span<const double>(r.box.as_array()), "box");
  if (r.box.w < 0.0 || r.box.h < 0.0 || r.box.d < 0.0) {
    throw ParseError("negative box size");
  }
  return r;
}

bool same_track(const TrackRecord & a, const TrackRecord & b)
{
  return a.scene_id == b.scene_id && a.ped_id == b.ped_id;
}

// Windows of `length` strided frames; `split` boxes go to obs, the rest to future.
std::vector<Sample> cut_windows(
  std::span<const TrackRecord> tracks, std::size_t length, std::size_t split, std::size_t stride)
{
  if (stride < 1) {
    throw ArgumentError("window stride must be at least 1");
  }
  std::vector<Sample> out;
  std::size_t begin = 0;
  while (begin < tracks.size()) {
    std::size_t end = begin + 1;
    while (end < tracks.size() && same_track(tracks[begin], tracks[end])) {
      ++end;
    }
    const std::span<const TrackRecord> track = tracks.subspan(begin, end - begin);
    const std::int64_t first = track.front().frame;
    const auto step = static_cast<std::int64_t>(stride);

    auto find_frame = [&](std::int64_t frame) -> const TrackRecord * {
      const auto it = std::lower_bound(
        track.begin(), track.end(), frame,
        [](const TrackRecord & r, std::int64_t f) { return r.frame < f; });
      return (it != track.end() && it->frame == frame) ? &*it : nullptr;
    };

    for (const TrackRecord & start : track) {
      if ((start.frame - first) % step != 0) {
        continue;
      }
      std::vector<const TrackRecord *> picked;
      picked.reserve(length);
      for (std::size_t k = 0; k < length; ++k) {
        const TrackRecord * r = find_frame(start.frame + static_cast<std::int64_t>(k) * step);
        if (r == nullptr) {
          break;
        }
        picked.push_back(r);
      }
      if (picked.size() != length) {
        continue;
      }
      Sample s;
      s.id = {start.scene_id, start.ped_id, start.frame};
      bool labelled = length > split;
      for (std::size_t k = 0; k < length; ++k) {
        if (k < split) {
          s.obs.push_back(picked[k]->box);
        } else {
          s.future.push_back(picked[k]->box);
          labelled = labelled && picked[k]->attr.has_value();
        }
      }
      if (labelled) {
        std::vector<std::size_t> labels;
        for (std::size_t k = split; k < length; ++k) {
          labels.push_back(*picked[k]->attr);
        }
        s.attr_labels = std::move(labels);
      }
      out.push_back(std::move(s));
    }
    begin = end;
  }
  return out;
}

}  // namespace

TrackFormat parse_track_format(const std::string & name)
{
  if (name == "boxes") {
    return TrackFormat::kBoxes;
  }
  if (name == "jta-joints") {
    return TrackFormat::kJtaJoints;
  }
  throw ArgumentError("unknown track format '" + name + "' (expected boxes or jta-joints)");
}

std::vector<TrackRecord> parse_tracks(std::istream & in, TrackFormat format)
{
  std::vector<TrackRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      records.push_back(parse_record(line, format));
    } catch (const json::exception & e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception & e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const TrackRecord & a, const TrackRecord & b) {
    return std::tie(a.scene_id, a.ped_id, a.frame) < std::tie(b.scene_id, b.ped_id, b.frame);
  });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (same_track(records[i - 1], records[i]) && records[i - 1].frame == records[i].frame) {
      throw ParseError(
        "duplicate record for scene '" + records[i].scene_id + "', ped '" + records[i].ped_id +
        "', frame " + std::to_string(records[i].frame));
    }
  }
  return records;
}

std::vector<TrackRecord> load_tracks(const std::filesystem::path & path, TrackFormat format)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open track file " + path.string());
  }
  try {
    return parse_tracks(in, format);
  } catch (const ParseError & e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_tracks(std::ostream & out, std::span<const TrackRecord> records)
{
  for (const TrackRecord & r : records) {
    nlohmann::ordered_json j;
    j["scene_id"] = r.scene_id;
    j["ped_id"] = r.ped_id;
    j["frame"] = r.frame;
    j["fps"] = r.source_fps;
    j["box"] = {{"x", r.box.x}, {"y", r.box.y}, {"z", r.box.z},
                {"w", r.box.w}, {"h", r.box.h}, {"d", r.box.d}};
    if (r.attr) {
      j["attr"] = *r.attr;
    }
    out << j.dump() << '\n';
  }
}

BBox3d box_from_keypoints(std::span<const std::array<double, 3>> joints)
{
  if (joints.size() < 2) {
    throw ArgumentError(
      "box_from_keypoints needs at least 2 joints, got " + std::to_string(joints.size()));
  }
  std::array<double, 3> lo = joints[0];
  std::array<double, 3> hi = joints[0];
  for (const auto & j : joints) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (!std::isfinite(j[a])) {
        throw ArgumentError("box_from_keypoints: non-finite joint coordinate");
      }
      lo[a] = std::min(lo[a], j[a]);
      hi[a] = std::max(hi[a], j[a]);
    }
  }
  return {
    (lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, (lo[2] + hi[2]) / 2.0,
    hi[0] - lo[0],         hi[1] - lo[1],         hi[2] - lo[2]};
}

std::vector<Sample> window_samples(
  std::span<const TrackRecord> tracks, std::size_t t_obs, std::size_t t_pred, std::size_t stride)
{
  if (t_obs < 2 || t_pred < 1) {
    throw ArgumentError(
      "window_samples: need t_obs >= 2 and t_pred >= 1, got " + std::to_string(t_obs) + "/" +
      std::to_string(t_pred));
  }
  return cut_windows(tracks, t_obs + t_pred, t_obs, stride);
}

std::vector<Sample> observation_windows(
  std::span<const TrackRecord> tracks, std::size_t t_obs, std::size_t stride)
{
  if (t_obs < 2) {
    throw ArgumentError("observation_windows: need t_obs >= 2");
  }
  return cut_windows(tracks, t_obs, t_obs, stride);
}

std::vector<Sample> balance_classes(
  std::span<const Sample> samples, std::size_t n_classes, std::uint64_t seed)
{
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto & labels = samples[i].attr_labels;
    if (!labels || labels->empty()) {
      throw ArgumentError("balance_classes: sample " + std::to_string(i) + " has no attribute labels");
    }
    if (labels->back() >= n_classes) {
      throw ArgumentError(
        "balance_classes: label " + std::to_string(labels->back()) + " out of range");
    }
    by_class[labels->back()].push_back(i);
  }
  std::size_t smallest = samples.size();
  std::string counts;
  for (std::size_t c = 0; c < n_classes; ++c) {
    smallest = std::min(smallest, by_class[c].size());
    counts += (c == 0 ? "" : ", ") + std::to_string(by_class[c].size());
  }
  if (smallest == 0) {
    throw ArgumentError("balance_classes: a class has no samples; counts = (" + counts + ")");
  }

  Rng rng(seed);
  std::vector<bool> keep(samples.size(), false);
  for (auto & members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.index(i)]);
    }
    for (std::size_t k = 0; k < smallest; ++k) {
      keep[members[k]] = true;
    }
  }
  std::vector<Sample> out;
  out.reserve(smallest * n_classes);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) {
      out.push_back(samples[i]);
    }
  }
  return out;
}

TrackSplit split_by_scene(
  std::span<const TrackRecord> tracks, double val_fraction, double test_fraction,
  std::uint64_t seed)
{
  if (val_fraction < 0.0 || test_fraction < 0.0 || val_fraction + test_fraction >= 1.0) {
    throw ArgumentError("split_by_scene: fractions must be non-negative and sum below 1");
  }
  std::vector<std::string> scenes;
  for (const TrackRecord & r : tracks) {
    if (scenes.empty() || scenes.back() != r.scene_id) {
      scenes.push_back(r.scene_id);
    }
  }
  std::sort(scenes.begin(), scenes.end());
  scenes.erase(std::unique(scenes.begin(), scenes.end()), scenes.end());
  Rng rng(seed);
  for (std::size_t i = scenes.size(); i > 1; --i) {
    std::swap(scenes[i - 1], scenes[rng.index(i)]);
  }
  const auto n = static_cast<double>(scenes.size());
  const auto n_val = static_cast<std::size_t>(std::llround(n * val_fraction));
  const auto n_test = static_cast<std::size_t>(std::llround(n * test_fraction));
  std::map<std::string, int> role;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    role[scenes[i]] = i < n_val ? 1 : (i < n_val + n_test ? 2 : 0);
  }
  TrackSplit split;
  for (const TrackRecord & r : tracks) {
    switch (role[r.scene_id]) {
      case 1:
        split.val.push_back(r);
        break;
      case 2:
        split.test.push_back(r);
        break;
      default:
        split.train.push_back(r);
    }
  }
  return split;
}

WindowPreset window_preset(const std::string & name)
{
  if (name == "jta") {
    return {name, 30.0, 1, 15, 15};
  }
  if (name == "jta-long") {
    return {name, 30.0, 1, 15, 60};
  }
  if (name == "nuscenes") {
    return {name, 2.0, 1, 4, 4};
  }
  throw ArgumentError("unknown window preset '" + name + "' (jta, jta-long, nuscenes)");
}

}  // namespace pvlstm
