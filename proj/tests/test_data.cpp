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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"
#include "pvlstm/synth.hpp"

using namespace pvlstm;

namespace
{

std::vector<TrackRecord> parse(const std::string & text, TrackFormat f = TrackFormat::kBoxes)
{
  std::istringstream in(text);
  return parse_tracks(in, f);
}

std::string box_line(const std::string & scene, const std::string & ped, int frame, double x,
                     const std::string & extra = "")
{
  return R"({"scene_id":")" + scene + R"(","ped_id":")" + ped + R"(","frame":)" +
         std::to_string(frame) + R"(,"fps":2,"box":{"x":)" + std::to_string(x) +
         R"(,"y":0,"z":10,"w":0.5,"h":1.7,"d":0.4})" + extra + "}\n";
}

std::vector<TrackRecord> contiguous(const std::string & ped, std::vector<int> frames)
{
  std::vector<TrackRecord> out;
  for (int f : frames) {
    TrackRecord r;
    r.scene_id = "s";
    r.ped_id = ped;
    r.frame = f;
    r.box = {static_cast<double>(f), 0, 10, 0.5, 1.7, 0.4};
    out.push_back(r);
  }
  return out;
}

std::vector<int> range(int lo, int hi)
{
  std::vector<int> v;
  for (int i = lo; i < hi; ++i) {
    v.push_back(i);
  }
  return v;
}

Sample labelled(std::size_t label, std::int64_t tag)
{
  Sample s;
  s.obs = {BBox3d{}, BBox3d{}};
  s.future = {BBox3d{}};
  s.attr_labels = std::vector<std::size_t>{label};
  s.id = {"s", "p", tag};
  return s;
}

std::vector<std::size_t> final_counts(std::span<const Sample> samples, std::size_t n)
{
  std::vector<std::size_t> c(n, 0);
  for (const Sample & s : samples) {
    ++c[s.attr_labels->back()];
  }
  return c;
}

}  // namespace

TEST_CASE("parse_tracks")
{
  SUBCASE("empty input") { CHECK(parse("").empty()); }

  SUBCASE("joints record")
  {
    const auto r = parse(
      R"({"scene_id":"a","ped_id":7,"frame":0,"fps":30,"joints":[[0,0,2],[1,2,4]]})",
      TrackFormat::kJtaJoints);
    REQUIRE(r.size() == 1);
    CHECK(r[0].ped_id == "7");
    CHECK(r[0].source_fps == 30.0);
    CHECK(r[0].box == BBox3d{0.5, 1, 3, 1, 2, 2});
    CHECK_FALSE(r[0].attr.has_value());
  }

  SUBCASE("output is sorted by scene, ped, frame")
  {
    const auto r = parse(
      box_line("b", "1", 0, 0) + box_line("a", "2", 3, 0) + box_line("a", "2", 1, 0) +
      box_line("a", "1", 5, 0));
    REQUIRE(r.size() == 4);
    CHECK(r[0].ped_id == "1");
    CHECK(r[1].frame == 1);
    CHECK(r[2].frame == 3);
    CHECK(r[3].scene_id == "b");
  }

  SUBCASE("attribute field")
  {
    const auto r = parse(box_line("a", "1", 0, 0, R"(,"attr":2)"));
    CHECK(r.at(0).attr == std::optional<std::size_t>{2});
  }

  SUBCASE("malformed line names its number")
  {
    try {
      parse(box_line("a", "1", 0, 0) + "\n{\"scene_id\": oops}\n");
      FAIL("expected ParseError");
    } catch (const ParseError & e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  SUBCASE("missing field and bad values")
  {
    CHECK_THROWS_AS(parse(R"({"scene_id":"a","ped_id":"1","frame":0,"fps":2})"), ParseError);
    CHECK_THROWS_AS(parse(box_line("a", "1", -1, 0)), ParseError);
    CHECK_THROWS_AS(
      parse(R"({"scene_id":"a","ped_id":"1","frame":0,"fps":2,"box":{"x":0,"y":0,"z":0,"w":-1,"h":1,"d":1}})"),
      ParseError);
    CHECK_THROWS_AS(
      parse(R"({"scene_id":"a","ped_id":"1","frame":0,"fps":2,"joints":[[0,0,0]]})",
            TrackFormat::kJtaJoints),
      ParseError);
  }

  SUBCASE("duplicate key")
  {
    CHECK_THROWS_AS(parse(box_line("a", "1", 4, 0) + box_line("a", "1", 4, 1)), ParseError);
  }

  SUBCASE("write then parse is lossless")
  {
    SynthSpec spec;
    spec.n_tracks = 5;
    spec.noise_sigma = 0.3;
    spec.p_constant = 0.5;
    spec.p_standing = 0.5;
    spec.sitting_fraction = 0.5;
    const auto records = synth_generate(spec);
    std::ostringstream out;
    write_tracks(out, records);
    const auto back = parse(out.str());
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].box == records[i].box);
      CHECK(back[i].attr == records[i].attr);
      CHECK(back[i].frame == records[i].frame);
    }
  }

  CHECK(parse_track_format("boxes") == TrackFormat::kBoxes);
  CHECK(parse_track_format("jta-joints") == TrackFormat::kJtaJoints);
  CHECK_THROWS_AS(parse_track_format("csv"), ArgumentError);
}

TEST_CASE("box_from_keypoints")
{
  using P = std::array<double, 3>;
  CHECK(box_from_keypoints(std::vector<P>{{0, 0, 0}, {2, 4, 6}}) == BBox3d{1, 2, 3, 2, 4, 6});
  CHECK(box_from_keypoints(std::vector<P>{{1, -2, 3}, {1, -2, 3}, {1, -2, 3}}) ==
        BBox3d{1, -2, 3, 0, 0, 0});
  CHECK_THROWS_AS(box_from_keypoints(std::vector<P>{{0, 0, 0}}), ArgumentError);
  CHECK_THROWS_AS(box_from_keypoints(std::vector<P>{{0, 0, 0}, {NAN, 0, 0}}), ArgumentError);

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<P> joints(14);
    for (auto & j : joints) {
      j = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(5, 15)};
    }
    // Brute-force extents.
    double lo[3] = {1e300, 1e300, 1e300};
    double hi[3] = {-1e300, -1e300, -1e300};
    for (const auto & j : joints) {
      for (int a = 0; a < 3; ++a) {
        if (j[a] < lo[a]) {
          lo[a] = j[a];
        }
        if (j[a] > hi[a]) {
          hi[a] = j[a];
        }
      }
    }
    const BBox3d b = box_from_keypoints(joints);
    const double center[3] = {b.x, b.y, b.z};
    const double size[3] = {b.w, b.h, b.d};
    for (int a = 0; a < 3; ++a) {
      CHECK(center[a] == (lo[a] + hi[a]) / 2);
      CHECK(size[a] == hi[a] - lo[a]);
    }
    for (const auto & j : joints) {
      for (int a = 0; a < 3; ++a) {
        CHECK(j[a] >= center[a] - size[a] / 2 - 1e-12);
        CHECK(j[a] <= center[a] + size[a] / 2 + 1e-12);
      }
    }
  }
}

TEST_CASE("window_samples")
{
  CHECK(window_samples(contiguous("p", range(0, 20)), 4, 4, 1).size() == 13);
  CHECK(window_samples(contiguous("p", range(0, 8)), 4, 4, 1).size() == 1);
  CHECK(window_samples(contiguous("p", range(0, 7)), 4, 4, 1).empty());
  CHECK(window_samples({}, 4, 4, 1).empty());
  CHECK_THROWS_AS(window_samples({}, 1, 4, 1), ArgumentError);
  CHECK_THROWS_AS(window_samples({}, 4, 0, 1), ArgumentError);
  CHECK_THROWS_AS(window_samples({}, 4, 4, 0), ArgumentError);

  SUBCASE("window contents and ids")
  {
    const auto s = window_samples(contiguous("p", range(3, 13)), 3, 2, 1);
    REQUIRE(s.size() == 6);
    CHECK(s[2].id.start_frame == 5);
    CHECK(s[2].obs.size() == 3);
    CHECK(s[2].future.size() == 2);
    CHECK(s[2].obs[0].x == 5.0);
    CHECK(s[2].future[1].x == 9.0);
    CHECK_FALSE(s[2].attr_labels.has_value());
  }

  SUBCASE("gaps yield only gap-free windows")
  {
    auto frames = range(0, 6);
    for (int f : range(7, 15)) {
      frames.push_back(f);
    }
    // Segments of 6 and 8 frames: 0 + 2 windows of length 7.
    const auto s = window_samples(contiguous("p", frames), 4, 3, 1);
    REQUIRE(s.size() == 2);
    CHECK(s[0].id.start_frame == 7);
    CHECK(s[1].id.start_frame == 8);
  }

  SUBCASE("stride")
  {
    const auto s = window_samples(contiguous("p", range(0, 20)), 2, 2, 3);
    // Starts 0, 3, ..., 9 reach frame start + 9 <= 19.
    REQUIRE(s.size() == 4);
    for (const Sample & w : s) {
      CHECK(w.id.start_frame % 3 == 0);
      CHECK(w.future[1].x - w.obs[0].x == 9.0);
    }
  }

  SUBCASE("pedestrians are windowed separately")
  {
    auto tracks = contiguous("a", range(0, 8));
    const auto b = contiguous("b", range(8, 16));
    tracks.insert(tracks.end(), b.begin(), b.end());
    const auto s = window_samples(tracks, 4, 4, 1);
    REQUIRE(s.size() == 2);
    CHECK(s[0].id.ped_id == "a");
    CHECK(s[1].id.ped_id == "b");
  }

  SUBCASE("every window is strided and strictly increasing")
  {
    Rng rng(11);
    std::vector<int> frames;
    for (int f = 0; f < 200; ++f) {
      if (rng.uniform() < 0.85) {
        frames.push_back(f);
      }
    }
    const std::set<int> present(frames.begin(), frames.end());
    for (std::size_t stride : {1, 2, 5}) {
      for (const Sample & w : window_samples(contiguous("p", frames), 3, 2, stride)) {
        std::vector<double> xs;
        for (const auto & b : w.obs) {
          xs.push_back(b.x);
        }
        for (const auto & b : w.future) {
          xs.push_back(b.x);
        }
        for (std::size_t k = 0; k < xs.size(); ++k) {
          CHECK(xs[k] == static_cast<double>(w.id.start_frame) + static_cast<double>(k * stride));
          CHECK(present.count(static_cast<int>(xs[k])) == 1);
        }
      }
    }
  }

  SUBCASE("labels need every future frame labelled")
  {
    auto tracks = contiguous("p", range(0, 6));
    for (auto & r : tracks) {
      r.attr = static_cast<std::size_t>(r.frame % 3);
    }
    tracks[5].attr.reset();
    const auto s = window_samples(tracks, 2, 2, 1);
    REQUIRE(s.size() == 3);
    REQUIRE(s[0].attr_labels.has_value());
    CHECK(*s[0].attr_labels == std::vector<std::size_t>{2, 0});
    CHECK(s[1].attr_labels.has_value());
    CHECK_FALSE(s[2].attr_labels.has_value());
  }

  SUBCASE("observation windows")
  {
    const auto s = observation_windows(contiguous("p", range(0, 6)), 4, 1);
    REQUIRE(s.size() == 3);
    CHECK(s[0].future.empty());
  }
}

TEST_CASE("synth_generate")
{
  SUBCASE("constant velocity at 1 m/s, 2 fps steps 0.5 m")
  {
    SynthSpec spec;
    spec.n_tracks = 20;
    spec.speed_min = spec.speed_max = 1.0;
    const auto records = synth_generate(spec);
    REQUIRE(records.size() == 20 * 16);
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].ped_id != records[i - 1].ped_id) {
        continue;
      }
      const double dx = records[i].box.x - records[i - 1].box.x;
      const double dz = records[i].box.z - records[i - 1].box.z;
      CHECK(std::abs(std::hypot(dx, dz) - 0.5) < 1e-8);
      CHECK(records[i].box.y == records[i - 1].box.y);
      CHECK(records[i].attr == std::optional<std::size_t>{kMoving});
    }
  }

  SUBCASE("noise-free constant velocity differences are exactly constant")
  {
    SynthSpec spec;
    spec.n_tracks = 30;
    spec.seed = 5;
    const auto records = synth_generate(spec);
    std::size_t begin = 0;
    while (begin < records.size()) {
      std::size_t end = begin;
      std::vector<BBox3d> track;
      while (end < records.size() && records[end].ped_id == records[begin].ped_id) {
        track.push_back(records[end].box);
        ++end;
      }
      const auto v = to_velocities(track);
      for (const auto & step : v) {
        CHECK(step == v.front());
      }
      begin = end;
    }
  }

  SUBCASE("standing tracks are stationary")
  {
    SynthSpec spec;
    spec.n_tracks = 10;
    spec.p_constant = 0.0;
    spec.p_standing = 1.0;
    const auto records = synth_generate(spec);
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].ped_id == records[i - 1].ped_id) {
        CHECK(records[i].box == records[i - 1].box);
      }
      CHECK(records[i].attr == std::optional<std::size_t>{kStanding});
    }
  }

  SUBCASE("sitting flag shortens standing boxes")
  {
    SynthSpec spec;
    spec.n_tracks = 200;
    spec.p_constant = 0.5;
    spec.p_standing = 0.5;
    spec.sitting_fraction = 0.5;
    std::map<std::size_t, std::size_t> seen;
    for (const auto & r : synth_generate(spec)) {
      ++seen[*r.attr];
      if (*r.attr == kSitting) {
        CHECK(r.box.h < 0.55 * spec.height_max + 1e-9);
      } else {
        CHECK(r.box.h >= spec.height_min - 1e-9);
      }
    }
    CHECK(seen.size() == 3);
  }

  SUBCASE("deterministic under the seed")
  {
    SynthSpec spec;
    spec.n_tracks = 40;
    spec.p_constant = 0.25;
    spec.p_stop_and_go = 0.25;
    spec.p_turning = 0.25;
    spec.p_standing = 0.25;
    spec.noise_sigma = 0.05;
    spec.seed = 9;
    const auto a = synth_generate(spec);
    const auto b = synth_generate(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].box == b[i].box);
      CHECK(a[i].attr == b[i].attr);
      CHECK(a[i].ped_id == b[i].ped_id);
    }
    spec.seed = 10;
    CHECK_FALSE(synth_generate(spec)[0].box == a[0].box);
  }

  SUBCASE("regime mix")
  {
    SynthSpec spec;
    spec.n_tracks = 2000;
    spec.p_constant = 0.1;
    spec.p_stop_and_go = 0.2;
    spec.p_turning = 0.3;
    spec.p_standing = 0.4;
    std::map<Regime, double> share;
    for (std::size_t i = 0; i < spec.n_tracks; ++i) {
      share[synth_regime(spec, i)] += 1.0 / static_cast<double>(spec.n_tracks);
    }
    CHECK(share[Regime::kConstantVelocity] == doctest::Approx(0.1).epsilon(0.3));
    CHECK(share[Regime::kStopAndGo] == doctest::Approx(0.2).epsilon(0.2));
    CHECK(share[Regime::kTurning] == doctest::Approx(0.3).epsilon(0.15));
    CHECK(share[Regime::kStanding] == doctest::Approx(0.4).epsilon(0.15));
  }

  SUBCASE("labels follow the 0.2 m/s speed threshold")
  {
    SynthSpec spec;
    spec.n_tracks = 50;
    spec.p_constant = 0.0;
    spec.p_stop_and_go = 1.0;
    const auto records = synth_generate(spec);
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].ped_id != records[i - 1].ped_id) {
        continue;
      }
      const double speed = std::hypot(
        records[i].box.x - records[i - 1].box.x, records[i].box.z - records[i - 1].box.z) * spec.fps;
      CHECK(records[i].attr == std::optional<std::size_t>{speed < kStandingSpeed ? kStanding : kMoving});
    }
  }

  SUBCASE("headings stay inside the configured range")
  {
    SynthSpec spec;
    spec.n_tracks = 40;
    spec.heading_min = -0.5;
    spec.heading_max = 0.5;
    const auto records = synth_generate(spec);
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].ped_id != records[i - 1].ped_id) {
        continue;
      }
      const double heading =
        std::atan2(records[i].box.z - records[i - 1].box.z, records[i].box.x - records[i - 1].box.x);
      CHECK(heading >= -0.5 - 1e-6);
      CHECK(heading <= 0.5 + 1e-6);
    }
  }

  SUBCASE("invalid specs")
  {
    SynthSpec spec;
    spec.p_constant = 0.5;
    spec.p_standing = 0.4;
    CHECK_THROWS_AS(synth_generate(spec), ArgumentError);
    spec.p_standing = 0.5;
    spec.noise_sigma = -1;
    CHECK_THROWS_AS(synth_generate(spec), ArgumentError);
    spec.noise_sigma = 0.0;
    spec.heading_min = 1.0;
    spec.heading_max = 0.5;
    CHECK_THROWS_AS(synth_generate(spec), ArgumentError);
  }

  SUBCASE("key-value spec")
  {
    std::istringstream in("n_tracks = 3\np_constant = 0.5\np_turning = 0.5 # mixed\nseed = 4\n");
    const SynthSpec spec = SynthSpec::from_config(KvConfig::parse(in, "spec"));
    CHECK(spec.n_tracks == 3);
    CHECK(spec.p_turning == 0.5);
    CHECK(spec.seed == 4);
    std::istringstream bad("n_trucks = 3\n");
    CHECK_THROWS_AS(SynthSpec::from_config(KvConfig::parse(bad, "spec")), ParseError);
  }
}

TEST_CASE("balance_classes")
{
  std::vector<Sample> samples;
  const std::size_t counts[] = {100, 50, 50};
  std::int64_t tag = 0;
  for (std::size_t round = 0; round < 100; ++round) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (round < counts[c]) {
        samples.push_back(labelled(c, tag++));
      }
    }
  }

  const auto balanced = balance_classes(samples, 3, 1);
  CHECK(final_counts(balanced, 3) == std::vector<std::size_t>{50, 50, 50});

  SUBCASE("output is an order-preserving subset")
  {
    std::int64_t last = -1;
    for (const Sample & s : balanced) {
      CHECK(s.id.start_frame > last);
      last = s.id.start_frame;
      const auto it = std::find_if(samples.begin(), samples.end(), [&](const Sample & o) {
        return o.id == s.id;
      });
      REQUIRE(it != samples.end());
      CHECK(it->attr_labels == s.attr_labels);
    }
  }

  SUBCASE("balanced input is unchanged")
  {
    const auto again = balance_classes(balanced, 3, 77);
    REQUIRE(again.size() == balanced.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
      CHECK(again[i].id == balanced[i].id);
    }
  }

  SUBCASE("survivors are reproducible under the seed")
  {
    std::vector<Sample> small;
    for (std::size_t i = 0; i < 13; ++i) {
      small.push_back(labelled(i < 7 ? 0 : (i < 10 ? 1 : 2), static_cast<std::int64_t>(i)));
    }
    auto ids = [](const std::vector<Sample> & v) {
      std::vector<std::int64_t> out;
      for (const auto & s : v) {
        out.push_back(s.id.start_frame);
      }
      return out;
    };
    CHECK(ids(balance_classes(small, 3, 42)) == ids(balance_classes(small, 3, 42)));
    CHECK(balance_classes(small, 3, 42).size() == 9);
    std::set<std::vector<std::int64_t>> distinct;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      distinct.insert(ids(balance_classes(small, 3, seed)));
    }
    CHECK(distinct.size() > 1);
  }

  SUBCASE("empty class is an error listing counts")
  {
    std::vector<Sample> two{labelled(0, 0), labelled(1, 1)};
    try {
      balance_classes(two, 3, 0);
      FAIL("expected ArgumentError");
    } catch (const ArgumentError & e) {
      CHECK(std::string(e.what()).find("(1, 1, 0)") != std::string::npos);
    }
  }

  SUBCASE("unlabelled samples are rejected")
  {
    std::vector<Sample> s{labelled(0, 0)};
    s[0].attr_labels.reset();
    CHECK_THROWS_AS(balance_classes(s, 1, 0), ArgumentError);
  }
}

TEST_CASE("split_by_scene")
{
  SynthSpec spec;
  spec.n_tracks = 50;
  const auto records = synth_generate(spec);
  const TrackSplit split = split_by_scene(records, 0.2, 0.2, 3);
  CHECK(split.train.size() + split.val.size() + split.test.size() == records.size());

  auto scenes = [](const std::vector<TrackRecord> & v) {
    std::set<std::string> s;
    for (const auto & r : v) {
      s.insert(r.scene_id);
    }
    return s;
  };
  const auto tr = scenes(split.train);
  const auto va = scenes(split.val);
  const auto te = scenes(split.test);
  CHECK(tr.size() == 30);
  CHECK(va.size() == 10);
  CHECK(te.size() == 10);
  for (const auto & s : va) {
    CHECK(tr.count(s) == 0);
    CHECK(te.count(s) == 0);
  }
  for (const auto & s : te) {
    CHECK(tr.count(s) == 0);
  }
  CHECK(scenes(split_by_scene(records, 0.2, 0.2, 3).val) == va);
  CHECK_THROWS_AS(split_by_scene(records, 0.6, 0.4, 0), ArgumentError);
}

TEST_CASE("window presets")
{
  const auto jta = window_preset("jta");
  CHECK(jta.fps == 30.0);
  CHECK(jta.t_obs == 15);
  CHECK(jta.t_pred == 15);
  CHECK(window_preset("jta-long").t_pred == 60);
  const auto nu = window_preset("nuscenes");
  CHECK(nu.fps == 2.0);
  CHECK(nu.t_obs == 4);
  CHECK(nu.t_pred == 4);
  CHECK_THROWS_AS(window_preset("kitti"), ArgumentError);
}
