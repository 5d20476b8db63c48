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

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "pvlstm/checkpoint.hpp"
#include "pvlstm/errors.hpp"
#include "pvlstm/metrics.hpp"
#include "pvlstm/model.hpp"
#include "pvlstm/rng.hpp"

using namespace pvlstm;

namespace
{

std::vector<BBox3d> random_window(Rng & rng, std::size_t n)
{
  std::vector<BBox3d> w;
  BBox3d b{rng.uniform(-5, 5), rng.uniform(0, 1), rng.uniform(5, 20), 0.5, 1.7, 0.4};
  for (std::size_t t = 0; t < n; ++t) {
    w.push_back(b);
    b = b + Velocity6{rng.uniform(-0.5, 0.5), rng.uniform(-0.05, 0.05), rng.uniform(-0.5, 0.5),
                      rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01)};
  }
  return w;
}

// Unit-scale window: keeps every gate away from saturation.
std::vector<BBox3d> unit_window(Rng & rng, std::size_t n)
{
  std::vector<BBox3d> w;
  BBox3d b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
           rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
  for (std::size_t t = 0; t < n; ++t) {
    w.push_back(b);
    b = b + Velocity6{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                      rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
  }
  return w;
}

ModelConfig small_config(bool pv, std::size_t classes)
{
  ModelConfig c;
  c.hidden = 5;
  c.t_obs = 4;
  c.t_pred = 3;
  c.use_velocity_encoder = pv;
  c.n_attr_classes = classes;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("to_velocities")
{
  const std::vector<BBox3d> seq{{0, 0, 0, 1, 2, 1}, {1, 0, 0, 1, 2, 1}, {3, 0, 0, 1, 2, 1}};
  const auto v = to_velocities(seq);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == Velocity6{1, 0, 0, 0, 0, 0});
  CHECK(v[1] == Velocity6{2, 0, 0, 0, 0, 0});
  const std::vector<BBox3d> still(5, BBox3d{1, 2, 3, 0.5, 1.8, 0.3});
  for (const auto & z : to_velocities(still)) {
    CHECK(z == Velocity6{});
  }
  CHECK_THROWS_AS(to_velocities(std::vector<BBox3d>(1)), ArgumentError);
}

TEST_CASE("integrate")
{
  const std::vector<Velocity6> vels(2, Velocity6{0.5, 0, 0, 0, 0, 0});
  const auto out = integrate({1, 1, 1, 1, 1, 1}, vels);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == BBox3d{1.5, 1, 1, 1, 1, 1});
  CHECK(out[1] == BBox3d{2, 1, 1, 1, 1, 1});
  CHECK(integrate({1, 1, 1, 1, 1, 1}, {}).empty());

  const std::vector<Velocity6> shrink{{0, 0, 0, -2, 0, 0}};
  const auto bad = integrate({0, 0, 0, 1, 1, 1}, shrink);
  CHECK(bad[0].w == -1.0);
  CHECK(invalid_boxes(bad) == std::vector<std::size_t>{0});
}

TEST_CASE("integrate inverts to_velocities")
{
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const auto seq = random_window(rng, 2 + rng.index(20));
    const auto back = integrate(seq.front(), to_velocities(seq));
    REQUIRE(back.size() == seq.size() - 1);
    for (std::size_t t = 0; t < back.size(); ++t) {
      const auto a = back[t].as_array();
      const auto b = seq[t + 1].as_array();
      for (std::size_t c = 0; c < kBoxDim; ++c) {
        CHECK(std::abs(a[c] - b[c]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("config invariants")
{
  ModelConfig c;
  c.t_obs = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.t_obs = 2;
  c.t_pred = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.t_pred = 1;
  c.hidden = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("encode: fused dimensions follow the encoder set")
{
  ModelConfig c;
  c.hidden = 512;
  const PvLstmModel pv = PvLstmModel::zeros(c);
  Rng rng(1);
  const auto window = random_window(rng, c.t_obs);
  const LstmState fused = encode(pv, window);
  CHECK(fused.h.size() == 1024);
  CHECK(fused.c.size() == 1024);
  for (double v : fused.h) {
    REQUIRE(v == 0.0);
  }
  c.use_velocity_encoder = false;
  const PvLstmModel p = PvLstmModel::zeros(c);
  CHECK(encode(p, window).h.size() == 512);
  CHECK_FALSE(p.enc_v.has_value());
  for (const std::size_t hidden : {1, 3, 8}) {
    for (const bool use_v : {true, false}) {
      ModelConfig k = small_config(use_v, 0);
      k.hidden = hidden;
      CHECK(PvLstmModel::init(k).dec_v.hidden_dim == hidden * (use_v ? 2 : 1));
    }
  }
  CHECK_THROWS_AS(encode(pv, std::vector<BBox3d>(3)), ArgumentError);
}

TEST_CASE("decode_velocities")
{
  SUBCASE("zero decoder with a bias-only head emits the bias")
  {
    PvLstmModel m = PvLstmModel::init(small_config(true, 0));
    m.dec_v = LstmParams::zeros(kBoxDim, m.config.fused_dim());
    m.fc_v = Linear::zeros(m.config.fused_dim(), kBoxDim);
    m.fc_v.b = {0.1, -0.2, 0.3, 0.0, 0.05, -0.05};
    Rng rng(2);
    const auto window = random_window(rng, 4);
    const auto vels = decode_velocities(m, encode(m, window), window[3] - window[2]);
    REQUIRE(vels.size() == 3);
    for (const auto & v : vels) {
      CHECK(v == Velocity6::from(m.fc_v.b));
    }
  }
  SUBCASE("matches hand-threaded steps")
  {
    const PvLstmModel m = PvLstmModel::init(small_config(true, 0));
    Rng rng(3);
    const auto window = random_window(rng, 4);
    const LstmState fused = encode(m, window);
    const Velocity6 v_last = window[3] - window[2];
    const auto vels = decode_velocities(m, fused, v_last);

    std::vector<double> h = fused.h;
    std::vector<double> c = fused.c;
    auto x = v_last.as_array();
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> h2;
      std::vector<double> c2;
      oracle::lstm_step(m.dec_v, h, c, std::vector<double>(x.begin(), x.end()), h2, c2);
      h = h2;
      c = c2;
      std::array<double, kBoxDim> y{};
      for (std::size_t r = 0; r < kBoxDim; ++r) {
        y[r] = m.fc_v.b[r];
        for (std::size_t j = 0; j < h.size(); ++j) {
          y[r] += m.fc_v.w(r, j) * h[j];
        }
      }
      const auto got = vels[k].as_array();
      for (std::size_t r = 0; r < kBoxDim; ++r) {
        CHECK(got[r] == doctest::Approx(y[r]).epsilon(1e-12));
      }
      x = y;
    }
  }
  SUBCASE("single step consumes v_last")
  {
    ModelConfig cfg = small_config(false, 0);
    cfg.t_pred = 1;
    const PvLstmModel m = PvLstmModel::init(cfg);
    Rng rng(5);
    const auto window = random_window(rng, 4);
    const LstmState fused = encode(m, window);
    const Velocity6 v_last = window[3] - window[2];
    const auto v = decode_velocities(m, fused, v_last);
    REQUIRE(v.size() == 1);
    const auto s = lstm_step(m.dec_v, fused, v_last.as_array()).first;
    CHECK(v[0] == Velocity6::from(affine(m.fc_v.w, s.h, m.fc_v.b)));
  }
  SUBCASE("fused dimension mismatch")
  {
    const PvLstmModel m = PvLstmModel::init(small_config(true, 0));
    CHECK_THROWS_AS(decode_velocities(m, LstmState::zeros(5), {}), ShapeError);
  }
}

TEST_CASE("decode_attributes")
{
  const PvLstmModel zero = PvLstmModel::zeros(small_config(true, 3));
  Rng rng(6);
  const auto window = random_window(rng, 4);
  for (const Vector & p : decode_attributes(zero, encode(zero, window), window[3] - window[2])) {
    for (double v : p) {
      CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig cfg = small_config(trial % 2 == 0, 3);
    cfg.seed = trial;
    const PvLstmModel m = PvLstmModel::init(cfg);
    const auto w = random_window(rng, 4);
    const auto probs = decode_attributes(m, encode(m, w), w[3] - w[2]);
    CHECK(probs.size() == cfg.t_pred);
    for (const Vector & p : probs) {
      CHECK(p.size() == 3);
      double s = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  const PvLstmModel plain = PvLstmModel::init(small_config(true, 0));
  CHECK_THROWS_AS(decode_attributes(plain, encode(plain, window), {}), ConfigError);
}

TEST_CASE("predict and the zero-velocity baseline")
{
  Rng rng(7);
  const PvLstmModel zero = PvLstmModel::zeros(small_config(true, 3));
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = random_window(rng, 4);
    const Prediction p = predict(zero, w);
    CHECK(p.boxes == zero_vel_predict(w, 3));
    CHECK(p.attrs.has_value());
  }
  const PvLstmModel m = PvLstmModel::init(small_config(false, 0));
  const auto w = random_window(rng, 4);
  const Prediction p = predict(m, w);
  CHECK(p.boxes.size() == 3);
  CHECK_FALSE(p.attrs.has_value());

  const BBox3d last{1, 2, 3, 0.5, 1.7, 0.4};
  CHECK(zero_vel_predict(std::vector<BBox3d>{{}, last}, 4) == std::vector<BBox3d>(4, last));
  CHECK_THROWS_AS(zero_vel_predict({}, 4), ArgumentError);
}

TEST_CASE("zero-velocity displacement errors")
{
  const std::vector<BBox3d> still(4, BBox3d{0, 0, 10, 0.5, 1.7, 0.4});
  CHECK(ade_fde(zero_vel_predict(still, 4), still).ade == 0.0);

  const double s = 0.6;
  std::vector<BBox3d> window;
  std::vector<BBox3d> future;
  for (int t = 0; t < 4; ++t) {
    window.push_back({s * t, 0, 10, 0.5, 1.7, 0.4});
    future.push_back({s * (t + 4), 0, 10, 0.5, 1.7, 0.4});
  }
  // Distances s, 2s, 3s, 4s from the last observed center.
  CHECK(ade_fde(zero_vel_predict(window, 4), future).ade == doctest::Approx(2.5 * s).epsilon(1e-12));
}

TEST_CASE("backward matches finite differences on a projected output")
{
  for (const bool pv : {true, false}) {
    PvLstmModel m = PvLstmModel::init(small_config(pv, 3));
    Rng rng(8);
    const auto window = unit_window(rng, 4);
    std::vector<Vector> rv(3, Vector(kBoxDim));
    std::vector<Vector> rl(3, Vector(3));
    for (auto & r : rv) {
      for (double & x : r) {
        x = rng.uniform(-1, 1);
      }
    }
    for (auto & r : rl) {
      for (double & x : r) {
        x = rng.uniform(-1, 1);
      }
    }
    auto loss = [&] {
      const ForwardTape t = forward(m, window);
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t c = 0; c < kBoxDim; ++c) {
          s += rv[k][c] * t.velocities[k][c];
        }
        for (std::size_t c = 0; c < 3; ++c) {
          s += rl[k][c] * t.attr_logits[k][c];
        }
      }
      return s;
    };
    PvLstmModel grads = PvLstmModel::zeros(m.config);
    backward(m, forward(m, window), rv, rl, grads);
    const auto params = m.params();
    const auto analytic = grads.params();
    REQUIRE(params.size() == analytic.size());
    CHECK(grad_check(loss, params, analytic, 5e-3) < 1e-5);
  }
}

TEST_CASE("parameter naming is fixed")
{
  PvLstmModel m = PvLstmModel::init(small_config(true, 3));
  std::vector<std::string> names;
  std::size_t total = 0;
  for (const auto & p : m.params()) {
    names.push_back(p.name);
    total += p.values.size();
  }
  const std::vector<std::string> expected{
    "enc_p.w_ih", "enc_p.w_hh", "enc_p.b_ih", "enc_p.b_hh", "enc_v.w_ih", "enc_v.w_hh",
    "enc_v.b_ih", "enc_v.b_hh", "dec_v.w_ih", "dec_v.w_hh", "dec_v.b_ih", "dec_v.b_hh",
    "fc_v.w",     "fc_v.b",     "dec_a.w_ih", "dec_a.w_hh", "dec_a.b_ih", "dec_a.b_hh",
    "fc_a.w",     "fc_a.b"};
  CHECK(names == expected);
  CHECK(m.param_count() == total);
}

TEST_CASE("checkpoint round trip and config guard")
{
  PvLstmModel m = PvLstmModel::init(small_config(true, 3));
  const std::string text = checkpoint_to_string(m, {{"epoch", 3}});
  const LoadedCheckpoint back = checkpoint_from_string(text);
  CHECK(back.model == m);
  CHECK(back.meta.at("epoch") == 3);
  PvLstmModel copy = back.model;
  CHECK(checkpoint_to_string(copy, {{"epoch", 3}}) == text);

  const auto path = std::filesystem::temp_directory_path() / "pvlstm_test_ckpt.json";
  save_checkpoint(path, m);
  ModelConfig other = m.config;
  CHECK(load_checkpoint(path, &other).model == m);
  other.hidden = 6;
  CHECK_THROWS_AS(load_checkpoint(path, &other), ConfigError);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(checkpoint_from_string("{\"format\": \"other/9\"}"), ParseError);
  CHECK_THROWS_AS(checkpoint_from_string("not json"), ParseError);
}
