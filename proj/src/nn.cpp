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

#include "pvlstm/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"

namespace pvlstm
{

namespace
{

std::string dims(std::size_t n) { return "(" + std::to_string(n) + ")"; }

void fill_uniform(Rng & rng, std::span<double> v, double bound)
{
  for (double & x : v) {
    x = rng.uniform(-bound, bound);
  }
}

}  // namespace

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim)
{
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_ih = Matrix(4 * hidden_dim, input_dim);
  p.w_hh = Matrix(4 * hidden_dim, hidden_dim);
  p.b_ih.assign(4 * hidden_dim, 0.0);
  p.b_hh.assign(4 * hidden_dim, 0.0);
  return p;
}

void LstmParams::collect(const std::string & prefix, std::vector<ParamView> & out)
{
  out.push_back({prefix + ".w_ih", w_ih.rows(), w_ih.cols(), w_ih.values()});
  out.push_back({prefix + ".w_hh", w_hh.rows(), w_hh.cols(), w_hh.values()});
  out.push_back({prefix + ".b_ih", b_ih.size(), 1, b_ih});
  out.push_back({prefix + ".b_hh", b_hh.size(), 1, b_hh});
}

LstmState LstmState::zeros(std::size_t hidden_dim)
{
  return {Vector(hidden_dim, 0.0), Vector(hidden_dim, 0.0)};
}

LstmParams lstm_init(std::uint64_t seed, std::size_t input_dim, std::size_t hidden_dim)
{
  if (input_dim == 0 || hidden_dim == 0) {
    throw ArgumentError(
      "lstm_init: dimensions must be positive, got D=" + std::to_string(input_dim) +
      " H=" + std::to_string(hidden_dim));
  }
  LstmParams p = LstmParams::zeros(input_dim, hidden_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  Rng rng(seed);
  fill_uniform(rng, p.w_ih.values(), bound);
  fill_uniform(rng, p.w_hh.values(), bound);
  fill_uniform(rng, p.b_ih, bound);
  fill_uniform(rng, p.b_hh, bound);
  return p;
}

std::pair<LstmState, StepCache> lstm_step(
  const LstmParams & params, const LstmState & state, std::span<const double> x)
{
  const std::size_t hd = params.hidden_dim;
  if (x.size() != params.input_dim) {
    throw ShapeError("lstm_step: input " + dims(x.size()) + ", expected " + dims(params.input_dim));
  }
  if (state.h.size() != hd || state.c.size() != hd) {
    throw ShapeError(
      "lstm_step: state h" + dims(state.h.size()) + " c" + dims(state.c.size()) +
      ", expected " + dims(hd));
  }

  StepCache cache;
  cache.x.assign(x.begin(), x.end());
  cache.h_prev = state.h;
  cache.c_prev = state.c;
  cache.gates.assign(4 * hd, 0.0);
  Vector recurrent(4 * hd);
  affine_into(params.w_ih, x, params.b_ih, cache.gates);
  affine_into(params.w_hh, state.h, params.b_hh, recurrent);

  cache.c.resize(hd);
  cache.tanh_c.resize(hd);
  cache.h.resize(hd);
  for (std::size_t k = 0; k < hd; ++k) {
    const double i = logistic(cache.gates[k] + recurrent[k]);
    const double f = logistic(cache.gates[hd + k] + recurrent[hd + k]);
    const double g = std::tanh(cache.gates[2 * hd + k] + recurrent[2 * hd + k]);
    const double o = logistic(cache.gates[3 * hd + k] + recurrent[3 * hd + k]);
    cache.gates[k] = i;
    cache.gates[hd + k] = f;
    cache.gates[2 * hd + k] = g;
    cache.gates[3 * hd + k] = o;
    cache.c[k] = f * state.c[k] + i * g;
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = o * cache.tanh_c[k];
  }
  LstmState next{cache.h, cache.c};
  return {std::move(next), std::move(cache)};
}

StepGrads lstm_step_backward(
  const LstmParams & params, const StepCache & cache, std::span<const double> dh,
  std::span<const double> dc, LstmParams & grads)
{
  const std::size_t hd = params.hidden_dim;
  if (dh.size() != hd || (!dc.empty() && dc.size() != hd) || cache.h.size() != hd ||
      cache.x.size() != params.input_dim) {
    throw ShapeError(
      "lstm_step_backward: dh" + dims(dh.size()) + " dc" + dims(dc.size()) + " cache h" +
      dims(cache.h.size()) + " for H=" + std::to_string(hd));
  }
  if (grads.hidden_dim != hd || grads.input_dim != params.input_dim) {
    throw ShapeError("lstm_step_backward: gradient buffer shape does not match parameters");
  }

  Vector dpre(4 * hd);
  StepGrads out;
  out.dc_prev.resize(hd);
  for (std::size_t k = 0; k < hd; ++k) {
    const double i = cache.gates[k];
    const double f = cache.gates[hd + k];
    const double g = cache.gates[2 * hd + k];
    const double o = cache.gates[3 * hd + k];
    const double tc = cache.tanh_c[k];
    const double dck = (dc.empty() ? 0.0 : dc[k]) + dh[k] * o * (1.0 - tc * tc);
    dpre[k] = dck * g * i * (1.0 - i);
    dpre[hd + k] = dck * cache.c_prev[k] * f * (1.0 - f);
    dpre[2 * hd + k] = dck * i * (1.0 - g * g);
    dpre[3 * hd + k] = dh[k] * tc * o * (1.0 - o);
    out.dc_prev[k] = dck * f;
  }

  outer_accumulate(grads.w_ih, dpre, cache.x);
  outer_accumulate(grads.w_hh, dpre, cache.h_prev);
  for (std::size_t r = 0; r < 4 * hd; ++r) {
    grads.b_ih[r] += dpre[r];
    grads.b_hh[r] += dpre[r];
  }
  out.dx.assign(params.input_dim, 0.0);
  out.dh_prev.assign(hd, 0.0);
  transposed_accumulate(params.w_ih, dpre, out.dx);
  transposed_accumulate(params.w_hh, dpre, out.dh_prev);
  return out;
}

LstmBackwardResult lstm_backward(
  const LstmParams & params, std::span<const StepCache> caches, std::span<const double> grad_h_last,
  std::span<const double> grad_c_last, const std::vector<Vector> * per_step_grad_h)
{
  const std::size_t hd = params.hidden_dim;
  if (caches.empty()) {
    throw ShapeError("lstm_backward: empty cache sequence");
  }
  if (grad_h_last.size() != hd || (!grad_c_last.empty() && grad_c_last.size() != hd)) {
    throw ShapeError(
      "lstm_backward: final-state gradient h" + dims(grad_h_last.size()) + " c" +
      dims(grad_c_last.size()) + " for H=" + std::to_string(hd));
  }
  if (per_step_grad_h != nullptr && per_step_grad_h->size() != caches.size()) {
    throw ShapeError(
      "lstm_backward: " + std::to_string(per_step_grad_h->size()) + " per-step gradients for " +
      std::to_string(caches.size()) + " steps");
  }

  LstmBackwardResult result;
  result.param_grads = LstmParams::zeros(params.input_dim, hd);
  result.grad_x.resize(caches.size());

  Vector dh(grad_h_last.begin(), grad_h_last.end());
  Vector dc = grad_c_last.empty() ? Vector(hd, 0.0) : Vector(grad_c_last.begin(), grad_c_last.end());
  for (std::size_t t = caches.size(); t-- > 0;) {
    if (per_step_grad_h != nullptr) {
      const Vector & extra = (*per_step_grad_h)[t];
      if (extra.size() != hd) {
        throw ShapeError("lstm_backward: per-step gradient " + std::to_string(t) + " has wrong size");
      }
      for (std::size_t k = 0; k < hd; ++k) {
        dh[k] += extra[k];
      }
    }
    StepGrads step = lstm_step_backward(params, caches[t], dh, dc, result.param_grads);
    result.grad_x[t] = std::move(step.dx);
    dh = std::move(step.dh_prev);
    dc = std::move(step.dc_prev);
  }
  result.grad_state0 = {std::move(dh), std::move(dc)};
  return result;
}

Linear Linear::zeros(std::size_t in_dim, std::size_t out_dim)
{
  return {Matrix(out_dim, in_dim), Vector(out_dim, 0.0)};
}

void Linear::collect(const std::string & prefix, std::vector<ParamView> & out)
{
  out.push_back({prefix + ".w", w.rows(), w.cols(), w.values()});
  out.push_back({prefix + ".b", b.size(), 1, b});
}

Linear linear_init(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim)
{
  if (in_dim == 0 || out_dim == 0) {
    throw ArgumentError("linear_init: dimensions must be positive");
  }
  Linear layer = Linear::zeros(in_dim, out_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  Rng rng(seed);
  fill_uniform(rng, layer.w.values(), bound);
  fill_uniform(rng, layer.b, bound);
  return layer;
}

Vector softmax(std::span<const double> z)
{
  if (z.empty()) {
    throw ArgumentError("softmax: empty input");
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  Vector out(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = std::exp(z[k] - zmax);
    sum += out[k];
  }
  for (double & p : out) {
    p /= sum;
  }
  return out;
}

namespace {
constexpr double kStencil[4] = {2.0, 1.0, -1.0, -2.0};
}  // namespace

double grad_check(
  const std::function<double()> & loss, std::span<const ParamView> params,
  std::span<const ParamView> analytic, double eps)
{
  if (!(eps > 0.0 && eps <= 1e-2)) {
    throw ArgumentError("grad_check: eps must lie in (0, 1e-2], got " + std::to_string(eps));
  }
  if (params.size() != analytic.size()) {
    throw ShapeError("grad_check: parameter and gradient lists differ in length");
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const ParamView & view = params[p];
    if (view.values.size() != analytic[p].values.size()) {
      throw ShapeError("grad_check: gradient for " + view.name + " has wrong size");
    }
    for (std::size_t k = 0; k < view.values.size(); ++k) {
      const double saved = view.values[k];
      double probe[4];
      for (int j = 0; j < 4; ++j) {
        view.values[k] = saved + kStencil[j] * eps;
        probe[j] = loss();
      }
      view.values[k] = saved;
      for (double v : probe) {
        if (!std::isfinite(v)) {
          throw NumericError(
            "grad_check: non-finite loss while perturbing " + view.name + "[" + std::to_string(k) +
            "]");
        }
      }
      // Fourth-order central difference; truncation error O(eps^4).
      const double numeric = (8.0 * (probe[1] - probe[2]) - (probe[0] - probe[3])) / (12.0 * eps);
      const double exact = analytic[p].values[k];
      const double denom = std::max(1e-8, std::abs(exact) + std::abs(numeric));
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace pvlstm
