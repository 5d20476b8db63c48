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

#ifndef PVLSTM__NN_HPP_
#define PVLSTM__NN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvlstm/linalg.hpp"

namespace pvlstm
{

/// Mutable view of one named parameter tensor. Vectors are reported as (n x 1).
struct ParamView
{
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<double> values;
};

/**
 * @brief Weights of a single-layer LSTM cell.
 *
 * Gate blocks are stacked along the rows of w_ih / w_hh / biases in the fixed
 * order input, forget, cell-candidate, output; each block has hidden_dim rows.
 * Checkpoints depend on this order.
 */
struct LstmParams
{
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix w_ih;  // 4H x D
  Matrix w_hh;  // 4H x H
  Vector b_ih;  // 4H
  Vector b_hh;  // 4H

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  /// Appends views named `<prefix>.w_ih`, `<prefix>.w_hh`, `<prefix>.b_ih`, `<prefix>.b_hh`.
  void collect(const std::string & prefix, std::vector<ParamView> & out);

  friend bool operator==(const LstmParams &, const LstmParams &) = default;
};

struct LstmState
{
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden_dim);
};

/// Everything the backward pass needs from one forward step.
struct StepCache
{
  Vector x;
  Vector h_prev;
  Vector c_prev;
  Vector gates;   // post-activation i, f, g, o (4H)
  Vector c;
  Vector tanh_c;
  Vector h;
};

/// Uniform U(-1/sqrt(H), 1/sqrt(H)) initialization from Rng(seed).
LstmParams lstm_init(std::uint64_t seed, std::size_t input_dim, std::size_t hidden_dim);

std::pair<LstmState, StepCache> lstm_step(
  const LstmParams & params, const LstmState & state, std::span<const double> x);

struct StepGrads
{
  Vector dx;
  Vector dh_prev;
  Vector dc_prev;
};

/// Reverse of one lstm_step. `dh` / `dc` are the loss gradients w.r.t. the step's
/// output h and c; parameter gradients are accumulated into `grads`.
StepGrads lstm_step_backward(
  const LstmParams & params, const StepCache & cache, std::span<const double> dh,
  std::span<const double> dc, LstmParams & grads);

struct LstmBackwardResult
{
  LstmParams param_grads;
  std::vector<Vector> grad_x;  // one per step
  LstmState grad_state0;
};

/**
 * @brief Backpropagation through time over a recorded sequence.
 *
 * @param grad_h_last gradient w.r.t. the final hidden state
 * @param grad_c_last gradient w.r.t. the final cell state (empty means zero)
 * @param per_step_grad_h optional extra gradients w.r.t. every step's hidden output
 */
LstmBackwardResult lstm_backward(
  const LstmParams & params, std::span<const StepCache> caches, std::span<const double> grad_h_last,
  std::span<const double> grad_c_last = {},
  const std::vector<Vector> * per_step_grad_h = nullptr);

/// Fully connected layer y = Wx + b.
struct Linear
{
  Matrix w;
  Vector b;

  static Linear zeros(std::size_t in_dim, std::size_t out_dim);
  void collect(const std::string & prefix, std::vector<ParamView> & out);

  friend bool operator==(const Linear &, const Linear &) = default;
};

Linear linear_init(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim);

Vector softmax(std::span<const double> z);

double logistic(double x);

/**
 * @brief Central finite-difference check of an analytic gradient.
 *
 * Each entry of `params` is perturbed by +-eps and +-2 eps in place (and
 * restored) while `loss` is re-evaluated; the numeric derivative is the
 * five-point central difference. Returns the maximum over entries of
 * |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
 * `analytic` must mirror `params` view-for-view.
 */
double grad_check(
  const std::function<double()> & loss, std::span<const ParamView> params,
  std::span<const ParamView> analytic, double eps);

}  // namespace pvlstm

#endif  // PVLSTM__NN_HPP_
