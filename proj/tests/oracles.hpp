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

// Test-only reference implementations. Nothing here calls into the code paths
// it is used to check.

#ifndef PVLSTM_TESTS__ORACLES_HPP_
#define PVLSTM_TESTS__ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "pvlstm/nn.hpp"

namespace oracle
{

/// Central finite differences of `loss` w.r.t. every entry of `values`.
inline std::vector<double> fd_gradient(
  const std::function<double()> & loss, std::span<double> values, double eps = 1e-5)
{
  std::vector<double> g(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double saved = values[k];
    values[k] = saved + eps;
    const double up = loss();
    values[k] = saved - eps;
    const double down = loss();
    values[k] = saved;
    g[k] = (up - down) / (2.0 * eps);
  }
  return g;
}

inline double max_rel_error(std::span<const double> analytic, std::span<const double> numeric)
{
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double denom = std::max(1e-8, std::abs(analytic[k]) + std::abs(numeric[k]));
    worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / denom);
  }
  return worst;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Textbook LSTM step written with explicit index arithmetic (gate order i, f, g, o).
inline void lstm_step(
  const pvlstm::LstmParams & p, const std::vector<double> & h, const std::vector<double> & c,
  const std::vector<double> & x, std::vector<double> & h_out, std::vector<double> & c_out)
{
  const std::size_t H = p.hidden_dim;
  const std::size_t D = p.input_dim;
  auto pre = [&](std::size_t row) {
    double s = p.b_ih[row] + p.b_hh[row];
    for (std::size_t j = 0; j < D; ++j) {
      s += p.w_ih(row, j) * x[j];
    }
    for (std::size_t j = 0; j < H; ++j) {
      s += p.w_hh(row, j) * h[j];
    }
    return s;
  };
  h_out.assign(H, 0.0);
  c_out.assign(H, 0.0);
  for (std::size_t k = 0; k < H; ++k) {
    const double i = sigmoid(pre(k));
    const double f = sigmoid(pre(H + k));
    const double g = std::tanh(pre(2 * H + k));
    const double o = sigmoid(pre(3 * H + k));
    c_out[k] = f * c[k] + i * g;
    h_out[k] = o * std::tanh(c_out[k]);
  }
}

}  // namespace oracle

#endif  // PVLSTM_TESTS__ORACLES_HPP_
