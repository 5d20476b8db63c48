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

#ifndef PVLSTM__RNG_HPP_
#define PVLSTM__RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace pvlstm
{

/**
 * @brief Seeded mt19937_64 with portable real-valued draws.
 *
 * The std:: distributions are implementation-defined, so uniform and normal
 * variates are derived from the raw 64-bit engine output here. Any conforming
 * standard library yields the same sequence for the same seed.
 */
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n); n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (the second variate is cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Independent child seed for stream `index` (splitmix64 mixing of seed and index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace pvlstm

#endif  // PVLSTM__RNG_HPP_
