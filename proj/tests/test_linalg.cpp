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

#include "pvlstm/errors.hpp"
#include "pvlstm/linalg.hpp"
#include "pvlstm/rng.hpp"

using namespace pvlstm;

namespace
{

Matrix random_matrix(Rng & rng, std::size_t r, std::size_t c)
{
  Matrix m(r, c);
  for (double & v : m.values()) {
    v = rng.uniform(-1.0, 1.0);
  }
  return m;
}

}  // namespace

TEST_CASE("matmul: identity, hand product, annihilator")
{
  Rng rng(1);
  const Matrix m = random_matrix(rng, 3, 3);
  CHECK(matmul(Matrix::identity(3), m) == m);

  const Matrix a(2, 2, {1, 2, 3, 4});
  const Matrix b(2, 1, {0, 1});
  CHECK(matmul(a, b) == Matrix(2, 1, {2, 4}));

  CHECK(matmul(Matrix(3, 3), m) == Matrix(3, 3));
}

TEST_CASE("matmul: shape error names both shapes")
{
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL("expected ShapeError");
  } catch (const ShapeError & e) {
    CHECK(std::string(e.what()).find("(2x3) x (2x3)") != std::string::npos);
  }
}

TEST_CASE("matmul associativity on random triples")
{
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + rng.index(6);
    const std::size_t q = 1 + rng.index(6);
    const std::size_t r = 1 + rng.index(6);
    const std::size_t s = 1 + rng.index(6);
    const Matrix a = random_matrix(rng, p, q);
    const Matrix b = random_matrix(rng, q, r);
    const Matrix c = random_matrix(rng, r, s);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    for (std::size_t k = 0; k < left.size(); ++k) {
      const double scale = std::max(1.0, std::abs(left.values()[k]));
      CHECK(std::abs(left.values()[k] - right.values()[k]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("affine")
{
  const Vector v{0.25, -3.0, 7.5};
  CHECK(affine(Matrix::identity(3), v, Vector(3, 0.0)) == v);
  CHECK(affine(Matrix(2, 5), Vector(5, 9.0), Vector{1, 2}) == Vector{1, 2});
  CHECK(affine(Matrix(2, 2, {2, 0, 0, 3}), Vector{1, 1}, Vector{1, 1}) == Vector{3, 4});
  CHECK_THROWS_AS(affine(Matrix(2, 2), Vector(3, 0.0), Vector(2, 0.0)), ShapeError);
  CHECK_THROWS_AS(affine(Matrix(2, 2), Vector(2, 0.0), Vector(3, 0.0)), ShapeError);
}

TEST_CASE("concat")
{
  CHECK(concat(Vector{1, 2}, Vector{3}) == Vector{1, 2, 3});
  CHECK(concat(Vector{}, Vector{4, 5}) == Vector{4, 5});
  CHECK(concat(Vector(512, 1.0), Vector(512, 2.0)).size() == 1024);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a(rng.index(10), 1.0);
    const Vector b(rng.index(10), 2.0);
    CHECK(concat(a, b).size() == a.size() + b.size());
  }
}

TEST_CASE("non-finite values are rejected")
{
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), NumericError);
  CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1.0}), ShapeError);
  const Matrix big(1, 2, {1e308, 1e308});
  CHECK_THROWS_AS(affine(big, Vector{10, 10}, Vector{0}), NumericError);
}

TEST_CASE("transposed and outer accumulation match explicit loops")
{
  Rng rng(5);
  const Matrix w = random_matrix(rng, 4, 3);
  const Vector g{0.5, -1.0, 2.0, 0.0};
  Vector out(3, 1.0);
  transposed_accumulate(w, g, out);
  for (std::size_t c = 0; c < 3; ++c) {
    double expect = 1.0;
    for (std::size_t r = 0; r < 4; ++r) {
      expect += w(r, c) * g[r];
    }
    CHECK(out[c] == doctest::Approx(expect).epsilon(1e-14));
  }
  Matrix acc(4, 3);
  const Vector x{1.0, 2.0, 3.0};
  outer_accumulate(acc, g, x);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(acc(r, c) == g[r] * x[c]);
    }
  }
}
