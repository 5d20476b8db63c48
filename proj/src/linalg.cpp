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

#include "pvlstm/linalg.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "pvlstm/errors.hpp"

namespace pvlstm
{

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
: rows_(rows), cols_(cols), data_(rows * cols, fill)
{
  require_finite(std::span<const double>(&fill, 1), "matrix fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
: rows_(rows), cols_(cols), data_(std::move(data))
{
  if (data_.size() != rows_ * cols_) {
    std::ostringstream msg;
    msg << "matrix data has " << data_.size() << " entries, expected " << rows_ << "x" << cols_;
    throw ShapeError(msg.str());
  }
  require_finite(data_, "matrix data");
}

Matrix Matrix::identity(std::size_t n)
{
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

std::string Matrix::shape_string() const
{
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Matrix matmul(const Matrix & a, const Matrix & b)
{
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  require_finite(out.values(), "matmul result");
  return out;
}

void affine_into(
  const Matrix & w, std::span<const double> x, std::span<const double> b, std::span<double> out)
{
  if (w.cols() != x.size() || w.rows() != b.size() || out.size() != w.rows()) {
    throw ShapeError(
      "affine: W" + w.shape_string() + ", x(" + std::to_string(x.size()) + "), b(" +
      std::to_string(b.size()) + ")");
  }
  const std::size_t n = w.cols();
  const double * wp = w.values().data();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double * row = wp + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      acc += row[c] * x[c];
    }
    out[r] = acc + b[r];
  }
  require_finite(out, "affine result");
}

Vector affine(const Matrix & w, std::span<const double> x, std::span<const double> b)
{
  Vector out(w.rows());
  affine_into(w, x, b, out);
  return out;
}

void transposed_accumulate(const Matrix & w, std::span<const double> g, std::span<double> out)
{
  if (w.rows() != g.size() || w.cols() != out.size()) {
    throw ShapeError(
      "transposed_accumulate: W" + w.shape_string() + ", g(" + std::to_string(g.size()) +
      "), out(" + std::to_string(out.size()) + ")");
  }
  const std::size_t n = w.cols();
  const double * wp = w.values().data();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) {
      continue;
    }
    const double * row = wp + r * n;
    for (std::size_t c = 0; c < n; ++c) {
      out[c] += gr * row[c];
    }
  }
}

void outer_accumulate(Matrix & w, std::span<const double> g, std::span<const double> x)
{
  if (w.rows() != g.size() || w.cols() != x.size()) {
    throw ShapeError(
      "outer_accumulate: W" + w.shape_string() + ", g(" + std::to_string(g.size()) + "), x(" +
      std::to_string(x.size()) + ")");
  }
  const std::size_t n = w.cols();
  double * wp = w.values().data();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) {
      continue;
    }
    double * row = wp + r * n;
    for (std::size_t c = 0; c < n; ++c) {
      row[c] += gr * x[c];
    }
  }
}

Vector concat(std::span<const double> a, std::span<const double> b)
{
  Vector out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void require_finite(std::span<const double> v, const std::string & what)
{
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(what + ": non-finite entry at index " + std::to_string(i));
    }
  }
}

}  // namespace pvlstm
