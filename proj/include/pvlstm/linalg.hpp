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

#ifndef PVLSTM__LINALG_HPP_
#define PVLSTM__LINALG_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pvlstm
{

using Vector = std::vector<double>;

/**
 * @brief Dense row-major matrix of doubles.
 *
 * The storage layout is part of the checkpoint format: element (r, c) lives at
 * data()[r * cols() + c].
 */
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major data; throws ShapeError if the size is wrong
  /// and NumericError if any entry is not finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double & operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::string shape_string() const;

  friend bool operator==(const Matrix &, const Matrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix & a, const Matrix & b);

/// Wx + b.
Vector affine(const Matrix & w, std::span<const double> x, std::span<const double> b);

/// Allocation-free variant of affine() for hot loops; `out` must have w.rows() entries.
void affine_into(
  const Matrix & w, std::span<const double> x, std::span<const double> b, std::span<double> out);

/// out += Wᵀ g
void transposed_accumulate(const Matrix & w, std::span<const double> g, std::span<double> out);

/// W += g xᵀ
void outer_accumulate(Matrix & w, std::span<const double> g, std::span<const double> x);

Vector concat(std::span<const double> a, std::span<const double> b);

/// Throws NumericError naming `what` if any entry is NaN or Inf.
void require_finite(std::span<const double> v, const std::string & what);

}  // namespace pvlstm

#endif  // PVLSTM__LINALG_HPP_
