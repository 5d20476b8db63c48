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

#ifndef PVLSTM__ERRORS_HPP_
#define PVLSTM__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pvlstm
{

/// Operand shapes disagree.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on an argument value does not hold.
class ArgumentError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A model or training configuration is inconsistent with the requested operation.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A computation produced NaN or Inf.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Training aborted (non-finite loss or gradient).
class TrainingError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input file could not be parsed.
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pvlstm

#endif  // PVLSTM__ERRORS_HPP_
