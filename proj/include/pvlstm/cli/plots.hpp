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


#ifndef PVLSTM__CLI__PLOTS_HPP_
#define PVLSTM__CLI__PLOTS_HPP_

#include <string>
#include <utility>
#include <vector>

namespace pvlstm::cli
{

using Point2 = std::pair<double, double>;

struct Polyline
{
  std::string label;  // also used as the SVG class attribute
  std::string color;
  std::vector<Point2> points;
  bool dashed = false;
};

/// Top-down view: first coordinate runs right, second runs up. Equal axis scales.
std::string svg_trajectory_overlay(const std::string & title, const std::vector<Polyline> & lines);

/// One curve per series over x = 1..n; every series must have the same n.
std::string svg_horizon_curves(
  const std::string & title, const std::string & y_label, const std::vector<Polyline> & series);

std::string svg_escape(const std::string & text);

}  // namespace pvlstm::cli

#endif  // PVLSTM__CLI__PLOTS_HPP_
