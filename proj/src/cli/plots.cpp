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


#include "pvlstm/cli/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace pvlstm::cli
{

namespace
{

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

struct Bounds
{
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(const Point2 & p)
  {
    x0 = std::min(x0, p.first);
    x1 = std::max(x1, p.first);
    y0 = std::min(y0, p.second);
    y1 = std::max(y1, p.second);
  }

  // Grows each zero-width axis so the mapping below never divides by zero.
  void pad(double fraction, double minimum)
  {
    const double px = std::max((x1 - x0) * fraction, minimum);
    const double py = std::max((y1 - y0) * fraction, minimum);
    x0 -= px;
    x1 += px;
    y0 -= py;
    y1 += py;
  }
};

std::string header(const std::string & title)
{
  return fmt::format(
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
    "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
    kWidth, kHeight, kWidth / 2, svg_escape(title));
}

std::string polyline(const Polyline & line, const std::vector<Point2> & screen, bool markers)
{
  std::string pts;
  for (const auto & [x, y] : screen) {
    pts += fmt::format("{:.2f},{:.2f} ", x, y);
  }
  std::string out = fmt::format(
    "<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n",
    svg_escape(line.label), line.color, line.dashed ? " stroke-dasharray=\"6 4\"" : "", pts);
  if (markers) {
    for (const auto & [x, y] : screen) {
      out += fmt::format(
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", x, y, line.color);
    }
  }
  return out;
}

std::string legend(const std::vector<Polyline> & lines)
{
  std::string out;
  double y = kMargin;
  for (const Polyline & l : lines) {
    out += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>"
      "<text x=\"{5}\" y=\"{6}\">{7}</text>\n",
      kWidth - 170, y, kWidth - 145, l.color, l.dashed ? " stroke-dasharray=\"6 4\"" : "",
      kWidth - 140, y + 4, svg_escape(l.label));
    y += 18;
  }
  return out;
}

std::string axes(const Bounds & b, const std::string & x_label, const std::string & y_label)
{
  const double left = kMargin;
  const double right = kWidth - kMargin;
  const double top = kMargin;
  const double bottom = kHeight - kMargin;
  std::string out = fmt::format(
    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", left,
    top, right - left, bottom - top);
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    out += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n",
      left + f * (right - left), bottom + 16, b.x0 + f * (b.x1 - b.x0));
    out += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6,
      bottom - f * (bottom - top) + 4, b.y0 + f * (b.y1 - b.y0));
  }
  out += fmt::format(
    "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (left + right) / 2,
    kHeight - 14, svg_escape(x_label));
  out += fmt::format(
    "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
    (top + bottom) / 2, svg_escape(y_label));
  return out;
}

std::vector<Point2> to_screen(const std::vector<Point2> & pts, const Bounds & b)
{
  std::vector<Point2> out;
  const double sx = (kWidth - 2 * kMargin) / (b.x1 - b.x0);
  const double sy = (kHeight - 2 * kMargin) / (b.y1 - b.y0);
  for (const auto & [x, y] : pts) {
    out.emplace_back(kMargin + (x - b.x0) * sx, kHeight - kMargin - (y - b.y0) * sy);
  }
  return out;
}

}  // namespace

std::string svg_escape(const std::string & text)
{
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string svg_trajectory_overlay(const std::string & title, const std::vector<Polyline> & lines)
{
  Bounds b;
  for (const Polyline & l : lines) {
    for (const Point2 & p : l.points) {
      b.add(p);
    }
  }
  if (!std::isfinite(b.x0)) {
    throw std::invalid_argument("svg_trajectory_overlay: no points");
  }
  b.pad(0.1, 0.25);
  // Equal scales: widen the narrower axis around its center.
  const double aspect = (kWidth - 2 * kMargin) / (kHeight - 2 * kMargin);
  const double w = b.x1 - b.x0;
  const double h = b.y1 - b.y0;
  if (w / h < aspect) {
    const double grow = (h * aspect - w) / 2;
    b.x0 -= grow;
    b.x1 += grow;
  } else {
    const double grow = (w / aspect - h) / 2;
    b.y0 -= grow;
    b.y1 += grow;
  }
  std::string out = header(title) + axes(b, "x (m)", "z (m)");
  for (const Polyline & l : lines) {
    out += polyline(l, to_screen(l.points, b), true);
  }
  return out + legend(lines) + "</svg>\n";
}

std::string svg_horizon_curves(
  const std::string & title, const std::string & y_label, const std::vector<Polyline> & series)
{
  if (series.empty() || series.front().points.empty()) {
    throw std::invalid_argument("svg_horizon_curves: no series");
  }
  Bounds b;
  for (const Polyline & s : series) {
    if (s.points.size() != series.front().points.size()) {
      throw std::invalid_argument("svg_horizon_curves: series differ in length");
    }
    for (const Point2 & p : s.points) {
      b.add(p);
    }
  }
  b.y0 = std::min(b.y0, 0.0);
  b.pad(0.05, 0.05);
  std::string out = header(title) + axes(b, "prediction step", y_label);
  for (const Polyline & s : series) {
    out += polyline(s, to_screen(s.points, b), true);
  }
  return out + legend(series) + "</svg>\n";
}

}  // namespace pvlstm::cli
