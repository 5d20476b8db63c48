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

#include "pvlstm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pvlstm/errors.hpp"
#include "pvlstm/rng.hpp"

namespace pvlstm
{

namespace
{

void require_aligned(std::span<const BBox3d> pred, std::span<const BBox3d> gt, const char * what)
{
  if (pred.empty() || pred.size() != gt.size()) {
    throw ArgumentError(
      fmt::format("{}: need equal non-zero lengths, got {} and {}", what, pred.size(), gt.size()));
  }
}

double center_distance(const BBox3d & a, const BBox3d & b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct Extent
{
  double lo[3];
  double hi[3];
};

Extent extent(const BBox3d & b)
{
  return {{b.x - b.w / 2.0, b.y - b.h / 2.0, b.z - b.d / 2.0},
          {b.x + b.w / 2.0, b.y + b.h / 2.0, b.z + b.d / 2.0}};
}

bool contains(const Extent & e, const double p[3])
{
  for (int a = 0; a < 3; ++a) {
    if (p[a] < e.lo[a] || p[a] > e.hi[a]) {
      return false;
    }
  }
  return true;
}

// Negative predicted sizes score as zero volume; EvalAccumulator counts them separately.
std::vector<BBox3d> clamp_sizes(std::span<const BBox3d> boxes)
{
  std::vector<BBox3d> out(boxes.begin(), boxes.end());
  for (BBox3d & b : out) {
    b.w = std::max(0.0, b.w);
    b.h = std::max(0.0, b.h);
    b.d = std::max(0.0, b.d);
  }
  return out;
}

}  // namespace

DisplacementErrors ade_fde(std::span<const BBox3d> pred, std::span<const BBox3d> gt)
{
  require_aligned(pred, gt, "ade_fde");
  double sum = 0.0;
  double last = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    last = center_distance(pred[k], gt[k]);
    sum += last;
  }
  return {sum / static_cast<double>(pred.size()), last};
}

double iou3d(const BBox3d & a, const BBox3d & b)
{
  if (a.w < 0.0 || a.h < 0.0 || a.d < 0.0 || b.w < 0.0 || b.h < 0.0 || b.d < 0.0) {
    throw ArgumentError("iou3d: box sizes must be non-negative");
  }
  // Per-axis overlap written through the center offset: it depends on the boxes
  // only via |center difference| and sizes, and is symmetric in (a, b).
  auto overlap = [](double ca, double sa, double cb, double sb) {
    const double gap = (sa + sb) / 2.0 - std::abs(ca - cb);
    return std::max(0.0, std::min({sa, sb, gap}));
  };
  const double inter =
    overlap(a.x, a.w, b.x, b.w) * overlap(a.y, a.h, b.y, b.h) * overlap(a.z, a.d, b.z, b.d);
  const double va = a.w * a.h * a.d;
  const double vb = b.w * b.h * b.d;
  const double uni = (va + vb) - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

IouScores aiou_fiou(std::span<const BBox3d> pred, std::span<const BBox3d> gt)
{
  require_aligned(pred, gt, "aiou_fiou");
  double sum = 0.0;
  double last = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    last = iou3d(pred[k], gt[k]);
    sum += last;
  }
  return {sum / static_cast<double>(pred.size()), last};
}

std::size_t argmax(std::span<const double> v)
{
  if (v.empty()) {
    throw ArgumentError("argmax: empty vector");
  }
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double attr_accuracy(
  std::span<const std::vector<Vector>> pred_probs, std::span<const std::vector<std::size_t>> labels,
  bool final_only)
{
  if (pred_probs.empty()) {
    throw ArgumentError("attr_accuracy: no samples");
  }
  if (pred_probs.size() != labels.size()) {
    throw ArgumentError("attr_accuracy: predictions and labels differ in sample count");
  }
  std::size_t scored = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred_probs.size(); ++i) {
    const auto & probs = pred_probs[i];
    const auto & lab = labels[i];
    if (probs.empty() || probs.size() != lab.size()) {
      throw ArgumentError(fmt::format("attr_accuracy: sample {} has misaligned steps", i));
    }
    const std::size_t first = final_only ? probs.size() - 1 : 0;
    for (std::size_t k = first; k < probs.size(); ++k) {
      ++scored;
      correct += argmax(probs[k]) == lab[k] ? 1 : 0;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(scored);
}

double mc_iou_oracle(const BBox3d & a, const BBox3d & b, std::size_t n, std::uint64_t seed)
{
  if (n < 1) {
    throw ArgumentError("mc_iou_oracle: need at least one sample");
  }
  const Extent ea = extent(a);
  const Extent eb = extent(b);
  Extent hull{};
  for (int axis = 0; axis < 3; ++axis) {
    hull.lo[axis] = std::min(ea.lo[axis], eb.lo[axis]);
    hull.hi[axis] = std::max(ea.hi[axis], eb.hi[axis]);
    if (!(hull.hi[axis] > hull.lo[axis])) {
      throw ArgumentError("mc_iou_oracle: degenerate sampling hull");
    }
  }
  Rng rng(seed);
  std::size_t in_a = 0;
  std::size_t in_b = 0;
  std::size_t in_both = 0;
  for (std::size_t s = 0; s < n; ++s) {
    double p[3];
    for (int axis = 0; axis < 3; ++axis) {
      p[axis] = rng.uniform(hull.lo[axis], hull.hi[axis]);
    }
    const bool pa = contains(ea, p);
    const bool pb = contains(eb, p);
    in_a += pa ? 1 : 0;
    in_b += pb ? 1 : 0;
    in_both += (pa && pb) ? 1 : 0;
  }
  const std::size_t in_union = in_a + in_b - in_both;
  if (in_union == 0) {
    return 0.0;
  }
  return static_cast<double>(in_both) / static_cast<double>(in_union);
}

void EvalAccumulator::add(std::span<const BBox3d> pred, std::span<const BBox3d> gt)
{
  require_aligned(pred, gt, "EvalAccumulator::add");
  if (n_ > 0 && pred.size() != step_disp_.size()) {
    throw ArgumentError("EvalAccumulator::add: prediction horizon changed between samples");
  }
  if (n_ == 0) {
    step_disp_.assign(pred.size(), 0.0);
    step_iou_.assign(pred.size(), 0.0);
  }
  const std::vector<BBox3d> scored = clamp_sizes(pred);
  const DisplacementErrors de = ade_fde(pred, gt);
  const IouScores io = aiou_fiou(scored, gt);
  ade_sum_ += de.ade;
  fde_sum_ += de.fde;
  aiou_sum_ += io.aiou;
  fiou_sum_ += io.fiou;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    step_disp_[k] += center_distance(pred[k], gt[k]);
    step_iou_[k] += iou3d(scored[k], gt[k]);
  }
  invalid_ += invalid_boxes(pred).size();
  ++n_;
}

void EvalAccumulator::add_attributes(std::vector<Vector> probs, std::vector<std::size_t> labels)
{
  probs_.push_back(std::move(probs));
  labels_.push_back(std::move(labels));
}

EvalReport EvalAccumulator::finish() const
{
  if (n_ == 0) {
    throw ArgumentError("EvalAccumulator::finish: no samples were added");
  }
  const auto n = static_cast<double>(n_);
  EvalReport r;
  r.model = model_;
  r.n_samples = n_;
  r.n_invalid_boxes = invalid_;
  r.ade = ade_sum_ / n;
  r.fde = fde_sum_ / n;
  r.aiou = aiou_sum_ / n;
  r.fiou = fiou_sum_ / n;
  for (std::size_t k = 0; k < step_disp_.size(); ++k) {
    r.per_horizon.push_back({k + 1, step_disp_[k] / n, step_iou_[k] / n});
  }
  if (!probs_.empty()) {
    r.attr_accuracy = attr_accuracy(probs_, labels_, attr_final_only_);
  }
  return r;
}

nlohmann::ordered_json report_to_json(const EvalReport & report)
{
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["n_samples"] = report.n_samples;
  j["ade"] = report.ade;
  j["fde"] = report.fde;
  j["aiou"] = report.aiou;
  j["fiou"] = report.fiou;
  j["attr_accuracy"] = report.attr_accuracy ? nlohmann::ordered_json(*report.attr_accuracy)
                                            : nlohmann::ordered_json(nullptr);
  j["n_invalid_boxes"] = report.n_invalid_boxes;
  auto rows = nlohmann::ordered_json::array();
  for (const HorizonRow & h : report.per_horizon) {
    rows.push_back({{"step", h.step}, {"displacement", h.displacement}, {"iou", h.iou}});
  }
  j["per_horizon"] = std::move(rows);
  return j;
}

EvalReport report_from_json(const nlohmann::ordered_json & j)
{
  EvalReport r;
  try {
    r.model = j.at("model").get<std::string>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.ade = j.at("ade").get<double>();
    r.fde = j.at("fde").get<double>();
    r.aiou = j.at("aiou").get<double>();
    r.fiou = j.at("fiou").get<double>();
    if (!j.at("attr_accuracy").is_null()) {
      r.attr_accuracy = j.at("attr_accuracy").get<double>();
    }
    r.n_invalid_boxes = j.value("n_invalid_boxes", std::size_t{0});
    for (const auto & row : j.at("per_horizon")) {
      r.per_horizon.push_back(
        {row.at("step").get<std::size_t>(), row.at("displacement").get<double>(),
         row.at("iou").get<double>()});
    }
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("eval report: ") + e.what());
  }
  return r;
}

std::string format_report_table(std::span<const EvalReport> reports)
{
  std::string out = fmt::format(
    "{:<24} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "model", "ADE", "FDE", "AIOU", "FIOU",
    "acc", "n");
  for (const EvalReport & r : reports) {
    const std::string acc = r.attr_accuracy ? fmt::format("{:.4f}", *r.attr_accuracy) : "-";
    out += fmt::format(
      "{:<24} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f} {:>8} {:>8}\n", r.model, r.ade, r.fde, r.aiou,
      r.fiou, acc, r.n_samples);
  }
  return out;
}

std::string format_horizon_csv(std::span<const EvalReport> reports)
{
  std::string out = "model,step,displacement,iou\n";
  for (const EvalReport & r : reports) {
    for (const HorizonRow & h : r.per_horizon) {
      out += fmt::format("{},{},{:.17g},{:.17g}\n", r.model, h.step, h.displacement, h.iou);
    }
  }
  return out;
}

}  // namespace pvlstm
