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

#ifndef PVLSTM__METRICS_HPP_
#define PVLSTM__METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvlstm/model.hpp"

namespace pvlstm
{

struct DisplacementErrors
{
  double ade = 0.0;
  double fde = 0.0;
};

/// Euclidean error between box centers; ADE averages over steps, FDE is the last step.
DisplacementErrors ade_fde(std::span<const BBox3d> pred, std::span<const BBox3d> gt);

/// Axis-aligned volumetric IoU. Returns 0 when the union volume is 0.
double iou3d(const BBox3d & a, const BBox3d & b);

struct IouScores
{
  double aiou = 0.0;
  double fiou = 0.0;
};

IouScores aiou_fiou(std::span<const BBox3d> pred, std::span<const BBox3d> gt);

/**
 * @brief Argmax accuracy of predicted class distributions.
 *
 * pred_probs[i][k] is sample i's distribution at step k; labels[i][k] is the
 * true class. With final_only, only each sample's last step is scored. Ties go
 * to the lowest class index.
 */
double attr_accuracy(
  std::span<const std::vector<Vector>> pred_probs, std::span<const std::vector<std::size_t>> labels,
  bool final_only);

/// Index of the largest entry; the first one wins ties.
std::size_t argmax(std::span<const double> v);

/// Monte-Carlo IoU estimate from n uniform points in the joint bounding hull.
double mc_iou_oracle(const BBox3d & a, const BBox3d & b, std::size_t n, std::uint64_t seed);

struct HorizonRow
{
  std::size_t step = 0;  // 1-based
  double displacement = 0.0;
  double iou = 0.0;
};

struct EvalReport
{
  std::string model;
  double ade = 0.0;
  double fde = 0.0;
  double aiou = 0.0;
  double fiou = 0.0;
  std::optional<double> attr_accuracy;
  std::size_t n_samples = 0;
  std::size_t n_invalid_boxes = 0;  // predicted boxes with a negative size; IoU treats them as empty
  std::vector<HorizonRow> per_horizon;
};

/// Accumulates per-sample metrics; dataset values are unweighted means over samples.
class EvalAccumulator
{
public:
  explicit EvalAccumulator(std::string model, bool attr_final_only = true)
  : model_(std::move(model)), attr_final_only_(attr_final_only)
  {
  }

  void add(std::span<const BBox3d> pred, std::span<const BBox3d> gt);
  void add_attributes(std::vector<Vector> probs, std::vector<std::size_t> labels);

  EvalReport finish() const;

private:
  std::string model_;
  bool attr_final_only_;
  std::size_t n_ = 0;
  std::size_t invalid_ = 0;
  double ade_sum_ = 0.0;
  double fde_sum_ = 0.0;
  double aiou_sum_ = 0.0;
  double fiou_sum_ = 0.0;
  std::vector<double> step_disp_;
  std::vector<double> step_iou_;
  std::vector<std::vector<Vector>> probs_;
  std::vector<std::vector<std::size_t>> labels_;
};

nlohmann::ordered_json report_to_json(const EvalReport & report);
EvalReport report_from_json(const nlohmann::ordered_json & j);

/// Fixed-width text table, one row per report.
std::string format_report_table(std::span<const EvalReport> reports);

/// Comma-separated per-step table: model,step,displacement,iou.
std::string format_horizon_csv(std::span<const EvalReport> reports);

}  // namespace pvlstm

#endif  // PVLSTM__METRICS_HPP_
