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

#ifndef PVLSTM__CHECKPOINT_HPP_
#define PVLSTM__CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pvlstm/model.hpp"

namespace pvlstm
{

inline constexpr const char * kCheckpointFormat = "pvlstm-checkpoint/1";

nlohmann::ordered_json config_to_json(const ModelConfig & config);
ModelConfig config_from_json(const nlohmann::ordered_json & j);

/**
 * Checkpoint document layout:
 *
 *   { "format": "pvlstm-checkpoint/1",
 *     "config": { hidden, t_obs, t_pred, use_velocity_encoder, n_attr_classes, seed },
 *     "meta":   { free-form training metadata },
 *     "params": { "enc_p.w_ih": { "shape": [rows, cols], "data": [row-major values] }, ... } }
 *
 * Parameter names and their order follow PvLstmModel::params().
 */
std::string checkpoint_to_string(
  const PvLstmModel & model, const nlohmann::ordered_json & meta = {});
void save_checkpoint(
  const std::filesystem::path & path, const PvLstmModel & model,
  const nlohmann::ordered_json & meta = {});

struct LoadedCheckpoint
{
  PvLstmModel model;
  nlohmann::ordered_json meta;
};

LoadedCheckpoint checkpoint_from_string(const std::string & text);

/// Throws ConfigError when `expected` is given and differs from the stored config.
LoadedCheckpoint load_checkpoint(
  const std::filesystem::path & path, const ModelConfig * expected = nullptr);

}  // namespace pvlstm

#endif  // PVLSTM__CHECKPOINT_HPP_
