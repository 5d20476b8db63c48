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

#include "pvlstm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "pvlstm/errors.hpp"

namespace pvlstm
{

using nlohmann::ordered_json;

ordered_json config_to_json(const ModelConfig & config)
{
  ordered_json j;
  j["hidden"] = config.hidden;
  j["t_obs"] = config.t_obs;
  j["t_pred"] = config.t_pred;
  j["use_velocity_encoder"] = config.use_velocity_encoder;
  j["n_attr_classes"] = config.n_attr_classes;
  j["seed"] = config.seed;
  return j;
}

ModelConfig config_from_json(const ordered_json & j)
{
  ModelConfig c;
  try {
    c.hidden = j.at("hidden").get<std::size_t>();
    c.t_obs = j.at("t_obs").get<std::size_t>();
    c.t_pred = j.at("t_pred").get<std::size_t>();
    c.use_velocity_encoder = j.at("use_velocity_encoder").get<bool>();
    c.n_attr_classes = j.at("n_attr_classes").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("checkpoint config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string checkpoint_to_string(const PvLstmModel & model, const ordered_json & meta)
{
  ordered_json doc;
  doc["format"] = kCheckpointFormat;
  doc["config"] = config_to_json(model.config);
  doc["meta"] = meta.is_null() ? ordered_json::object() : meta;
  ordered_json params = ordered_json::object();
  PvLstmModel copy = model;
  for (const ParamView & p : copy.params()) {
    ordered_json entry;
    entry["shape"] = {p.rows, p.cols};
    entry["data"] = std::vector<double>(p.values.begin(), p.values.end());
    params[p.name] = std::move(entry);
  }
  doc["params"] = std::move(params);
  return doc.dump(1) + "\n";
}

void save_checkpoint(
  const std::filesystem::path & path, const PvLstmModel & model, const ordered_json & meta)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path.string());
  }
  out << checkpoint_to_string(model, meta);
}

LoadedCheckpoint checkpoint_from_string(const std::string & text)
{
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (doc.value("format", std::string{}) != kCheckpointFormat) {
    throw ParseError(
      "checkpoint: unsupported format tag '" + doc.value("format", std::string{}) + "'");
  }
  LoadedCheckpoint out{PvLstmModel::zeros(config_from_json(doc.at("config"))), doc.value("meta", ordered_json::object())};
  const ordered_json & params = doc.at("params");
  std::vector<ParamView> views = out.model.params();
  if (params.size() != views.size()) {
    throw ParseError(
      "checkpoint: " + std::to_string(params.size()) + " tensors stored, config implies " +
      std::to_string(views.size()));
  }
  for (ParamView & v : views) {
    if (!params.contains(v.name)) {
      throw ParseError("checkpoint: missing tensor " + v.name);
    }
    const ordered_json & entry = params.at(v.name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != v.rows || shape[1] != v.cols) {
      throw ShapeError(
        "checkpoint: tensor " + v.name + " has shape " + entry.at("shape").dump() + ", expected [" +
        std::to_string(v.rows) + "," + std::to_string(v.cols) + "]");
    }
    const auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != v.values.size()) {
      throw ShapeError("checkpoint: tensor " + v.name + " has the wrong number of values");
    }
    require_finite(data, "checkpoint tensor " + v.name);
    std::copy(data.begin(), data.end(), v.values.begin());
  }
  return out;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path & path, const ModelConfig * expected)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  LoadedCheckpoint out = checkpoint_from_string(buf.str());
  if (expected != nullptr && !(*expected == out.model.config)) {
    throw ConfigError(
      "checkpoint config mismatch:\n  checkpoint: " + out.model.config.describe() +
      "\n  requested:  " + expected->describe());
  }
  return out;
}

}  // namespace pvlstm
