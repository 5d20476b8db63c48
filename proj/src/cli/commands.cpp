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


#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pvlstm/checkpoint.hpp"
#include "pvlstm/cli/cli.hpp"
#include "pvlstm/cli/manifest.hpp"
#include "pvlstm/cli/plots.hpp"
#include "pvlstm/data.hpp"
#include "pvlstm/errors.hpp"
#include "pvlstm/kvconfig.hpp"
#include "pvlstm/metrics.hpp"
#include "pvlstm/model.hpp"
#include "pvlstm/synth.hpp"
#include "pvlstm/train.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace pvlstm::cli
{

namespace
{

constexpr const char * kZeroVel = "Zero-Vel";

const std::set<std::string> kModelKeys{"hidden", "t_obs", "t_pred", "model", "n_attr_classes", "seed"};
const std::set<std::string> kTrainKeys{
  "lr0",       "epochs",    "batch",      "factor",   "patience",
  "threshold", "seed",      "multi_task", "attr_final_step_only", "attr_only"};
const std::set<std::string> kDataKeys{"format", "preset", "stride", "val_fraction", "balance"};

struct Globals
{
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  bool quiet = false;
};

// key = value pairs collected from flags, applied over the config file in order.
using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Context
{
  Globals globals;
  std::vector<std::string> argv;
  std::ostream & out;
  std::ostream & err;

  template <typename... Args>
  void info(fmt::format_string<Args...> f, Args &&... args) const
  {
    if (!globals.quiet) {
      out << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }
  }

  template <typename... Args>
  void warn(fmt::format_string<Args...> f, Args &&... args) const
  {
    err << "warning: " << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }
};

std::set<std::string> merged(std::initializer_list<const std::set<std::string> *> sets)
{
  std::set<std::string> out;
  for (const auto * s : sets) {
    out.insert(s->begin(), s->end());
  }
  return out;
}

KvConfig resolve_config(const Globals & g, const Overrides & overrides)
{
  KvConfig cfg;
  if (!g.config.empty()) {
    cfg = KvConfig::load(g.config);
  }
  for (const auto & [key, value] : overrides) {
    cfg.set(key, value);
  }
  if (g.seed) {
    cfg.set("seed", std::to_string(*g.seed));
  }
  return cfg;
}

void kv_option(
  CLI::App * app, Overrides & overrides, const std::string & flags, const std::string & key,
  const std::string & help)
{
  app->add_option_function<std::string>(
    flags, [&overrides, key](const std::string & v) { overrides.emplace_back(key, v); }, help);
}

void kv_flag(
  CLI::App * app, Overrides & overrides, const std::string & flags, const std::string & key,
  const std::string & help)
{
  app->add_flag_callback(
    flags, [&overrides, key] { overrides.emplace_back(key, "true"); }, help);
}

void add_model_flags(CLI::App * app, Overrides & ov)
{
  kv_option(app, ov, "--hidden", "hidden", "LSTM hidden size per encoder");
  kv_option(app, ov, "--t_obs", "t_obs", "observed frames per window");
  kv_option(app, ov, "--t_pred", "t_pred", "predicted frames per window");
  kv_option(app, ov, "--model", "model", "pv-lstm or p-lstm");
  kv_option(app, ov, "--n_attr_classes", "n_attr_classes", "attribute classes (0 disables)");
}

void add_data_flags(CLI::App * app, Overrides & ov)
{
  kv_option(app, ov, "--format", "format", "track file format: boxes or jta-joints");
  kv_option(app, ov, "--preset", "preset", "window preset: jta, jta-long or nuscenes");
  kv_option(app, ov, "--stride", "stride", "frame stride inside a window");
}

struct DataOptions
{
  TrackFormat format = TrackFormat::kBoxes;
  std::string format_name = "boxes";
  std::string preset;
  std::size_t stride = 1;
  double val_fraction = 0.1;
  bool balance = true;

  ordered_json to_json() const
  {
    return {{"format", format_name}, {"preset", preset},       {"stride", stride},
            {"val_fraction", val_fraction}, {"balance", balance}};
  }
};

DataOptions data_options_from(const KvConfig & cfg)
{
  DataOptions d;
  d.format_name = cfg.get_string("format", d.format_name);
  d.format = parse_track_format(d.format_name);
  d.preset = cfg.get_string("preset", "");
  if (!d.preset.empty()) {
    d.stride = window_preset(d.preset).stride;
  }
  d.stride = cfg.get_uint("stride", d.stride);
  if (d.stride < 1) {
    throw ConfigError("stride must be at least 1");
  }
  d.val_fraction = cfg.get_double("val_fraction", d.val_fraction);
  d.balance = cfg.get_bool("balance", d.balance);
  return d;
}

ModelConfig model_config_from(const KvConfig & cfg, ModelConfig base)
{
  const std::string preset = cfg.get_string("preset", "");
  if (!preset.empty()) {
    const WindowPreset p = window_preset(preset);
    base.t_obs = p.t_obs;
    base.t_pred = p.t_pred;
  }
  base.hidden = cfg.get_uint("hidden", base.hidden);
  base.t_obs = cfg.get_uint("t_obs", base.t_obs);
  base.t_pred = cfg.get_uint("t_pred", base.t_pred);
  const std::string kind = cfg.get_string("model", base.use_velocity_encoder ? "pv-lstm" : "p-lstm");
  if (kind != "pv-lstm" && kind != "p-lstm") {
    throw ConfigError("model must be pv-lstm or p-lstm, got '" + kind + "'");
  }
  base.use_velocity_encoder = kind == "pv-lstm";
  base.n_attr_classes = cfg.get_uint("n_attr_classes", base.n_attr_classes);
  base.seed = cfg.get_uint("seed", base.seed);
  base.validate();
  return base;
}

std::string model_label(const ModelConfig & c)
{
  std::string name = c.use_velocity_encoder ? "PV-LSTM" : "P-LSTM";
  if (c.has_attributes()) {
    name += " (attr)";
  }
  return name;
}

ordered_json box_json(const BBox3d & b)
{
  return ordered_json::array({b.x, b.y, b.z, b.w, b.h, b.d});
}

ordered_json boxes_json(std::span<const BBox3d> boxes)
{
  auto arr = ordered_json::array();
  for (const BBox3d & b : boxes) {
    arr.push_back(box_json(b));
  }
  return arr;
}

std::vector<BBox3d> boxes_from_json(const ordered_json & arr)
{
  std::vector<BBox3d> out;
  for (const auto & row : arr) {
    const auto v = row.get<std::vector<double>>();
    if (v.size() != kBoxDim) {
      throw ParseError("box arrays must have 6 entries");
    }
    out.push_back(BBox3d::from(v));
  }
  return out;
}

std::ofstream open_output(const fs::path & path)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

void write_text(const fs::path & path, const std::string & text)
{
  auto out = open_output(path);
  out << text;
}

fs::path require_out(const Context & ctx, const char * what)
{
  if (ctx.globals.out.empty()) {
    throw ConfigError(std::string("--out is required (") + what + ")");
  }
  return ctx.globals.out;
}

fs::path sidecar_manifest(const fs::path & file)
{
  return fs::path(file.string() + ".manifest.json");
}

RunManifest start_manifest(
  const Context & ctx, const std::string & command, ordered_json config, std::uint64_t seed,
  const std::vector<fs::path> & inputs)
{
  RunManifest m;
  m.command = command;
  m.argv = ctx.argv;
  m.config = std::move(config);
  m.seed = seed;
  for (const fs::path & p : inputs) {
    m.inputs.push_back(digest_input(p));
  }
  m.started_at = utc_timestamp();
  return m;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const Context & ctx, const std::string & spec_arg)
{
  const std::string spec_path = spec_arg.empty() ? ctx.globals.config : spec_arg;
  if (spec_path.empty()) {
    throw ConfigError("gen needs a synthetic spec file (positional SPEC or --config)");
  }
  KvConfig cfg = KvConfig::load(spec_path);
  if (ctx.globals.seed) {
    cfg.set("seed", std::to_string(*ctx.globals.seed));
  }
  const SynthSpec spec = SynthSpec::from_config(cfg);
  const fs::path out = require_out(ctx, "track file to write");

  ordered_json resolved{
    {"n_tracks", spec.n_tracks},       {"fps", spec.fps},
    {"duration", spec.duration},       {"p_constant", spec.p_constant},
    {"p_stop_and_go", spec.p_stop_and_go}, {"p_turning", spec.p_turning},
    {"p_standing", spec.p_standing},   {"sitting_fraction", spec.sitting_fraction},
    {"speed_min", spec.speed_min},     {"speed_max", spec.speed_max},
    {"height_min", spec.height_min},   {"height_max", spec.height_max},
    {"heading_min", spec.heading_min}, {"heading_max", spec.heading_max},
    {"noise_sigma", spec.noise_sigma}, {"seed", spec.seed}};
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  write_manifest(sidecar_manifest(out), start_manifest(ctx, "gen", resolved, spec.seed, {spec_path}));

  const auto records = synth_generate(spec);
  auto file = open_output(out);
  write_tracks(file, records);
  ctx.info("wrote {} records for {} tracks to {}", records.size(), spec.n_tracks, out.string());
  return 0;
}

// ---------------------------------------------------------------- train

std::vector<Sample> labelled_only(std::vector<Sample> samples)
{
  std::erase_if(samples, [](const Sample & s) { return !s.attr_labels.has_value(); });
  return samples;
}

int cmd_train(
  const Context & ctx, const Overrides & overrides, const std::string & data_path,
  const std::string & val_path)
{
  const KvConfig cfg = resolve_config(ctx.globals, overrides);
  cfg.require_known(merged({&kModelKeys, &kTrainKeys, &kDataKeys}));
  const TrainConfig tc = train_config_from(cfg);
  ModelConfig base;
  if (tc.uses_attr_loss()) {
    base.n_attr_classes = kNumAttrClasses;
  }
  const ModelConfig mc = model_config_from(cfg, base);
  const DataOptions data = data_options_from(cfg);
  if (tc.uses_attr_loss() && !mc.has_attributes()) {
    throw ConfigError("attribute training needs n_attr_classes >= 2");
  }
  const fs::path out = require_out(ctx, "output directory");
  fs::create_directories(out);

  std::vector<fs::path> inputs{data_path};
  if (!val_path.empty()) {
    inputs.emplace_back(val_path);
  }
  if (!ctx.globals.config.empty()) {
    inputs.emplace_back(ctx.globals.config);
  }
  ordered_json resolved{
    {"model", config_to_json(mc)}, {"train", train_config_to_json(tc)}, {"data", data.to_json()}};
  write_manifest(out / "manifest.json", start_manifest(ctx, "train", resolved, tc.seed, inputs));

  std::vector<TrackRecord> train_tracks = load_tracks(data_path, data.format);
  std::vector<TrackRecord> val_tracks;
  if (!val_path.empty()) {
    val_tracks = load_tracks(val_path, data.format);
  } else {
    TrackSplit split = split_by_scene(train_tracks, data.val_fraction, 0.0, tc.seed);
    train_tracks = std::move(split.train);
    val_tracks = std::move(split.val);
  }
  std::vector<Sample> train = window_samples(train_tracks, mc.t_obs, mc.t_pred, data.stride);
  std::vector<Sample> val = window_samples(val_tracks, mc.t_obs, mc.t_pred, data.stride);
  if (tc.uses_attr_loss()) {
    train = labelled_only(std::move(train));
    val = labelled_only(std::move(val));
    if (data.balance && !train.empty()) {
      train = balance_classes(train, mc.n_attr_classes, tc.seed);
    }
  }
  if (train.empty() || val.empty()) {
    throw ConfigError(fmt::format(
      "need non-empty training and validation windows, got {} and {} (t_obs {}, t_pred {}, "
      "stride {})",
      train.size(), val.size(), mc.t_obs, mc.t_pred, data.stride));
  }
  ctx.info(
    "{}: {} training / {} validation windows, {} parameters", model_label(mc), train.size(),
    val.size(), PvLstmModel::init(mc).param_count());

  FitOptions options;
  options.out_dir = out;
  options.on_epoch = [&](const HistoryRow & r) {
    if (tc.uses_attr_loss() && tc.uses_box_loss()) {
      ctx.info(
        "epoch {:>3}  train {:.6g} (box {:.6g}, attr {:.6g})  val {:.6g}  lr {:g}", r.epoch,
        r.train_loss, r.train_box, r.train_attr, r.val_loss, r.lr);
    } else {
      ctx.info("epoch {:>3}  train {:.6g}  val {:.6g}  lr {:g}", r.epoch, r.train_loss, r.val_loss, r.lr);
    }
  };
  const FitResult result = fit(PvLstmModel::init(mc), train, val, tc, options);
  write_text(out / "history.csv", history_csv(result.history));
  if (result.history.empty()) {
    save_checkpoint(out / "ckpt-init.json", result.model);
    ctx.info("no epochs run; initial model written to {}", (out / "ckpt-init.json").string());
    return 0;
  }
  const HistoryRow & best = result.history[result.best_epoch - 1];
  ctx.out << fmt::format(
               "final val loss {:.8g} (epoch {}); best val loss {:.8g} at epoch {} -> {}\n",
               result.history.back().val_loss, result.history.back().epoch, best.val_loss,
               best.epoch, result.checkpoint.string());
  return 0;
}

// ---------------------------------------------------------------- eval

LoadedCheckpoint load_for(const KvConfig & cfg, const std::string & path)
{
  LoadedCheckpoint ckpt = load_checkpoint(path);
  ModelConfig requested = model_config_from(cfg, ckpt.model.config);
  requested.seed = ckpt.model.config.seed;
  if (!(requested == ckpt.model.config)) {
    throw ConfigError(
      "checkpoint config does not match the requested config\n  checkpoint: " +
      ckpt.model.config.describe() + "\n  requested:  " + requested.describe());
  }
  return ckpt;
}

int cmd_eval(
  const Context & ctx, const Overrides & overrides, const std::string & ckpt_path,
  const std::string & data_path, const std::string & label)
{
  const KvConfig cfg = resolve_config(ctx.globals, overrides);
  cfg.require_known(merged({&kModelKeys, &kDataKeys}));
  const DataOptions data = data_options_from(cfg);
  const LoadedCheckpoint ckpt = load_for(cfg, ckpt_path);
  const PvLstmModel & model = ckpt.model;
  const ModelConfig & mc = model.config;
  const fs::path out = require_out(ctx, "output directory");
  fs::create_directories(out);

  const std::string name = label.empty() ? model_label(mc) : label;
  ordered_json resolved{{"model", config_to_json(mc)}, {"data", data.to_json()}, {"label", name}};
  write_manifest(
    out / "manifest.json", start_manifest(ctx, "eval", resolved, mc.seed, {ckpt_path, data_path}));

  const auto tracks = load_tracks(data_path, data.format);
  const auto samples = window_samples(tracks, mc.t_obs, mc.t_pred, data.stride);
  if (samples.empty()) {
    throw ConfigError(fmt::format(
      "{} yields no windows of {}+{} frames at stride {}", data_path, mc.t_obs, mc.t_pred,
      data.stride));
  }

  EvalAccumulator acc(name);
  EvalAccumulator zero(kZeroVel);
  auto rows = open_output(out / "samples.jsonl");
  for (const Sample & s : samples) {
    const Prediction p = predict(model, s.obs);
    const auto zv = zero_vel_predict(s.obs, mc.t_pred);
    acc.add(p.boxes, s.future);
    zero.add(zv, s.future);
    ordered_json row{
      {"scene_id", s.id.scene_id}, {"ped_id", s.id.ped_id},     {"start_frame", s.id.start_frame},
      {"obs", boxes_json(s.obs)},  {"gt", boxes_json(s.future)}, {"pred", boxes_json(p.boxes)},
      {"zero_vel", boxes_json(zv)}};
    if (p.attrs) {
      row["attrs"] = *p.attrs;
      if (s.attr_labels) {
        acc.add_attributes(*p.attrs, *s.attr_labels);
        row["labels"] = *s.attr_labels;
      }
    }
    rows << row.dump() << '\n';
  }
  rows.close();

  const std::vector<EvalReport> reports{acc.finish(), zero.finish()};
  auto list = ordered_json::array();
  for (const EvalReport & r : reports) {
    list.push_back(report_to_json(r));
  }
  write_text(out / "report.json", ordered_json{{"reports", list}}.dump(2) + "\n");
  const std::string table = format_report_table(reports);
  write_text(out / "report.txt", table);
  write_text(out / "metrics.csv", format_horizon_csv(reports));
  if (reports.front().n_invalid_boxes > 0) {
    ctx.warn("{} predicted boxes have a negative size", reports.front().n_invalid_boxes);
  }
  if (!ctx.globals.quiet) {
    ctx.out << table;
  }
  return 0;
}

// ---------------------------------------------------------------- predict

int cmd_predict(
  const Context & ctx, const Overrides & overrides, const std::string & ckpt_path,
  const std::string & data_path)
{
  const KvConfig cfg = resolve_config(ctx.globals, overrides);
  cfg.require_known(merged({&kModelKeys, &kDataKeys}));
  const DataOptions data = data_options_from(cfg);
  const LoadedCheckpoint ckpt = load_for(cfg, ckpt_path);
  const PvLstmModel & model = ckpt.model;
  const ModelConfig & mc = model.config;
  const fs::path out = require_out(ctx, "predictions file");
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  ordered_json resolved{{"model", config_to_json(mc)}, {"data", data.to_json()}};
  write_manifest(
    sidecar_manifest(out), start_manifest(ctx, "predict", resolved, mc.seed, {ckpt_path, data_path}));

  const auto tracks = load_tracks(data_path, data.format);
  auto file = open_output(out);
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t begin = 0;
  while (begin < tracks.size()) {
    std::size_t end = begin + 1;
    while (end < tracks.size() && tracks[end].scene_id == tracks[begin].scene_id &&
           tracks[end].ped_id == tracks[begin].ped_id) {
      ++end;
    }
    const std::span<const TrackRecord> track(tracks.data() + begin, end - begin);
    const auto windows = observation_windows(track, mc.t_obs, data.stride);
    if (windows.empty()) {
      ++skipped;
      ctx.warn(
        "track {}/{} has {} frames and no gap-free run of {} at stride {}; skipped",
        track.front().scene_id, track.front().ped_id, track.size(), mc.t_obs, data.stride);
    }
    for (const Sample & w : windows) {
      const Prediction p = predict(model, w.obs);
      const auto last = w.id.start_frame + static_cast<std::int64_t>((mc.t_obs - 1) * data.stride);
      ordered_json row{
        {"scene_id", w.id.scene_id},
        {"ped_id", w.id.ped_id},
        {"frame", last},
        {"start_frame", w.id.start_frame},
        {"stride", data.stride},
        {"boxes", boxes_json(p.boxes)}};
      if (p.attrs) {
        row["attrs"] = *p.attrs;
      }
      file << row.dump() << '\n';
      ++written;
    }
    begin = end;
  }
  ctx.info("wrote {} predictions to {}", written, out.string());
  if (skipped > 0) {
    ctx.err << fmt::format("skipped {} short tracks\n", skipped);
  }
  return 0;
}

// ---------------------------------------------------------------- report

struct EvalInput
{
  fs::path report;
  fs::path samples;
  std::string tag;
};

EvalInput locate_eval(const std::string & arg)
{
  const fs::path p(arg);
  EvalInput in;
  if (fs::is_directory(p)) {
    in.report = p / "report.json";
    in.samples = p / "samples.jsonl";
    in.tag = p.filename().string();
    if (in.tag.empty()) {
      in.tag = p.parent_path().filename().string();
    }
  } else {
    in.report = p;
    in.samples = p.parent_path() / "samples.jsonl";
    in.tag = p.parent_path().filename().string();
  }
  if (!fs::exists(in.report)) {
    throw ParseError("no eval report at " + in.report.string());
  }
  return in;
}

std::vector<EvalReport> read_reports(const fs::path & path)
{
  std::ifstream f(path);
  ordered_json j;
  try {
    j = ordered_json::parse(f);
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  std::vector<EvalReport> out;
  for (const auto & r : j.at("reports")) {
    out.push_back(report_from_json(r));
  }
  return out;
}

const char * kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

std::vector<Point2> ground_track(const BBox3d & anchor, std::span<const BBox3d> boxes)
{
  std::vector<Point2> pts{{anchor.x, anchor.z}};
  for (const BBox3d & b : boxes) {
    pts.emplace_back(b.x, b.z);
  }
  return pts;
}

std::string csv_field(const std::string & s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string q = "\"";
  for (char c : s) {
    q += c == '"' ? std::string("\"\"") : std::string(1, c);
  }
  return q + "\"";
}

std::string file_safe(std::string s)
{
  for (char & c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return s;
}

int cmd_report(const Context & ctx, const std::vector<std::string> & args, std::size_t n_overlays)
{
  if (args.empty()) {
    throw ConfigError("report needs at least one eval output (directory or report.json)");
  }
  const fs::path out = require_out(ctx, "output directory");
  fs::create_directories(out);

  std::vector<EvalInput> inputs;
  std::vector<fs::path> digests;
  for (const std::string & a : args) {
    inputs.push_back(locate_eval(a));
    digests.push_back(inputs.back().report);
    if (fs::exists(inputs.back().samples)) {
      digests.push_back(inputs.back().samples);
    }
  }
  write_manifest(
    out / "manifest.json",
    start_manifest(ctx, "report", ordered_json{{"overlays", n_overlays}}, 0, digests));

  std::vector<EvalReport> rows;
  std::vector<std::string> sources;
  std::optional<EvalReport> zero;
  std::set<std::string> names;
  for (const EvalInput & in : inputs) {
    for (EvalReport r : read_reports(in.report)) {
      if (r.model == kZeroVel) {
        if (!zero) {
          zero = r;
        }
        continue;
      }
      if (!names.insert(r.model).second) {
        r.model += " [" + in.tag + "]";
        names.insert(r.model);
      }
      rows.push_back(std::move(r));
      sources.push_back(in.report.string());
    }
  }
  if (zero) {
    rows.push_back(*zero);
    sources.push_back(inputs.front().report.string());
  }
  if (rows.empty()) {
    throw ConfigError("eval reports contain no rows");
  }

  std::string csv = "model,ade,fde,aiou,fiou,attr_accuracy,n_samples,source\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const EvalReport & r = rows[i];
    csv += fmt::format(
      "{},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{}\n", csv_field(r.model), r.ade, r.fde, r.aiou,
      r.fiou, r.attr_accuracy ? fmt::format("{:.17g}", *r.attr_accuracy) : std::string(),
      r.n_samples, csv_field(sources[i]));
  }
  write_text(out / "summary.csv", csv);
  const std::string table = format_report_table(rows);
  write_text(out / "summary.txt", table);
  write_text(out / "horizon.csv", format_horizon_csv(rows));

  std::vector<Polyline> disp;
  std::vector<Polyline> iou;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool baseline = rows[i].model == kZeroVel;
    Polyline d{rows[i].model, baseline ? "#555555" : kPalette[i % std::size(kPalette)], {}, baseline};
    Polyline u = d;
    for (const HorizonRow & h : rows[i].per_horizon) {
      d.points.emplace_back(static_cast<double>(h.step), h.displacement);
      u.points.emplace_back(static_cast<double>(h.step), h.iou);
    }
    disp.push_back(std::move(d));
    iou.push_back(std::move(u));
  }
  for (const Polyline & p : disp) {
    if (p.points.size() != disp.front().points.size()) {
      throw ConfigError("eval reports disagree on the prediction horizon");
    }
  }
  write_text(out / "horizon_displacement.svg", svg_horizon_curves("Displacement vs horizon", "displacement (m)", disp));
  write_text(out / "horizon_iou.svg", svg_horizon_curves("3D IoU vs horizon", "IoU", iou));

  std::size_t plots = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!fs::exists(inputs[i].samples)) {
      ctx.warn("{} missing; no overlays for that input", inputs[i].samples.string());
      continue;
    }
    std::ifstream f(inputs[i].samples);
    std::string line;
    for (std::size_t k = 0; k < n_overlays && std::getline(f, line); ++k) {
      const ordered_json s = ordered_json::parse(line);
      const auto obs = boxes_from_json(s.at("obs"));
      const auto gt = boxes_from_json(s.at("gt"));
      const auto pred = boxes_from_json(s.at("pred"));
      std::vector<Point2> observed;
      for (const BBox3d & b : obs) {
        observed.emplace_back(b.x, b.z);
      }
      const std::vector<Polyline> lines{
        {"observed", "#555555", observed, false},
        {"ground truth", "#2ca02c", ground_track(obs.back(), gt), false},
        {"prediction", "#d62728", ground_track(obs.back(), pred), true}};
      const std::string title = fmt::format(
        "{}: {}/{} from frame {}", inputs[i].tag, s.at("scene_id").get<std::string>(),
        s.at("ped_id").get<std::string>(), s.at("start_frame").get<std::int64_t>());
      write_text(
        out / fmt::format("overlay_{}_{:02d}.svg", file_safe(inputs[i].tag), k),
        svg_trajectory_overlay(title, lines));
      ++plots;
    }
  }
  if (!ctx.globals.quiet) {
    ctx.out << table;
  }
  ctx.info("wrote summary, 2 horizon plots and {} overlays to {}", plots, out.string());
  return 0;
}

}  // namespace

int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Pedestrian 3D bounding-box forecasting with position/velocity LSTMs", "pvlstm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Globals globals;
  app.add_option("--seed", globals.seed, "seed override for every random choice");
  app.add_option("--config", globals.config, "key = value configuration file");
  app.add_option("--out", globals.out, "output file or directory");
  app.add_flag("--quiet", globals.quiet, "suppress progress output");

  Overrides overrides;

  CLI::App * gen = app.add_subcommand("gen", "generate synthetic pedestrian tracks");
  gen->fallthrough();
  std::string spec_path;
  gen->add_option("spec", spec_path, "synthetic spec file (defaults to --config)");

  CLI::App * train = app.add_subcommand("train", "train a model on a track file");
  train->fallthrough();
  std::string train_data;
  std::string val_data;
  train->add_option("--data", train_data, "training track file")->required();
  train->add_option("--val", val_data, "validation track file (default: scene split of --data)");
  add_model_flags(train, overrides);
  add_data_flags(train, overrides);
  kv_option(train, overrides, "--val_fraction", "val_fraction", "scenes held out for validation");
  kv_option(train, overrides, "--balance", "balance", "undersample attribute classes (true/false)");
  kv_option(train, overrides, "--lr0", "lr0", "initial learning rate");
  kv_option(train, overrides, "--epochs", "epochs", "training epochs");
  kv_option(train, overrides, "--batch", "batch", "mini-batch size");
  kv_option(train, overrides, "--factor", "factor", "plateau lr reduction factor");
  kv_option(train, overrides, "--patience", "patience", "plateau patience in epochs");
  kv_option(train, overrides, "--threshold", "threshold", "plateau improvement threshold");
  kv_option(train, overrides, "--attr_final_step_only", "attr_final_step_only",
            "score the attribute loss on the last step only (true/false)");
  kv_flag(train, overrides, "--multi-task,--multi_task", "multi_task", "add the attribute loss");
  kv_flag(train, overrides, "--attr-only,--attr_only", "attr_only",
          "train the attribute decoder alone (single-task)");

  CLI::App * eval = app.add_subcommand("eval", "score a checkpoint and the Zero-Vel baseline");
  eval->fallthrough();
  std::string eval_ckpt;
  std::string eval_data;
  std::string eval_label;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "track file")->required();
  eval->add_option("--label", eval_label, "row name for the model");
  add_model_flags(eval, overrides);
  add_data_flags(eval, overrides);

  CLI::App * pred = app.add_subcommand("predict", "write predicted boxes for every track window");
  pred->fallthrough();
  std::string pred_ckpt;
  std::string pred_data;
  pred->add_option("--checkpoint", pred_ckpt, "checkpoint file")->required();
  pred->add_option("--data", pred_data, "track file")->required();
  add_model_flags(pred, overrides);
  add_data_flags(pred, overrides);

  CLI::App * report = app.add_subcommand("report", "combine eval outputs into tables and plots");
  report->fallthrough();
  std::vector<std::string> report_inputs;
  std::size_t n_overlays = 3;
  report->add_option("inputs", report_inputs, "eval output directories or report.json files");
  report->add_option("--overlays", n_overlays, "trajectory overlays per input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e, out, err);
  }

  Context ctx{globals, std::vector<std::string>(argv, argv + argc), out, err};
  try {
    if (*gen) {
      return cmd_gen(ctx, spec_path);
    }
    if (*train) {
      return cmd_train(ctx, overrides, train_data, val_data);
    }
    if (*eval) {
      return cmd_eval(ctx, overrides, eval_ckpt, eval_data, eval_label);
    }
    if (*pred) {
      return cmd_predict(ctx, overrides, pred_ckpt, pred_data);
    }
    return cmd_report(ctx, report_inputs, n_overlays);
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pvlstm::cli
