// Copyright 2026 The Authors.
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

#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "config.h"
#include "merlin/baselines.h"
#include "merlin/comps.h"
#include "merlin/errors.h"
#include "merlin/eval.h"
#include "merlin/gradcheck.h"
#include "merlin/io.h"
#include "merlin/model.h"
#include "merlin/synth.h"
#include "merlin/videovec.h"
#include "merlin/workspace.h"

namespace merlin::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kCheckpointFile = "model.mrlc";
constexpr const char* kEvalFile = "eval.csv";
constexpr const char* kCompsFile = "comps.csv";
constexpr const char* kLogFile = "run.log";

struct Command {
  const char* name;
  const char* help;
  std::vector<const char*> inputs;  // path keys that must exist
  bool needs_out;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"synth", "generate a synthetic world", {}, true},
      {"pool", "average trailer frames into video vectors", {"frames_dir"}, true},
      {"split", "partition attendance into train/validation/test/cold-start",
       {"attendance"}, true},
      {"train", "train merlin, rf or pmf",
       {"split_dir", "schema", "demographics", "videos"}, true},
      {"eval", "AUC under the in-matrix and cold-start protocols",
       {"checkpoint", "split_dir", "schema", "demographics", "videos"}, true},
      {"comps", "comp table for a target movie",
       {"checkpoint", "split_dir", "schema", "demographics", "videos"}, true},
      {"gradcheck", "finite-difference check of the Merlin gradient", {}, false},
  };
  return list;
}

class RunLog {
 public:
  void note(const std::string& line) { lines_.push_back(line); }
  void write(const fs::path& dir, const std::string& command,
             const RunConfig& config) const {
    std::string text = "# merlin " + command + "\n";
    text += "# resolved configuration (flag > config file > default)\n";
    text += config.dump();
    text += "# results\n";
    for (const auto& l : lines_) text += "# " + l + "\n";
    write_file(dir / kLogFile, text);
  }

 private:
  std::vector<std::string> lines_;
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void validate_paths(const Command& cmd, const RunConfig& config) {
  for (const char* key : cmd.inputs) {
    if (!config.has_value(key)) {
      throw ConfigError(std::string("missing required setting '") + key + "'");
    }
    if (!fs::exists(config.get(key))) {
      throw IoError(std::string(key) + " '" + config.get(key) + "' does not exist");
    }
  }
  if (cmd.needs_out && !config.has_value("out")) {
    throw ConfigError("missing required setting 'out'");
  }
  if (config.get_size("threads") < 1) throw ConfigError("threads must be >= 1");
}

Workspace load_workspace(const RunConfig& config, int window_days) {
  const DatasetSplit split = load_split(config.get("split_dir"));
  const DemographicsSchema schema = load_schema(config.get("schema"));
  const auto profiles = load_demographics(config.get("demographics"), schema);
  const VideoTable videos = load_video_vectors(config.get("videos"));
  return Workspace::build(split, schema, profiles, videos, window_days);
}

struct LoadedModel {
  std::string kind;
  std::optional<MerlinCheckpoint> merlin;
  std::optional<RfCheckpoint> rf;
  std::optional<PmfCheckpoint> pmf;
  std::optional<int> window_days;
};

LoadedModel load_model(const fs::path& path) {
  const std::string bytes = read_file(path);
  const std::string_view magic = std::string_view(bytes).substr(0, 4);
  LoadedModel m;
  if (magic == "MRLC") {
    m.kind = "merlin";
    m.merlin = deserialize_merlin(bytes);
    m.window_days = m.merlin->params.window_days;
  } else if (magic == "MRLR") {
    m.kind = "rf";
    m.rf = deserialize_rf(bytes);
    m.window_days = m.rf->params.window_days;
  } else if (magic == "MRLP") {
    m.kind = "pmf";
    m.pmf = deserialize_pmf(bytes);
  } else {
    throw FormatError("unrecognized checkpoint magic in '" + path.string() + "'");
  }
  return m;
}

std::unique_ptr<PairScorer> make_scorer(const LoadedModel& m, const Workspace& ws) {
  if (m.merlin) {
    const auto& p = m.merlin->params;
    if (p.f_spec.input_dim() != ws.frame_dim()) {
      throw ShapeError("checkpoint expects video width " +
                       std::to_string(p.f_spec.input_dim()) + ", data has " +
                       std::to_string(ws.frame_dim()));
    }
    if (p.g_spec.input_dim() != ws.schema.width()) {
      throw ShapeError("checkpoint expects demographics width " +
                       std::to_string(p.g_spec.input_dim()) + ", schema has " +
                       std::to_string(ws.schema.width()));
    }
    return std::make_unique<MerlinPairScorer>(p, ws);
  }
  if (m.rf) return std::make_unique<RfPairScorer>(m.rf->params, ws);
  return std::make_unique<PmfPairScorer>(m.pmf->params, ws);
}

void cmd_synth(const RunConfig& config, std::ostream& out, RunLog& log) {
  const SyntheticWorld world = simulate(config.synth_config());
  const fs::path dir = config.get("out");
  write_world(dir, world);
  std::map<std::string, size_t> per_user;
  for (const auto& r : world.records) ++per_user[r.user_id];
  double heavy = 0, casual = 0;
  size_t n_heavy = 0, n_casual = 0;
  for (const auto& u : world.users) {
    (u.heavy ? heavy : casual) += static_cast<double>(per_user[u.user_id]);
    ++(u.heavy ? n_heavy : n_casual);
  }
  log.note("records " + std::to_string(world.records.size()));
  log.note("heavy users " + std::to_string(n_heavy) + " mean attendance " +
           fixed(n_heavy ? heavy / n_heavy : 0.0, 2));
  log.note("casual users " + std::to_string(n_casual) + " mean attendance " +
           fixed(n_casual ? casual / n_casual : 0.0, 2));
  out << "wrote " << world.records.size() << " attendance records for "
      << world.users.size() << " users and " << world.movies.size()
      << " movies to " << dir.string() << "\n";
}

void cmd_pool(const RunConfig& config, std::ostream& out, RunLog& log) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config.get("frames_dir"))) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".mrlf" || ext == ".csv")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw EmptyDatasetError("no frame files in '" + config.get("frames_dir") + "'");
  const size_t max_frames = config.get_size("max_frames");
  VideoTable table;
  for (const auto& f : files) {
    const FrameFeatureSet set = load_frame_features(f);
    if (table.count(set.movie_id)) {
      throw FormatError("duplicate frame features for movie '" + set.movie_id + "'");
    }
    table[set.movie_id] = pool_frames(set, max_frames).values;
  }
  const fs::path dir = config.get("out");
  fs::create_directories(dir);
  save_video_vectors(dir / "videos.csv", table);
  log.note("pooled " + std::to_string(table.size()) + " movies");
  out << "pooled " << table.size() << " trailers into " << (dir / "videos.csv").string() << "\n";
}

void cmd_split(const RunConfig& config, std::ostream& out, RunLog& log) {
  const AttendanceLoad load = load_attendance(config.get("attendance"));
  const DatasetSplit split = split_dataset(load.records, config.split_config());
  const fs::path dir = config.get("out");
  fs::create_directories(dir);
  write_split(dir, split);
  log.note("duplicates dropped " + std::to_string(load.duplicates_dropped));
  log.note("train " + std::to_string(split.train.size()) + " validation " +
           std::to_string(split.validation.size()) + " test " +
           std::to_string(split.test.size()) + " coldstart " +
           std::to_string(split.coldstart.size()));
  out << "train " << split.train.size() << ", validation " << split.validation.size()
      << ", test " << split.test.size() << ", cold-start " << split.coldstart.size()
      << " (" << split.coldstart_movies.size() << " movies)\n";
}

void cmd_train(const RunConfig& config, std::ostream& out, RunLog& log) {
  const std::string model = config.get("model");
  if (model != "merlin" && model != "rf" && model != "pmf") {
    throw ConfigError("model must be merlin, rf or pmf, got '" + model + "'");
  }
  const int window = static_cast<int>(config.get_int("window_days"));
  if (window <= 0) throw ConfigError("window_days must be positive");
  const Workspace ws = load_workspace(config, window);
  const fs::path dir = config.get("out");
  fs::create_directories(dir);
  const fs::path path = dir / kCheckpointFile;
  const ConfigEcho echo = config.echo();

  if (model == "merlin") {
    const auto result = train_merlin(
        ws, config.architecture(ws.frame_dim(), ws.schema.width()), config.train_config());
    for (const auto& e : result.history) {
      log.note("epoch " + std::to_string(e.epoch) + " train_loss " +
               fixed(e.train_loss, 6) + " validation_auc " + fixed(e.validation_auc, 6));
    }
    log.note("best epoch " + std::to_string(result.best_epoch));
    save_merlin(path, result.params, echo);
    out << "merlin: " << result.history.size() << " epochs, best epoch "
        << result.best_epoch << "\n";
  } else if (model == "rf") {
    const RfParams params = train_rf(ws, config.rf_config(), config.get_seed());
    log.note("weights " + fixed(params.weights[0], 6) + " " +
             fixed(params.weights[1], 6) + " bias " + fixed(params.bias, 6));
    save_rf(path, params, echo);
    out << "rf: trained\n";
  } else {
    const PmfParams params = train_pmf(ws, config.pmf_config());
    log.note("users " + std::to_string(params.user_ids.size()) + " movies " +
             std::to_string(params.movie_ids.size()));
    save_pmf(path, params, echo);
    out << "pmf: trained\n";
  }
  log.note("checkpoint " + path.string());
  out << "checkpoint written to " << path.string() << "\n";
}

void cmd_eval(const RunConfig& config, const std::set<std::string>& flags,
              std::ostream& out, RunLog& log) {
  const std::string protocol = config.get("protocol");
  std::vector<Protocol> modes;
  if (protocol == "both") {
    modes = {Protocol::kInMatrix, Protocol::kColdStart};
  } else {
    try {
      modes = {parse_protocol(protocol)};
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  const LoadedModel model = load_model(config.get("checkpoint"));
  if (flags.count("model") && config.get("model") != model.kind) {
    log.note("checkpoint holds a " + model.kind + " model; model = " +
             config.get("model") + " ignored");
  }
  const int window = model.window_days.value_or(static_cast<int>(config.get_int("window_days")));
  const Workspace ws = load_workspace(config, window);
  const auto scorer = make_scorer(model, ws);
  const uint64_t seed = config.get_seed();
  const size_t threads = config.get_size("threads");
  const size_t neg = config.get_size("neg_per_pos");

  std::vector<EvalReport> reports;
  for (Protocol mode : modes) {
    try {
      reports.push_back(evaluate(*scorer, ws, mode, seed, neg, threads));
    } catch (const ColdStartUnsupported&) {
      // A single explicitly requested protocol fails; `both` records NA.
      if (modes.size() == 1) throw;
      reports.push_back(make_unsupported_report(scorer->name(), mode, seed));
    }
  }
  const fs::path dir = config.get("out");
  fs::create_directories(dir);
  write_file(dir / kEvalFile, format_eval_csv(reports));
  const std::string table = format_eval_table(reports);
  for (auto line : split_lines(table)) {
    if (!line.empty()) log.note(std::string(line));
  }
  out << table;
}

void cmd_comps(const RunConfig& config, std::ostream& out, RunLog& log) {
  if (!config.has_value("target")) throw ConfigError("missing required setting 'target'");
  const LoadedModel model = load_model(config.get("checkpoint"));
  const int window = model.window_days.value_or(static_cast<int>(config.get_int("window_days")));
  const Workspace ws = load_workspace(config, window);
  const auto target = ws.catalog.movies.find(config.get("target"));
  if (!target) throw LookupError("unknown target movie '" + config.get("target") + "'");
  const auto scorer = make_scorer(model, ws);

  size_t k = config.get_size("k_users");
  if (k == 0) k = default_k_users(ws.users.size());
  const size_t n = config.get_size("n_comps");
  const Protocol mode = comp_mode(ws, *target);
  const CompTable predicted = comp_table(*scorer, ws, *target, ws.all, k, n, mode,
                                         config.get_size("threads"));
  const CompTable actual = actual_comp_table(ws, *target, n);

  const fs::path dir = config.get("out");
  fs::create_directories(dir);
  write_file(dir / kCompsFile, format_comp_csv(predicted));
  write_file(dir / "comps_actual.csv", format_comp_csv(actual));
  const std::string text = format_comp_side_by_side(predicted, actual);
  write_file(dir / "comps.txt", text);
  const size_t depth = std::min(predicted.entries.size(), actual.entries.size());
  log.note("target " + predicted.target + " mode " +
           std::string(protocol_name(mode)) + " k_users " + std::to_string(k));
  log.note("overlap@" + std::to_string(depth) + " " +
           std::to_string(comp_overlap(predicted, actual, depth)));
  out << text;
}

void cmd_gradcheck(const RunConfig& config, std::ostream& out, RunLog& log) {
  const size_t n = config.get_size("gradcheck_instances");
  const double tolerance = config.get_double("gradcheck_tolerance");
  const uint64_t seed = config.get_seed();
  double worst = 0.0;
  size_t scalars = 0;
  size_t failures = 0;
  for (size_t i = 0; i < n; ++i) {
    const auto inst = random_gradcheck_instance(derive_seed(seed, {i}));
    const auto report = check_merlin_gradients(inst);
    scalars += trainable_count(inst.params);
    worst = std::max(worst, report.max_relative_error);
    if (report.max_relative_error > tolerance) {
      ++failures;
      log.note("instance " + std::to_string(i) + " max relative error " +
               std::to_string(report.max_relative_error));
    }
  }
  log.note("instances " + std::to_string(n) + " scalars " + std::to_string(scalars) +
           " worst relative error " + std::to_string(worst));
  out << n << " instances, " << scalars << " scalars, worst relative error "
      << worst << "\n";
  if (failures > 0) {
    throw TrainingFault(std::to_string(failures) +
                        " gradient check instance(s) exceed tolerance");
  }
}

std::string flag_names(const std::string& key) {
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  return dashed == key ? "--" + key : "--" + dashed + ",--" + key;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Hybrid trailer-based attendance model: synth, pool, split, "
               "train, eval, comps, gradcheck"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::string> config_files;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_files[cmd.name], "flat key = value config file");
    for (const auto& key : config_keys()) {
      options[cmd.name][key.name] = sub->add_option(
          flag_names(key.name), values[cmd.name][key.name],
          key.help + " [" + key.default_value + "]");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const Command& cmd = *std::find_if(commands().begin(), commands().end(),
                                     [&](const Command& c) { return name == c.name; });
  RunConfig config;
  RunLog log;
  std::set<std::string> flags;
  try {
    if (!config_files[name].empty()) config.load_file(config_files[name]);
    for (const auto& [key, opt] : options[name]) {
      if (opt->count() > 0) {
        config.set(key, values[name][key]);
        flags.insert(key);
      }
    }
    validate_paths(cmd, config);
    if (cmd.needs_out) fs::create_directories(config.get("out"));

    if (name == "synth") cmd_synth(config, out, log);
    else if (name == "pool") cmd_pool(config, out, log);
    else if (name == "split") cmd_split(config, out, log);
    else if (name == "train") cmd_train(config, out, log);
    else if (name == "eval") cmd_eval(config, flags, out, log);
    else if (name == "comps") cmd_comps(config, out, log);
    else cmd_gradcheck(config, out, log);

    if (config.has_value("out")) {
      fs::create_directories(config.get("out"));
      log.write(config.get("out"), name, config);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    if (config.has_value("out") && fs::is_directory(config.get("out"))) {
      log.note(std::string("error: ") + std::string(e.kind()) + ": " + e.what());
      log.write(config.get("out"), name, config);
    }
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace merlin::cli
