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

#include "config.h"

#include <charconv>
#include <string>

#include "merlin/errors.h"
#include "merlin/io.h"

namespace merlin::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      // General.
      {"seed", "0", "seed for every random stream"},
      {"threads", "1", "worker threads for read-only scoring", false, false},
      {"out", "", "output directory", true},
      {"window_days", "365", "frequency/recency window in days"},
      {"neg_per_pos", "9", "negatives per positive in eval sets"},
      // Inputs.
      {"frames_dir", "", "directory of per-movie frame files", true},
      {"attendance", "", "attendance CSV", true},
      {"split_dir", "", "directory written by `split`", true},
      {"demographics", "", "demographics CSV", true},
      {"schema", "", "demographics schema CSV", true},
      {"videos", "", "video vectors CSV written by `pool`", true},
      {"checkpoint", "", "model checkpoint", true},
      // synth
      {"n_users", "2000", "synthetic users"},
      {"n_movies", "200", "synthetic movies"},
      {"latent_dim", "8", "latent taste dimension"},
      {"frame_dim", "64", "frame feature width"},
      {"frames_min", "50", "fewest frames per trailer"},
      {"frames_max", "150", "most frames per trailer"},
      {"frame_noise", "1", "frame noise stddev"},
      {"taste_noise", "0.5", "taste noise stddev around the cluster centre"},
      {"n_clusters", "6", "taste clusters"},
      {"heavy_fraction", "0.2", "fraction of heavy moviegoers"},
      {"upside", "1", "utility gain U of a liked movie"},
      {"heavy_downside_min", "0.3", "heavy cohort |D| lower bound"},
      {"heavy_downside_max", "1", "heavy cohort |D| upper bound"},
      {"casual_downside_min", "2", "casual cohort |D| lower bound"},
      {"casual_downside_max", "8", "casual cohort |D| upper bound"},
      {"awareness", "0.5", "probability a user considers a movie"},
      {"sequel_tail", "0.4", "fraction of latest releases that may be sequels"},
      {"sequel_prob", "0.6", "sequel probability inside the tail"},
      {"sequel_noise", "0.12", "sequel latent noise stddev"},
      {"demo_signal", "0.7", "probability of the cluster's preferred demographic"},
      {"demo_missing", "0.05", "probability a demographic field is missing"},
      {"release_span_days", "1095", "days over which releases are spread"},
      {"attendance_span_days", "90", "days after release attendance can happen"},
      {"start_date", "2015-01-01", "first release date"},
      // pool
      {"max_frames", "100", "frames averaged per trailer"},
      // split
      {"n_coldstart", "50", "latest movies held out for cold-start"},
      {"val_frac", "0.1", "validation fraction of the remaining records"},
      {"test_frac", "0.1", "test fraction of the remaining records"},
      // train
      {"model", "merlin", "merlin | rf | pmf"},
      {"embedding_dim", "32", "shared embedding width d"},
      {"f_hidden", "256,64", "hidden widths of the trailer projection"},
      {"g_hidden", "256,64", "hidden widths of the demographics projection"},
      {"activation", "relu", "relu | tanh | identity"},
      {"batch_size", "512", "pairs per batch, even"},
      {"max_epochs", "50", "epoch limit"},
      {"patience", "6", "epochs without validation gain before stopping"},
      {"batches_per_epoch", "0", "0 derives 2 * train pairs / batch_size"},
      {"optimizer", "adam", "adam | sgd"},
      {"learning_rate", "0.001", "Merlin learning rate"},
      {"offset_l2", "0.001", "L2 weight on the offset table"},
      {"dropout_p", "0.5", "dropout on the head inputs"},
      {"pmf_rank", "32", "matrix factorization rank"},
      {"pmf_l2", "0.001", "matrix factorization L2"},
      {"pmf_learning_rate", "0.01", "matrix factorization learning rate"},
      {"pmf_patience", "3", "matrix factorization patience"},
      {"rf_learning_rate", "0.1", "recency-frequency learning rate"},
      {"rf_max_iterations", "2000", "recency-frequency gradient steps"},
      // eval
      {"protocol", "both", "in_matrix | cold_start | both"},
      // comps
      {"target", "", "target movie id"},
      {"k_users", "0", "audience size, 0 for min(10000, 10% of users)"},
      {"n_comps", "10", "comps listed"},
      // gradcheck
      {"gradcheck_instances", "100", "random instances checked"},
      {"gradcheck_tolerance", "0.0001", "largest accepted relative error"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  load_text(read_file(path), path.string());
}

void RunConfig::load_text(std::string_view text, std::string_view origin) {
  size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (!values_.count(key)) {
      throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    }
    values_.find(key)->second = std::string(trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(std::string_view key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second = std::move(value);
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  return it->second;
}

int64_t RunConfig::get_int(std::string_view key) const {
  try {
    return parse_int(get(key), key);
  } catch (const ParseError&) {
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" +
                      get(key) + "'");
  }
}

size_t RunConfig::get_size(std::string_view key) const {
  const int64_t v = get_int(key);
  if (v < 0) throw ConfigError("key '" + std::string(key) + "' must be >= 0");
  return static_cast<size_t>(v);
}

uint64_t RunConfig::get_seed() const {
  const std::string& text = get("seed");
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("key 'seed' expects an unsigned integer, got '" + text + "'");
  }
  return v;
}

double RunConfig::get_double(std::string_view key) const {
  try {
    return parse_double(get(key), key);
  } catch (const ParseError&) {
    throw ConfigError("key '" + std::string(key) + "' expects a number, got '" +
                      get(key) + "'");
  }
}

std::vector<size_t> RunConfig::get_sizes(std::string_view key) const {
  std::vector<size_t> out;
  const std::string& text = get(key);
  if (trim(text).empty()) return out;
  for (auto cell : split_csv(text)) {
    int64_t v = 0;
    try {
      v = parse_int(trim(cell), key);
    } catch (const ParseError&) {
      throw ConfigError("key '" + std::string(key) +
                        "' expects comma-separated integers, got '" + text + "'");
    }
    if (v <= 0) throw ConfigError("key '" + std::string(key) + "' widths must be >= 1");
    out.push_back(static_cast<size_t>(v));
  }
  return out;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

ConfigEcho RunConfig::echo() const {
  ConfigEcho e;
  for (const auto& k : config_keys()) {
    if (k.is_path || !k.affects_results) continue;
    e[k.name] = get(k.name);
  }
  return e;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig c;
  c.n_users = get_size("n_users");
  c.n_movies = get_size("n_movies");
  c.latent_dim = get_size("latent_dim");
  c.frame_dim = get_size("frame_dim");
  c.frames_min = get_size("frames_min");
  c.frames_max = get_size("frames_max");
  c.frame_noise = get_double("frame_noise");
  c.taste_noise = get_double("taste_noise");
  c.n_clusters = get_size("n_clusters");
  c.heavy_fraction = get_double("heavy_fraction");
  c.upside = get_double("upside");
  c.heavy_downside_min = get_double("heavy_downside_min");
  c.heavy_downside_max = get_double("heavy_downside_max");
  c.casual_downside_min = get_double("casual_downside_min");
  c.casual_downside_max = get_double("casual_downside_max");
  c.awareness = get_double("awareness");
  c.sequel_tail = get_double("sequel_tail");
  c.sequel_prob = get_double("sequel_prob");
  c.sequel_noise = get_double("sequel_noise");
  c.demo_signal = get_double("demo_signal");
  c.demo_missing = get_double("demo_missing");
  c.release_span_days = static_cast<int>(get_int("release_span_days"));
  c.attendance_span_days = static_cast<int>(get_int("attendance_span_days"));
  c.start_date = get("start_date");
  c.seed = get_seed();
  c.validate();
  return c;
}

SplitConfig RunConfig::split_config() const {
  SplitConfig c;
  c.n_coldstart = get_size("n_coldstart");
  c.val_frac = get_double("val_frac");
  c.test_frac = get_double("test_frac");
  c.seed = get_seed();
  return c;
}

MerlinArchitecture RunConfig::architecture(size_t frame_dim,
                                           size_t demographics_width) const {
  MerlinArchitecture a;
  a.frame_dim = frame_dim;
  a.demographics_width = demographics_width;
  a.embedding_dim = get_size("embedding_dim");
  a.f_hidden = get_sizes("f_hidden");
  a.g_hidden = get_sizes("g_hidden");
  try {
    a.activation = parse_activation(get("activation"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  a.window_days = static_cast<int>(get_int("window_days"));
  return a;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.batch_size = get_size("batch_size");
  c.max_epochs = get_size("max_epochs");
  c.patience = get_size("patience");
  c.batches_per_epoch = get_size("batches_per_epoch");
  try {
    c.optimizer.kind = parse_optimizer(get("optimizer"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.optimizer.learning_rate = get_double("learning_rate");
  c.offset_l2 = get_double("offset_l2");
  c.dropout_p = get_double("dropout_p");
  c.neg_per_pos = get_size("neg_per_pos");
  c.seed = get_seed();
  c.validate();
  return c;
}

RfTrainConfig RunConfig::rf_config() const {
  RfTrainConfig c;
  c.learning_rate = get_double("rf_learning_rate");
  c.max_iterations = get_size("rf_max_iterations");
  c.window_days = static_cast<int>(get_int("window_days"));
  return c;
}

PmfTrainConfig RunConfig::pmf_config() const {
  PmfTrainConfig c;
  c.rank = get_size("pmf_rank");
  c.l2 = get_double("pmf_l2");
  c.batch_size = get_size("batch_size");
  c.max_epochs = get_size("max_epochs");
  c.patience = get_size("pmf_patience");
  c.batches_per_epoch = get_size("batches_per_epoch");
  c.optimizer.learning_rate = get_double("pmf_learning_rate");
  c.neg_per_pos = get_size("neg_per_pos");
  c.seed = get_seed();
  return c;
}

}  // namespace merlin::cli
