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

// Flat `key = value` run configuration. Every key has a default; a config
// file and command-line flags override it in that order.

#ifndef MERLIN_TOOLS_CONFIG_H_
#define MERLIN_TOOLS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/baselines.h"
#include "merlin/data.h"
#include "merlin/model.h"
#include "merlin/synth.h"

namespace merlin::cli {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
  // Paths and thread counts do not change results and stay out of
  // checkpoint echoes.
  bool is_path = false;
  bool affects_results = true;
};

const std::vector<ConfigKey>& config_keys();

class RunConfig {
 public:
  RunConfig();

  // `#` starts a comment; blank lines are skipped. ConfigError with
  // path:line on malformed lines or unknown keys.
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text, std::string_view origin);
  // ConfigError on unknown keys.
  void set(std::string_view key, std::string value);

  const std::string& get(std::string_view key) const;
  bool has_value(std::string_view key) const { return !get(key).empty(); }
  int64_t get_int(std::string_view key) const;
  size_t get_size(std::string_view key) const;
  uint64_t get_seed() const;
  double get_double(std::string_view key) const;
  std::vector<size_t> get_sizes(std::string_view key) const;

  // Sorted `key = value` lines, loadable by load_file.
  std::string dump() const;
  // Result-affecting settings for checkpoint echoes.
  ConfigEcho echo() const;

  SynthConfig synth_config() const;
  SplitConfig split_config() const;
  MerlinArchitecture architecture(size_t frame_dim, size_t demographics_width) const;
  TrainConfig train_config() const;
  RfTrainConfig rf_config() const;
  PmfTrainConfig pmf_config() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace merlin::cli

#endif  // MERLIN_TOOLS_CONFIG_H_
