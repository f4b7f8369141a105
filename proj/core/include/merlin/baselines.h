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

// Comparison models: a recency-frequency logistic regression and logistic
// matrix factorization over implicit attendance.

#ifndef MERLIN_BASELINES_H_
#define MERLIN_BASELINES_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/data.h"
#include "merlin/model.h"
#include "merlin/nn.h"
#include "merlin/tensor.h"
#include "merlin/workspace.h"

namespace merlin {

// ---- Recency-frequency -----------------------------------------------------

struct RfExample {
  int frequency = 0;
  int recency = 0;
  uint8_t label = 0;
};

// Inputs are [log(1 + frequency), -recency / window], standardized.
struct RfParams {
  std::array<double, 2> weights = {0.0, 0.0};
  double bias = 0.0;
  std::array<double, 2> mean = {0.0, 0.0};
  std::array<double, 2> stddev = {1.0, 1.0};
  int window_days = kDefaultWindowDays;

  bool operator==(const RfParams&) const = default;
};

struct RfTrainConfig {
  double learning_rate = 0.1;
  size_t max_iterations = 2000;
  // Validation AUC is checked every `eval_every` full-batch steps.
  size_t eval_every = 20;
  size_t patience = 5;
  int window_days = kDefaultWindowDays;
};

std::array<double, 2> rf_raw_features(int frequency, int recency,
                                      int window_days);
double rf_predict(const RfParams& params, int frequency, int recency);

// Full-batch gradient descent on mean cross-entropy, keeping the iterate
// with the best validation AUC. An empty or single-class validation set
// disables early stopping. Throws FitError unless `train` has both classes.
RfParams rf_train(std::span<const RfExample> train,
                  std::span<const RfExample> validation,
                  const RfTrainConfig& config);

// Builds examples from the workspace with the shared batch sampler and the
// validation eval set, then calls rf_train.
RfParams train_rf(const Workspace& ws, const RfTrainConfig& config,
                  uint64_t seed);

// "MRLR" | u16 version | u32 window | 2 f64 weights | f64 bias | 4 f64 stats
// | u32-length key=value block.
std::string serialize_rf(const RfParams& params, const ConfigEcho& echo);
void save_rf(const std::filesystem::path& path, const RfParams& params,
             const ConfigEcho& echo);
struct RfCheckpoint {
  RfParams params;
  ConfigEcho echo;
};
RfCheckpoint deserialize_rf(std::string_view bytes);

// ---- Matrix factorization --------------------------------------------------

struct PmfParams {
  std::vector<std::string> user_ids;   // sorted
  std::vector<std::string> movie_ids;  // sorted
  Tensor2 users;
  Tensor2 movies;
  double bias = 0.0;

  size_t rank() const { return users.cols(); }
  std::optional<size_t> user_row(std::string_view id) const;
  std::optional<size_t> movie_row(std::string_view id) const;
  bool operator==(const PmfParams&) const = default;
};

struct PmfTrainConfig {
  size_t rank = 32;
  double l2 = 1e-3;
  double init_scale = 0.1;
  size_t batch_size = 512;
  size_t max_epochs = 50;
  size_t patience = 3;
  // 0 derives ceil(2 * distinct train pairs / batch_size).
  size_t batches_per_epoch = 0;
  OptimizerConfig optimizer = {OptimizerKind::kAdam, 1e-2};
  size_t neg_per_pos = 9;
  uint64_t seed = 0;
};

// Tables with N(0, init_scale^2) entries and zero bias.
PmfParams init_pmf(std::vector<std::string> user_ids,
                   std::vector<std::string> movie_ids, size_t rank,
                   double init_scale, uint64_t seed);

double pmf_logit(const PmfParams& params, size_t user_row, size_t movie_row);
// ColdStartUnsupported for a movie outside the table, LookupError for an
// unknown user.
double pmf_predict(const PmfParams& params, std::string_view user_id,
                   std::string_view movie_id);

struct PmfExample {
  size_t user_row = 0;
  size_t movie_row = 0;
  uint8_t label = 0;
};

// Mean cross-entropy of sigmoid(bias + u.v) plus l2 * (|u|^2 + |v|^2)
// averaged over the batch. Adds the gradient into the three outputs when
// they are non-null.
double pmf_batch_loss(const PmfParams& params, std::span<const PmfExample> batch,
                      double l2, Tensor2* user_grads, Tensor2* movie_grads,
                      double* bias_grad);

// One optimizer step; returns the batch loss.
double pmf_step(PmfParams& params, OptimizerState& optimizer,
                std::span<const PmfExample> batch, double l2);

// The user table covers every catalog user and the movie table every movie
// with training attendance. Validation AUC early stopping as for Merlin.
PmfParams train_pmf(const Workspace& ws, const PmfTrainConfig& config);

// "MRLP" | u16 version | u32 rank | f64 bias | u32 users, (u16 id, k f64)
// each | u32 movies, likewise | u32-length key=value block.
std::string serialize_pmf(const PmfParams& params, const ConfigEcho& echo);
void save_pmf(const std::filesystem::path& path, const PmfParams& params,
              const ConfigEcho& echo);
struct PmfCheckpoint {
  PmfParams params;
  ConfigEcho echo;
};
PmfCheckpoint deserialize_pmf(std::string_view bytes);

}  // namespace merlin

#endif  // MERLIN_BASELINES_H_
