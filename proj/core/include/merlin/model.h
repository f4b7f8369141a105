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

// The hybrid attendance model.
//
// A movie is represented by the projection f(x) of its pooled trailer vector
// x, plus a learned per-movie offset once attendance has been observed. A
// user is the mean of the movie vectors in their attendance history plus a
// projection g(D) of their one-hot demographics. The squared euclidean
// distance between the two, the user's attendance frequency and recency feed
// a logistic head, and the cross-entropy of that head is backpropagated into
// f, g, the offsets and the head itself.

#ifndef MERLIN_MODEL_H_
#define MERLIN_MODEL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/data.h"
#include "merlin/io.h"
#include "merlin/mlp.h"
#include "merlin/nn.h"
#include "merlin/tensor.h"
#include "merlin/workspace.h"

namespace merlin {

struct MerlinArchitecture {
  size_t frame_dim = kDefaultFrameDim;
  size_t demographics_width = 0;
  size_t embedding_dim = 32;
  std::vector<size_t> f_hidden = {256, 64};
  std::vector<size_t> g_hidden = {256, 64};
  Activation activation = Activation::kRelu;
  int window_days = kDefaultWindowDays;
};

// Head inputs, in order: -distance^2, log(1 + frequency), -recency/window.
inline constexpr size_t kHeadFeatures = 3;

struct FeatureStats {
  std::array<double, kHeadFeatures> mean = {0.0, 0.0, 0.0};
  std::array<double, kHeadFeatures> stddev = {1.0, 1.0, 1.0};
  bool fitted = false;
};

// Trainable state plus the frozen head standardization.
struct MerlinParams {
  MlpSpec f_spec;
  MlpState f;
  MlpSpec g_spec;
  MlpState g;
  // Sorted movie ids; row i of `offsets` belongs to offset_ids[i].
  std::vector<std::string> offset_ids;
  Tensor2 offsets;
  // w_dist, w_freq, w_rec, bias.
  std::array<double, 4> head = {0.0, 0.0, 0.0, 0.0};
  FeatureStats stats;
  size_t embedding_dim = 0;
  int window_days = kDefaultWindowDays;

  std::optional<size_t> offset_row(std::string_view movie_id) const;
};

// f: frame_dim -> d, g: demographics -> d, zero offsets for every movie in
// `offset_movies`, zero head.
MerlinParams init_merlin(const MerlinArchitecture& arch,
                         std::span<const std::string> offset_movies,
                         uint64_t seed);

struct ScoreBreakdown {
  double distance = 0.0;
  // Standardized head inputs (before any dropout).
  double dist_feature = 0.0;
  double freq_feature = 0.0;
  double rec_feature = 0.0;
  double logit = 0.0;
  double probability = 0.5;
};

// In-matrix: f(x) + offset (LookupError when the movie has none).
// Cold-start: f(x), the offset table is never read.
Vec movie_vector(const MerlinParams& params, std::span<const double> video,
                 std::string_view movie_id, Protocol mode);

struct HistoryItem {
  std::string_view movie_id;
  std::span<const double> video;
};

// Mean of the history's movie vectors (skipping `exclude`; zero when nothing
// is left) plus g(demographics). In cold-start mode the history uses content
// projections only, so nothing in the result depends on the offsets.
Vec user_vector(const MerlinParams& params, std::span<const HistoryItem> history,
                std::span<const double> demographics,
                std::optional<std::string_view> exclude, Protocol mode);

// Euclidean norm of u - v; ShapeError on length mismatch.
double propensity_distance(std::span<const double> u, std::span<const double> v);

// Raw (unstandardized) head inputs.
std::array<double, kHeadFeatures> raw_head_features(double distance,
                                                    int frequency, int recency,
                                                    int window_days);

// Logistic head. Train mode applies inverted dropout with `dropout_p` to the
// standardized features. Throws StateError when the stats are not fitted.
ScoreBreakdown predict_probability(const MerlinParams& params, double distance,
                                   int frequency, int recency, RunMode mode,
                                   uint64_t seed, double dropout_p = 0.5);

// Frozen-model scorer over a workspace. Precomputes every projection once;
// score() is const and safe to call from several threads.
class MerlinScorer {
 public:
  MerlinScorer(const MerlinParams& params, const Workspace& ws);

  // Eval-mode score of one pair. The user's history is their training
  // attendance before pair.as_of, excluding pair.movie.
  ScoreBreakdown score(const LabeledPair& pair, Protocol mode) const;
  // ||user - movie||^2 for the pair, as used by the head.
  double squared_distance(const LabeledPair& pair, Protocol mode) const;

  Vec user_vector(uint32_t user, Date as_of, std::optional<uint32_t> exclude,
                  Protocol mode) const;
  // LookupError for an in-matrix movie without offset.
  std::span<const double> movie_vector(uint32_t movie, Protocol mode) const;

 private:
  const MerlinParams& params_;
  const Workspace& ws_;
  std::vector<Vec> projection_;   // f(x) per movie
  std::vector<Vec> in_matrix_;    // f(x) + offset, empty without offset
  std::vector<Vec> user_demo_;    // g(D) per user
};

struct TrainConfig {
  size_t batch_size = 512;
  size_t max_epochs = 50;
  size_t patience = 6;
  // 0 derives ceil(2 * distinct train pairs / batch_size).
  size_t batches_per_epoch = 0;
  OptimizerConfig optimizer = {OptimizerKind::kAdam, 1e-3};
  double offset_l2 = 1e-3;
  double dropout_p = 0.5;
  size_t neg_per_pos = 9;
  uint64_t seed = 0;

  // Throws ConfigError on odd batch size, zero patience or bad rates.
  void validate() const;
};

// Gradient carrier shaped like MerlinParams.
struct MerlinGrads {
  MlpState f;
  MlpState g;
  Tensor2 offsets;
  std::array<double, 4> head = {0.0, 0.0, 0.0, 0.0};

  static MerlinGrads zeros_like(const MerlinParams& params);
};

// Mean binary cross-entropy over `batch` plus offset_l2 * sum ||offset||^2
// over the whole offset table. Every pair must be in-matrix. When `grads` is
// non-null the full gradient is added into it. Train mode draws one dropout
// mask per pair from `dropout_seed`; eval mode is deterministic.
double merlin_batch_loss(const MerlinParams& params, const Workspace& ws,
                         std::span<const LabeledPair> batch, double offset_l2,
                         double dropout_p, RunMode mode, uint64_t dropout_seed,
                         MerlinGrads* grads);

// Flat views over every trainable scalar, in a fixed order (f weights and
// biases, g weights and biases, offsets, head). Stats are not included.
std::vector<ParamBlock> parameter_blocks(MerlinParams& params,
                                         const MerlinGrads& grads);
size_t trainable_count(const MerlinParams& params);
Vec flatten_params(const MerlinParams& params);
void unflatten_params(std::span<const double> flat, MerlinParams& params);
Vec flatten_grads(const MerlinGrads& grads);

// Fits the head standardization on `pairs` under the current projections.
void fit_feature_stats(MerlinParams& params, const Workspace& ws,
                       std::span<const LabeledPair> pairs);

// One optimizer step on one batch; returns the batch loss. Throws
// TrainingFault naming the batch ids when the loss is not finite.
double training_step(MerlinParams& params, OptimizerState& optimizer,
                     const Workspace& ws, std::span<const LabeledPair> batch,
                     const TrainConfig& config, uint64_t dropout_seed);

// Patience-based early stopping on a metric that should increase.
class EarlyStopper {
 public:
  explicit EarlyStopper(size_t patience) : patience_(patience) {}

  // Records one epoch's metric; returns true when it is a new best.
  bool update(double metric);
  bool should_stop() const { return since_best_ >= patience_; }
  // 1-based epoch of the best metric (0 before any update).
  size_t best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }
  size_t epochs_seen() const { return epochs_; }

 private:
  size_t patience_;
  size_t epochs_ = 0;
  size_t best_epoch_ = 0;
  size_t since_best_ = 0;
  double best_ = 0.0;
};

struct EpochStats {
  size_t epoch = 0;
  double train_loss = 0.0;
  double validation_auc = 0.0;
};

struct MerlinTrainResult {
  MerlinParams params;  // best validation checkpoint
  std::vector<EpochStats> history;
  size_t best_epoch = 0;
};

// Full training run on the workspace's training partition with validation
// AUC early stopping. Deterministic given config.seed. Throws ConfigError
// when the training partition is empty.
MerlinTrainResult train_merlin(const Workspace& ws,
                               const MerlinArchitecture& arch,
                               const TrainConfig& config);

// Key=value settings stored alongside a checkpoint.
using ConfigEcho = std::map<std::string, std::string>;

// Little-endian: "MRLC" | u16 version | u32 d | f spec+weights | g
// spec+weights | u32 offset count, (u16 id, d f64) each | 4 f64 head |
// 6 f64 stats | u32-length key=value block.
std::string serialize_merlin(const MerlinParams& params, const ConfigEcho& echo);
void save_merlin(const std::filesystem::path& path, const MerlinParams& params,
                 const ConfigEcho& echo);

struct MerlinCheckpoint {
  MerlinParams params;
  ConfigEcho echo;
};
MerlinCheckpoint load_merlin(const std::filesystem::path& path);
MerlinCheckpoint deserialize_merlin(std::string_view bytes);

// Shared helpers for the MLP sections of the checkpoint formats.
void write_mlp(BinaryWriter& w, const MlpSpec& spec, const MlpState& state);
void read_mlp(BinaryReader& r, MlpSpec& spec, MlpState& state);
std::string encode_echo(const ConfigEcho& echo);
ConfigEcho decode_echo(std::string_view text);

}  // namespace merlin

#endif  // MERLIN_MODEL_H_
