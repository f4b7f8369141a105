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

#include "merlin/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "merlin/errors.h"
#include "merlin/metrics.h"
#include "merlin/random.h"

namespace merlin {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void require_fitted(const MerlinParams& params) {
  if (!params.stats.fitted) {
    throw StateError("head feature statistics are not fitted");
  }
}

std::array<double, kHeadFeatures> standardize(
    const FeatureStats& stats, const std::array<double, kHeadFeatures>& raw) {
  std::array<double, kHeadFeatures> z;
  for (size_t k = 0; k < kHeadFeatures; ++k) {
    z[k] = (raw[k] - stats.mean[k]) / stats.stddev[k];
  }
  return z;
}

std::array<double, kHeadFeatures> raw_features_sq(double squared_distance,
                                                  int frequency, int recency,
                                                  int window_days) {
  return {-squared_distance, std::log1p(static_cast<double>(frequency)),
          -static_cast<double>(recency) / static_cast<double>(window_days)};
}

// Sums `rows` in the given order and divides by the count; zero when empty.
void mean_into(std::span<const std::span<const double>> rows, Vec& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& r : rows) axpy(1.0, r, out);
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    for (double& v : out) v /= n;
  }
}

void add_offset(const MerlinParams& params, size_t row, Vec& v) {
  const auto off = params.offsets.row(row);
  for (size_t i = 0; i < v.size(); ++i) v[i] += off[i];
}

}  // namespace

std::optional<size_t> MerlinParams::offset_row(std::string_view movie_id) const {
  auto it = std::lower_bound(offset_ids.begin(), offset_ids.end(), movie_id);
  if (it == offset_ids.end() || *it != movie_id) return std::nullopt;
  return static_cast<size_t>(it - offset_ids.begin());
}

MerlinParams init_merlin(const MerlinArchitecture& arch,
                         std::span<const std::string> offset_movies,
                         uint64_t seed) {
  if (arch.embedding_dim == 0 || arch.frame_dim == 0 ||
      arch.demographics_width == 0) {
    throw ConfigError("embedding, frame and demographics widths must be >= 1");
  }
  if (arch.window_days <= 0) throw ConfigError("window_days must be positive");
  MerlinParams p;
  p.embedding_dim = arch.embedding_dim;
  p.window_days = arch.window_days;
  p.f_spec = MlpSpec::make(arch.frame_dim, arch.f_hidden, arch.embedding_dim,
                           arch.activation);
  p.g_spec = MlpSpec::make(arch.demographics_width, arch.g_hidden,
                           arch.embedding_dim, arch.activation);
  p.f = init_mlp(p.f_spec, derive_seed(seed, {1}));
  p.g = init_mlp(p.g_spec, derive_seed(seed, {2}));
  p.offset_ids.assign(offset_movies.begin(), offset_movies.end());
  std::sort(p.offset_ids.begin(), p.offset_ids.end());
  p.offset_ids.erase(std::unique(p.offset_ids.begin(), p.offset_ids.end()),
                     p.offset_ids.end());
  p.offsets = Tensor2(p.offset_ids.size(), arch.embedding_dim);
  return p;
}

Vec movie_vector(const MerlinParams& params, std::span<const double> video,
                 std::string_view movie_id, Protocol mode) {
  Vec v = mlp_forward(params.f_spec, params.f, video);
  if (mode == Protocol::kInMatrix) {
    const auto row = params.offset_row(movie_id);
    if (!row) {
      throw LookupError("no offset for movie '" + std::string(movie_id) +
                        "' in in-matrix mode");
    }
    add_offset(params, *row, v);
  }
  return v;
}

Vec user_vector(const MerlinParams& params, std::span<const HistoryItem> history,
                std::span<const double> demographics,
                std::optional<std::string_view> exclude, Protocol mode) {
  std::vector<Vec> movie_vecs;
  for (const auto& item : history) {
    if (exclude && item.movie_id == *exclude) continue;
    movie_vecs.push_back(movie_vector(params, item.video, item.movie_id, mode));
  }
  std::vector<std::span<const double>> rows(movie_vecs.begin(), movie_vecs.end());
  Vec u(params.embedding_dim, 0.0);
  mean_into(rows, u);
  const Vec demo = mlp_forward(params.g_spec, params.g, demographics);
  axpy(1.0, demo, u);
  return u;
}

double propensity_distance(std::span<const double> u, std::span<const double> v) {
  return std::sqrt(squared_distance(u, v));
}

std::array<double, kHeadFeatures> raw_head_features(double distance,
                                                    int frequency, int recency,
                                                    int window_days) {
  return raw_features_sq(distance * distance, frequency, recency, window_days);
}

ScoreBreakdown predict_probability(const MerlinParams& params, double distance,
                                   int frequency, int recency, RunMode mode,
                                   uint64_t seed, double dropout_p) {
  require_fitted(params);
  const auto z = standardize(
      params.stats,
      raw_head_features(distance, frequency, recency, params.window_days));
  Vec mask(kHeadFeatures, 1.0);
  if (mode == RunMode::kTrain) {
    Rng rng(seed);
    mask = dropout_mask(kHeadFeatures, dropout_p, rng);
  }
  ScoreBreakdown out;
  out.distance = distance;
  out.dist_feature = z[0];
  out.freq_feature = z[1];
  out.rec_feature = z[2];
  double logit = params.head[3];
  for (size_t k = 0; k < kHeadFeatures; ++k) {
    logit += params.head[k] * z[k] * mask[k];
  }
  out.logit = logit;
  out.probability = sigmoid(logit);
  return out;
}

// ---------------------------------------------------------------------------

MerlinScorer::MerlinScorer(const MerlinParams& params, const Workspace& ws)
    : params_(params), ws_(ws) {
  const size_t n_movies = ws.catalog.movies.size();
  projection_.resize(n_movies);
  in_matrix_.resize(n_movies);
  for (uint32_t m = 0; m < n_movies; ++m) {
    if (ws.videos[m].empty()) continue;
    projection_[m] = mlp_forward(params.f_spec, params.f, ws.videos[m]);
    if (const auto row = params.offset_row(ws.catalog.movies.id(m))) {
      in_matrix_[m] = projection_[m];
      add_offset(params, *row, in_matrix_[m]);
    }
  }
  std::map<Vec, Vec> by_pattern;
  user_demo_.resize(ws.catalog.users.size());
  for (uint32_t u = 0; u < user_demo_.size(); ++u) {
    auto [it, inserted] = by_pattern.try_emplace(ws.demographics[u]);
    if (inserted) {
      it->second = mlp_forward(params.g_spec, params.g, ws.demographics[u]);
    }
    user_demo_[u] = it->second;
  }
}

std::span<const double> MerlinScorer::movie_vector(uint32_t movie,
                                                   Protocol mode) const {
  if (mode == Protocol::kInMatrix) {
    if (in_matrix_[movie].empty()) {
      throw LookupError("no offset for movie '" + ws_.catalog.movies.id(movie) +
                        "' in in-matrix mode");
    }
    return in_matrix_[movie];
  }
  if (projection_[movie].empty()) {
    throw LookupError("no video vector for movie '" +
                      ws_.catalog.movies.id(movie) + "'");
  }
  return projection_[movie];
}

Vec MerlinScorer::user_vector(uint32_t user, Date as_of,
                              std::optional<uint32_t> exclude,
                              Protocol mode) const {
  thread_local std::vector<uint32_t> hist;
  ws_.train.history(user, as_of, exclude, hist);
  std::vector<std::span<const double>> rows;
  rows.reserve(hist.size());
  for (uint32_t m : hist) rows.push_back(movie_vector(m, mode));
  Vec u(params_.embedding_dim, 0.0);
  mean_into(rows, u);
  axpy(1.0, user_demo_[user], u);
  return u;
}

double MerlinScorer::squared_distance(const LabeledPair& pair,
                                      Protocol mode) const {
  const Vec u = user_vector(pair.user, pair.as_of, pair.movie, mode);
  return merlin::squared_distance(u, movie_vector(pair.movie, mode));
}

ScoreBreakdown MerlinScorer::score(const LabeledPair& pair, Protocol mode) const {
  const double distance = std::sqrt(squared_distance(pair, mode));
  const FreqRec fr = ws_.frequency_recency(pair.user, pair.as_of);
  return predict_probability(params_, distance, fr.frequency, fr.recency_days,
                             RunMode::kEval, 0);
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("batch_size must be even and >= 2");
  }
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(optimizer.learning_rate >= 0.0)) {
    throw ConfigError("learning_rate must be non-negative");
  }
  if (!(offset_l2 >= 0.0)) throw ConfigError("offset_l2 must be non-negative");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError("dropout_p must lie in [0, 1)");
  }
  if (neg_per_pos < 1) throw ConfigError("neg_per_pos must be >= 1");
}

MerlinGrads MerlinGrads::zeros_like(const MerlinParams& params) {
  MerlinGrads g;
  g.f = merlin::zeros_like(params.f);
  g.g = merlin::zeros_like(params.g);
  g.offsets = Tensor2(params.offsets.rows(), params.offsets.cols());
  return g;
}

double merlin_batch_loss(const MerlinParams& params, const Workspace& ws,
                         std::span<const LabeledPair> batch, double offset_l2,
                         double dropout_p, RunMode mode, uint64_t dropout_seed,
                         MerlinGrads* grads) {
  require_fitted(params);
  if (batch.empty()) throw InvalidArgument("empty batch");
  const size_t d = params.embedding_dim;
  const bool backward = grads != nullptr;

  struct MovieSlot {
    size_t offset_row = 0;
    MlpCache cache;
    Vec vec;
    Vec grad;
    bool touched = false;
  };
  std::vector<int> slot_of(ws.catalog.movies.size(), -1);
  std::vector<MovieSlot> movies;
  auto movie_slot = [&](uint32_t m) -> MovieSlot& {
    if (slot_of[m] < 0) {
      const auto row = params.offset_row(ws.catalog.movies.id(m));
      if (!row) {
        throw LookupError("training pair uses movie '" +
                          ws.catalog.movies.id(m) + "' which has no offset");
      }
      MovieSlot s;
      s.offset_row = *row;
      s.vec = mlp_forward(params.f_spec, params.f, ws.videos[m],
                          backward ? &s.cache : nullptr);
      add_offset(params, *row, s.vec);
      s.grad.assign(d, 0.0);
      slot_of[m] = static_cast<int>(movies.size());
      movies.push_back(std::move(s));
    }
    return movies[static_cast<size_t>(slot_of[m])];
  };

  struct DemoSlot {
    MlpCache cache;
    Vec out;
    Vec grad;
    const Vec* input = nullptr;
  };
  std::map<Vec, size_t> demo_index;
  std::vector<DemoSlot> demos;
  auto demo_slot = [&](uint32_t u) -> DemoSlot& {
    auto [it, inserted] = demo_index.try_emplace(ws.demographics[u], demos.size());
    if (inserted) {
      DemoSlot s;
      s.input = &ws.demographics[u];
      s.out = mlp_forward(params.g_spec, params.g, ws.demographics[u],
                          backward ? &s.cache : nullptr);
      s.grad.assign(d, 0.0);
      demos.push_back(std::move(s));
    }
    return demos[it->second];
  };

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  std::vector<uint32_t> hist;
  std::vector<std::span<const double>> rows;
  Vec u(d);
  Vec du(d);
  for (size_t i = 0; i < batch.size(); ++i) {
    const LabeledPair& pair = batch[i];
    ws.train.history(pair.user, pair.as_of, pair.movie, hist);
    rows.clear();
    for (uint32_t m : hist) rows.push_back(movie_slot(m).vec);
    mean_into(rows, u);
    DemoSlot& demo = demo_slot(pair.user);
    axpy(1.0, demo.out, u);
    MovieSlot& target = movie_slot(pair.movie);

    const double d2 = squared_distance(u, target.vec);
    const FreqRec fr = ws.frequency_recency(pair.user, pair.as_of);
    const auto z = standardize(
        params.stats,
        raw_features_sq(d2, fr.frequency, fr.recency_days, params.window_days));
    Vec mask(kHeadFeatures, 1.0);
    if (mode == RunMode::kTrain) {
      Rng rng(derive_seed(dropout_seed, {i}));
      mask = dropout_mask(kHeadFeatures, dropout_p, rng);
    }
    double logit = params.head[3];
    for (size_t k = 0; k < kHeadFeatures; ++k) {
      logit += params.head[k] * z[k] * mask[k];
    }
    const double y = pair.label ? 1.0 : 0.0;
    total += softplus(logit) - y * logit;

    if (!backward) continue;
    const double delta = (sigmoid(logit) - y) * inv_batch;
    for (size_t k = 0; k < kHeadFeatures; ++k) {
      grads->head[k] += delta * z[k] * mask[k];
    }
    grads->head[3] += delta;
    // d loss / d (d^2): feature 0 is -(d^2), standardized.
    const double g_d2 =
        delta * params.head[0] * mask[0] * (-1.0 / params.stats.stddev[0]);
    if (g_d2 == 0.0) continue;
    for (size_t k = 0; k < d; ++k) du[k] = 2.0 * (u[k] - target.vec[k]) * g_d2;
    axpy(1.0, du, demo.grad);
    axpy(-1.0, du, target.grad);
    target.touched = true;
    if (!hist.empty()) {
      const double share = 1.0 / static_cast<double>(hist.size());
      for (uint32_t m : hist) {
        MovieSlot& s = movies[static_cast<size_t>(slot_of[m])];
        axpy(share, du, s.grad);
        s.touched = true;
      }
    }
  }

  double reg = 0.0;
  for (double v : params.offsets.values()) reg += v * v;
  const double loss = total * inv_batch + offset_l2 * reg;
  if (!backward) return loss;

  for (auto& s : movies) {
    if (!s.touched) continue;
    axpy(1.0, s.grad, grads->offsets.row(s.offset_row));
    mlp_backward(params.f_spec, params.f, s.cache, s.grad, grads->f);
  }
  for (auto& s : demos) {
    mlp_backward(params.g_spec, params.g, s.cache, s.grad, grads->g);
  }
  if (offset_l2 != 0.0) {
    axpy(2.0 * offset_l2, params.offsets.values(), grads->offsets.values());
  }
  return loss;
}

// ---------------------------------------------------------------------------

namespace {

template <typename ParamsT, typename Fn>
void for_each_block(ParamsT& f, ParamsT& g, Fn&& fn) {
  for (auto& w : f.weights) fn(w.values());
  for (auto& b : f.biases) fn(std::span(b));
  for (auto& w : g.weights) fn(w.values());
  for (auto& b : g.biases) fn(std::span(b));
}

std::vector<std::span<const double>> const_blocks(const MlpState& f,
                                                  const MlpState& g,
                                                  const Tensor2& offsets,
                                                  const std::array<double, 4>& head) {
  std::vector<std::span<const double>> out;
  for (const auto& w : f.weights) out.push_back(w.values());
  for (const auto& b : f.biases) out.push_back(b);
  for (const auto& w : g.weights) out.push_back(w.values());
  for (const auto& b : g.biases) out.push_back(b);
  out.push_back(offsets.values());
  out.push_back(head);
  return out;
}

}  // namespace

std::vector<ParamBlock> parameter_blocks(MerlinParams& params,
                                         const MerlinGrads& grads) {
  std::vector<std::span<double>> values;
  for_each_block(params.f, params.g,
                 [&](std::span<double> s) { values.push_back(s); });
  values.push_back(params.offsets.values());
  values.push_back(params.head);
  const auto g = const_blocks(grads.f, grads.g, grads.offsets, grads.head);
  require_same_size(values.size(), g.size(), "gradient block count");
  std::vector<ParamBlock> blocks;
  for (size_t i = 0; i < values.size(); ++i) blocks.push_back({values[i], g[i]});
  return blocks;
}

size_t trainable_count(const MerlinParams& params) {
  return parameter_count(params.f) + parameter_count(params.g) +
         params.offsets.size() + params.head.size();
}

Vec flatten_params(const MerlinParams& params) {
  Vec out;
  for (const auto& b : const_blocks(params.f, params.g, params.offsets, params.head)) {
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void unflatten_params(std::span<const double> flat, MerlinParams& params) {
  require_same_size(trainable_count(params), flat.size(), "flat parameters");
  size_t pos = 0;
  auto take = [&](std::span<double> dst) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + dst.size()),
              dst.begin());
    pos += dst.size();
  };
  for_each_block(params.f, params.g, take);
  take(params.offsets.values());
  take(params.head);
}

Vec flatten_grads(const MerlinGrads& grads) {
  Vec out;
  for (const auto& b : const_blocks(grads.f, grads.g, grads.offsets, grads.head)) {
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void fit_feature_stats(MerlinParams& params, const Workspace& ws,
                       std::span<const LabeledPair> pairs) {
  if (pairs.empty()) throw InvalidArgument("no pairs to fit feature stats on");
  MerlinScorer scorer(params, ws);
  std::array<double, kHeadFeatures> sum = {0, 0, 0};
  std::array<double, kHeadFeatures> sum_sq = {0, 0, 0};
  for (const auto& pair : pairs) {
    const double d2 = scorer.squared_distance(pair, Protocol::kInMatrix);
    const FreqRec fr = ws.frequency_recency(pair.user, pair.as_of);
    const auto raw =
        raw_features_sq(d2, fr.frequency, fr.recency_days, params.window_days);
    for (size_t k = 0; k < kHeadFeatures; ++k) {
      sum[k] += raw[k];
      sum_sq[k] += raw[k] * raw[k];
    }
  }
  const double n = static_cast<double>(pairs.size());
  for (size_t k = 0; k < kHeadFeatures; ++k) {
    const double mean = sum[k] / n;
    const double var = std::max(0.0, sum_sq[k] / n - mean * mean);
    params.stats.mean[k] = mean;
    params.stats.stddev[k] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  params.stats.fitted = true;
}

double training_step(MerlinParams& params, OptimizerState& optimizer,
                     const Workspace& ws, std::span<const LabeledPair> batch,
                     const TrainConfig& config, uint64_t dropout_seed) {
  MerlinGrads grads = MerlinGrads::zeros_like(params);
  const double loss =
      merlin_batch_loss(params, ws, batch, config.offset_l2, config.dropout_p,
                        RunMode::kTrain, dropout_seed, &grads);
  if (!std::isfinite(loss)) {
    std::string ids;
    for (const auto& p : batch) {
      if (!ids.empty()) ids += ' ';
      ids += ws.catalog.users.id(p.user) + "/" + ws.catalog.movies.id(p.movie);
    }
    throw TrainingFault("non-finite loss on batch: " + ids);
  }
  const auto blocks = parameter_blocks(params, grads);
  optimizer_step(optimizer, blocks);
  return loss;
}

bool EarlyStopper::update(double metric) {
  ++epochs_;
  if (best_epoch_ == 0 || metric > best_) {
    best_ = metric;
    best_epoch_ = epochs_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

MerlinTrainResult train_merlin(const Workspace& ws,
                               const MerlinArchitecture& arch,
                               const TrainConfig& config) {
  config.validate();
  if (ws.train.pairs().empty()) {
    throw ConfigError("training partition is empty");
  }
  std::vector<std::string> offset_movies;
  for (uint32_t m : ws.train.movies()) {
    offset_movies.push_back(ws.catalog.movies.id(m));
  }
  MerlinParams params =
      init_merlin(arch, offset_movies, derive_seed(config.seed, {0xf00d}));

  const auto stats_pairs = sample_training_batch(
      ws.train, ws.users, std::max<size_t>(config.batch_size * 8, 4096),
      derive_seed(config.seed, {0x57a7}));
  fit_feature_stats(params, ws, stats_pairs);

  std::vector<LabeledPair> validation;
  for (const auto& pair :
       sample_eval_set(ws.validation, ws.all, ws.users, ws.movie_as_of,
                       config.neg_per_pos, derive_seed(config.seed, {0xe7a1}),
                       &ws.catalog.movies)) {
    if (ws.train.first_date(pair.movie)) validation.push_back(pair);
  }
  std::vector<uint8_t> val_labels;
  for (const auto& p : validation) val_labels.push_back(p.label);
  const bool has_validation =
      std::count(val_labels.begin(), val_labels.end(), 1) > 0 &&
      std::count(val_labels.begin(), val_labels.end(), 0) > 0;

  const size_t batches =
      config.batches_per_epoch > 0
          ? config.batches_per_epoch
          : (2 * ws.train.pairs().size() + config.batch_size - 1) /
                config.batch_size;

  OptimizerState optimizer(config.optimizer);
  EarlyStopper stopper(config.patience);
  MerlinTrainResult result;
  result.params = params;
  Vec scores(validation.size());
  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    for (size_t b = 0; b < batches; ++b) {
      const auto batch =
          sample_training_batch(ws.train, ws.users, config.batch_size,
                                derive_seed(config.seed, {0xba7c, epoch, b}));
      loss_sum += training_step(params, optimizer, ws, batch, config,
                                derive_seed(config.seed, {0xd20f, epoch, b}));
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    if (has_validation) {
      MerlinScorer scorer(params, ws);
      for (size_t i = 0; i < validation.size(); ++i) {
        scores[i] = scorer.score(validation[i], Protocol::kInMatrix).probability;
      }
      stats.validation_auc = auc(scores, val_labels);
    } else {
      stats.validation_auc = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(stats);
    // Without a usable validation set every epoch counts as the best.
    const double metric = has_validation ? stats.validation_auc
                                         : static_cast<double>(epoch);
    if (stopper.update(metric)) result.params = params;
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  return result;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kMerlinMagic = "MRLC";
constexpr uint16_t kMerlinVersion = 1;

}  // namespace

void write_mlp(BinaryWriter& w, const MlpSpec& spec, const MlpState& state) {
  check_state(spec, state);
  w.u32(static_cast<uint32_t>(spec.layer_dims.size()));
  for (size_t d : spec.layer_dims) w.u32(static_cast<uint32_t>(d));
  for (Activation a : spec.hidden_activations) w.u8(static_cast<uint8_t>(a));
  for (const auto& m : state.weights) {
    for (double v : m.values()) w.f64(v);
  }
  for (const auto& b : state.biases) {
    for (double v : b) w.f64(v);
  }
}

void read_mlp(BinaryReader& r, MlpSpec& spec, MlpState& state) {
  const size_t at = r.offset();
  const uint32_t n = r.u32();
  if (n < 2 || n > 64) {
    throw FormatError("implausible mlp layer count " + std::to_string(n) +
                      " at byte offset " + std::to_string(at));
  }
  spec = MlpSpec{};
  for (uint32_t i = 0; i < n; ++i) spec.layer_dims.push_back(r.u32());
  for (uint32_t i = 0; i + 2 < n; ++i) {
    const uint8_t a = r.u8();
    if (a > 2) {
      throw FormatError("bad activation code at byte offset " +
                        std::to_string(r.offset() - 1));
    }
    spec.hidden_activations.push_back(static_cast<Activation>(a));
  }
  try {
    spec.validate();
  } catch (const ShapeError& e) {
    throw FormatError(std::string("invalid mlp spec: ") + e.what());
  }
  state = MlpState{};
  for (size_t l = 0; l < spec.num_layers(); ++l) {
    Tensor2 w(spec.layer_dims[l + 1], spec.layer_dims[l]);
    for (double& v : w.values()) v = r.f64();
    state.weights.push_back(std::move(w));
  }
  for (size_t l = 0; l < spec.num_layers(); ++l) {
    Vec b(spec.layer_dims[l + 1]);
    for (double& v : b) v = r.f64();
    state.biases.push_back(std::move(b));
  }
}

std::string encode_echo(const ConfigEcho& echo) {
  std::string out;
  for (const auto& [k, v] : echo) out += k + "=" + v + "\n";
  return out;
}

ConfigEcho decode_echo(std::string_view text) {
  ConfigEcho echo;
  for (auto line : split_lines(text)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("config echo line without '='");
    }
    echo[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return echo;
}

std::string serialize_merlin(const MerlinParams& params, const ConfigEcho& echo) {
  require_fitted(params);
  BinaryWriter w;
  w.raw(kMerlinMagic);
  w.u16(kMerlinVersion);
  w.u32(static_cast<uint32_t>(params.embedding_dim));
  write_mlp(w, params.f_spec, params.f);
  write_mlp(w, params.g_spec, params.g);
  w.u32(static_cast<uint32_t>(params.offset_ids.size()));
  for (size_t i = 0; i < params.offset_ids.size(); ++i) {
    w.short_string(params.offset_ids[i]);
    for (double v : params.offsets.row(i)) w.f64(v);
  }
  for (double v : params.head) w.f64(v);
  for (double v : params.stats.mean) w.f64(v);
  for (double v : params.stats.stddev) w.f64(v);
  ConfigEcho full = echo;
  full["window_days"] = std::to_string(params.window_days);
  w.long_string(encode_echo(full));
  return w.bytes();
}

void save_merlin(const std::filesystem::path& path, const MerlinParams& params,
                 const ConfigEcho& echo) {
  write_file(path, serialize_merlin(params, echo));
}

MerlinCheckpoint deserialize_merlin(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.remaining() < 4 || r.raw(4) != kMerlinMagic) {
    throw FormatError("not a merlin checkpoint: bad magic at byte offset 0");
  }
  const uint16_t version = r.u16();
  if (version != kMerlinVersion) {
    throw FormatError("unsupported merlin checkpoint version " +
                      std::to_string(version));
  }
  MerlinCheckpoint ck;
  MerlinParams& p = ck.params;
  p.embedding_dim = r.u32();
  read_mlp(r, p.f_spec, p.f);
  read_mlp(r, p.g_spec, p.g);
  if (p.f_spec.output_dim() != p.embedding_dim ||
      p.g_spec.output_dim() != p.embedding_dim) {
    throw FormatError("mlp output width does not match embedding dim");
  }
  const uint32_t n_offsets = r.u32();
  p.offsets = Tensor2(n_offsets, p.embedding_dim);
  for (uint32_t i = 0; i < n_offsets; ++i) {
    p.offset_ids.push_back(r.short_string());
    for (double& v : p.offsets.row(i)) v = r.f64();
  }
  if (!std::is_sorted(p.offset_ids.begin(), p.offset_ids.end())) {
    throw FormatError("offset ids are not sorted");
  }
  for (double& v : p.head) v = r.f64();
  for (double& v : p.stats.mean) v = r.f64();
  for (double& v : p.stats.stddev) v = r.f64();
  p.stats.fitted = true;
  ck.echo = decode_echo(r.long_string());
  if (!r.at_end()) {
    throw FormatError("trailing bytes at byte offset " +
                      std::to_string(r.offset()));
  }
  if (auto it = ck.echo.find("window_days"); it != ck.echo.end()) {
    p.window_days = static_cast<int>(parse_int(it->second, "window_days"));
  }
  return ck;
}

MerlinCheckpoint load_merlin(const std::filesystem::path& path) {
  return deserialize_merlin(read_file(path));
}

}  // namespace merlin
