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

#include "merlin/baselines.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "merlin/errors.h"
#include "merlin/io.h"
#include "merlin/metrics.h"
#include "merlin/random.h"

namespace merlin {
namespace {

constexpr std::string_view kRfMagic = "MRLR";
constexpr std::string_view kPmfMagic = "MRLP";
constexpr uint16_t kVersion = 1;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

bool both_classes(std::span<const uint8_t> labels) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return pos > 0 && static_cast<size_t>(pos) < labels.size();
}

void check_magic(BinaryReader& r, std::string_view magic, const char* what) {
  if (r.remaining() < 4 || r.raw(4) != magic) {
    throw FormatError(std::string("not a ") + what +
                      " checkpoint: bad magic at byte offset 0");
  }
  const uint16_t version = r.u16();
  if (version != kVersion) {
    throw FormatError(std::string("unsupported ") + what +
                      " checkpoint version " + std::to_string(version));
  }
}

void check_end(const BinaryReader& r) {
  if (!r.at_end()) {
    throw FormatError("trailing bytes at byte offset " +
                      std::to_string(r.offset()));
  }
}

std::optional<size_t> find_sorted(const std::vector<std::string>& ids,
                                  std::string_view id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<size_t>(it - ids.begin());
}

std::vector<LabeledPair> validation_pairs(const Workspace& ws, size_t neg_per_pos,
                                          uint64_t seed) {
  std::vector<LabeledPair> out;
  for (const auto& p : sample_eval_set(ws.validation, ws.all, ws.users,
                                       ws.movie_as_of, neg_per_pos, seed,
                                       &ws.catalog.movies)) {
    if (ws.train.first_date(p.movie)) out.push_back(p);
  }
  return out;
}

}  // namespace

// ---- Recency-frequency -----------------------------------------------------

std::array<double, 2> rf_raw_features(int frequency, int recency,
                                      int window_days) {
  return {std::log1p(static_cast<double>(frequency)),
          -static_cast<double>(recency) / static_cast<double>(window_days)};
}

double rf_predict(const RfParams& params, int frequency, int recency) {
  const auto raw = rf_raw_features(frequency, recency, params.window_days);
  double logit = params.bias;
  for (size_t k = 0; k < 2; ++k) {
    logit += params.weights[k] * (raw[k] - params.mean[k]) / params.stddev[k];
  }
  return sigmoid(logit);
}

RfParams rf_train(std::span<const RfExample> train,
                  std::span<const RfExample> validation,
                  const RfTrainConfig& config) {
  std::vector<uint8_t> labels;
  for (const auto& e : train) labels.push_back(e.label);
  if (!both_classes(labels)) {
    throw FitError("recency-frequency fit needs both positive and negative examples");
  }
  if (config.window_days <= 0) throw ConfigError("window_days must be positive");

  RfParams params;
  params.window_days = config.window_days;
  const double n = static_cast<double>(train.size());
  std::vector<std::array<double, 2>> x;
  x.reserve(train.size());
  for (const auto& e : train) {
    x.push_back(rf_raw_features(e.frequency, e.recency, config.window_days));
  }
  for (size_t k = 0; k < 2; ++k) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& row : x) {
      sum += row[k];
      sum_sq += row[k] * row[k];
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    params.mean[k] = mean;
    params.stddev[k] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  for (auto& row : x) {
    for (size_t k = 0; k < 2; ++k) {
      row[k] = (row[k] - params.mean[k]) / params.stddev[k];
    }
  }

  std::vector<uint8_t> val_labels;
  for (const auto& e : validation) val_labels.push_back(e.label);
  const bool early_stop = both_classes(val_labels);
  Vec val_scores(validation.size());

  RfParams best = params;
  EarlyStopper stopper(config.patience);
  for (size_t it = 1; it <= config.max_iterations; ++it) {
    std::array<double, 2> gw = {0.0, 0.0};
    double gb = 0.0;
    for (size_t i = 0; i < train.size(); ++i) {
      const double z =
          params.bias + params.weights[0] * x[i][0] + params.weights[1] * x[i][1];
      const double delta = sigmoid(z) - (train[i].label ? 1.0 : 0.0);
      gw[0] += delta * x[i][0];
      gw[1] += delta * x[i][1];
      gb += delta;
    }
    params.weights[0] -= config.learning_rate * gw[0] / n;
    params.weights[1] -= config.learning_rate * gw[1] / n;
    params.bias -= config.learning_rate * gb / n;

    if (!early_stop) {
      best = params;
      continue;
    }
    if (it % config.eval_every != 0 && it != config.max_iterations) continue;
    for (size_t i = 0; i < validation.size(); ++i) {
      val_scores[i] =
          rf_predict(params, validation[i].frequency, validation[i].recency);
    }
    if (stopper.update(auc(val_scores, val_labels))) best = params;
    if (stopper.should_stop()) break;
  }
  return best;
}

RfParams train_rf(const Workspace& ws, const RfTrainConfig& config,
                  uint64_t seed) {
  if (ws.train.pairs().empty()) throw ConfigError("training partition is empty");
  RfTrainConfig cfg = config;
  cfg.window_days = ws.window_days;
  const size_t n = 2 * ws.train.pairs().size();
  const auto pairs = sample_training_batch(ws.train, ws.users, n,
                                           derive_seed(seed, {0x4f01}));
  std::vector<RfExample> train;
  train.reserve(pairs.size());
  for (const auto& p : pairs) {
    const FreqRec fr = ws.frequency_recency(p.user, p.as_of);
    train.push_back({fr.frequency, fr.recency_days, p.label});
  }
  std::vector<RfExample> validation;
  for (const auto& p : validation_pairs(ws, 9, derive_seed(seed, {0xe7a1}))) {
    const FreqRec fr = ws.frequency_recency(p.user, p.as_of);
    validation.push_back({fr.frequency, fr.recency_days, p.label});
  }
  return rf_train(train, validation, cfg);
}

std::string serialize_rf(const RfParams& params, const ConfigEcho& echo) {
  BinaryWriter w;
  w.raw(kRfMagic);
  w.u16(kVersion);
  w.u32(static_cast<uint32_t>(params.window_days));
  for (double v : params.weights) w.f64(v);
  w.f64(params.bias);
  for (double v : params.mean) w.f64(v);
  for (double v : params.stddev) w.f64(v);
  w.long_string(encode_echo(echo));
  return w.bytes();
}

void save_rf(const std::filesystem::path& path, const RfParams& params,
             const ConfigEcho& echo) {
  write_file(path, serialize_rf(params, echo));
}

RfCheckpoint deserialize_rf(std::string_view bytes) {
  BinaryReader r(bytes);
  check_magic(r, kRfMagic, "recency-frequency");
  RfCheckpoint ck;
  ck.params.window_days = static_cast<int>(r.u32());
  if (ck.params.window_days <= 0) throw FormatError("window_days must be positive");
  for (double& v : ck.params.weights) v = r.f64();
  ck.params.bias = r.f64();
  for (double& v : ck.params.mean) v = r.f64();
  for (double& v : ck.params.stddev) v = r.f64();
  ck.echo = decode_echo(r.long_string());
  check_end(r);
  return ck;
}

// ---- Matrix factorization --------------------------------------------------

std::optional<size_t> PmfParams::user_row(std::string_view id) const {
  return find_sorted(user_ids, id);
}

std::optional<size_t> PmfParams::movie_row(std::string_view id) const {
  return find_sorted(movie_ids, id);
}

PmfParams init_pmf(std::vector<std::string> user_ids,
                   std::vector<std::string> movie_ids, size_t rank,
                   double init_scale, uint64_t seed) {
  if (rank == 0) throw ConfigError("pmf rank must be >= 1");
  PmfParams p;
  p.user_ids = std::move(user_ids);
  p.movie_ids = std::move(movie_ids);
  for (auto* ids : {&p.user_ids, &p.movie_ids}) {
    std::sort(ids->begin(), ids->end());
    ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
  }
  p.users = Tensor2(p.user_ids.size(), rank);
  p.movies = Tensor2(p.movie_ids.size(), rank);
  Rng rng(seed);
  for (double& v : p.users.values()) v = rng.normal(0.0, init_scale);
  for (double& v : p.movies.values()) v = rng.normal(0.0, init_scale);
  return p;
}

double pmf_logit(const PmfParams& params, size_t user_row, size_t movie_row) {
  return params.bias + dot(params.users.row(user_row), params.movies.row(movie_row));
}

double pmf_predict(const PmfParams& params, std::string_view user_id,
                   std::string_view movie_id) {
  const auto m = params.movie_row(movie_id);
  if (!m) {
    throw ColdStartUnsupported("matrix factorization has no vector for movie '" +
                               std::string(movie_id) + "'");
  }
  const auto u = params.user_row(user_id);
  if (!u) throw LookupError("unknown user '" + std::string(user_id) + "'");
  return sigmoid(pmf_logit(params, *u, *m));
}

double pmf_batch_loss(const PmfParams& params, std::span<const PmfExample> batch,
                      double l2, Tensor2* user_grads, Tensor2* movie_grads,
                      double* bias_grad) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  const bool backward = user_grads && movie_grads && bias_grad;
  double total = 0.0;
  for (const auto& e : batch) {
    const auto u = params.users.row(e.user_row);
    const auto v = params.movies.row(e.movie_row);
    const double z = params.bias + dot(u, v);
    const double y = e.label ? 1.0 : 0.0;
    total += softplus(z) - y * z + l2 * (dot(u, u) + dot(v, v));
    if (!backward) continue;
    const double delta = (sigmoid(z) - y) * inv;
    auto gu = user_grads->row(e.user_row);
    auto gv = movie_grads->row(e.movie_row);
    axpy(delta, v, gu);
    axpy(2.0 * l2 * inv, u, gu);
    axpy(delta, u, gv);
    axpy(2.0 * l2 * inv, v, gv);
    *bias_grad += delta;
  }
  return total * inv;
}

double pmf_step(PmfParams& params, OptimizerState& optimizer,
                std::span<const PmfExample> batch, double l2) {
  Tensor2 gu(params.users.rows(), params.users.cols());
  Tensor2 gv(params.movies.rows(), params.movies.cols());
  double gb = 0.0;
  const double loss = pmf_batch_loss(params, batch, l2, &gu, &gv, &gb);
  if (!std::isfinite(loss)) throw TrainingFault("non-finite matrix factorization loss");
  const std::array<ParamBlock, 3> blocks = {
      ParamBlock{params.users.values(), gu.values()},
      ParamBlock{params.movies.values(), gv.values()},
      ParamBlock{std::span(&params.bias, 1), std::span<const double>(&gb, 1)}};
  optimizer_step(optimizer, blocks);
  return loss;
}

PmfParams train_pmf(const Workspace& ws, const PmfTrainConfig& config) {
  if (ws.train.pairs().empty()) throw ConfigError("training partition is empty");
  if (config.batch_size < 2 || config.batch_size % 2 != 0) {
    throw ConfigError("batch_size must be even and >= 2");
  }
  if (config.patience < 1) throw ConfigError("patience must be >= 1");
  std::vector<std::string> movie_ids;
  for (uint32_t m : ws.train.movies()) movie_ids.push_back(ws.catalog.movies.id(m));
  PmfParams params = init_pmf(ws.catalog.users.ids(), movie_ids, config.rank,
                              config.init_scale, derive_seed(config.seed, {0x9f1}));

  // Catalog indices are sorted ids, so user rows coincide with catalog
  // indices; movie rows need a map.
  std::vector<size_t> movie_row(ws.catalog.movies.size(), 0);
  for (uint32_t m : ws.train.movies()) {
    movie_row[m] = *params.movie_row(ws.catalog.movies.id(m));
  }
  auto to_examples = [&](std::span<const LabeledPair> pairs) {
    std::vector<PmfExample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({p.user, movie_row[p.movie], p.label});
    return out;
  };

  const auto validation = to_examples(
      validation_pairs(ws, config.neg_per_pos, derive_seed(config.seed, {0xe7a1})));
  std::vector<uint8_t> val_labels;
  for (const auto& e : validation) val_labels.push_back(e.label);
  const bool early_stop = both_classes(val_labels);
  Vec val_scores(validation.size());

  const size_t batches =
      config.batches_per_epoch > 0
          ? config.batches_per_epoch
          : (2 * ws.train.pairs().size() + config.batch_size - 1) / config.batch_size;
  OptimizerState optimizer(config.optimizer);
  EarlyStopper stopper(config.patience);
  PmfParams best = params;
  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (size_t b = 0; b < batches; ++b) {
      const auto batch = to_examples(
          sample_training_batch(ws.train, ws.users, config.batch_size,
                                derive_seed(config.seed, {0xba7c, epoch, b})));
      pmf_step(params, optimizer, batch, config.l2);
    }
    if (!early_stop) {
      best = params;
      continue;
    }
    for (size_t i = 0; i < validation.size(); ++i) {
      val_scores[i] = pmf_logit(params, validation[i].user_row, validation[i].movie_row);
    }
    if (stopper.update(auc(val_scores, val_labels))) best = params;
    if (stopper.should_stop()) break;
  }
  return best;
}

std::string serialize_pmf(const PmfParams& params, const ConfigEcho& echo) {
  BinaryWriter w;
  w.raw(kPmfMagic);
  w.u16(kVersion);
  w.u32(static_cast<uint32_t>(params.rank()));
  w.f64(params.bias);
  auto table = [&](const std::vector<std::string>& ids, const Tensor2& t) {
    w.u32(static_cast<uint32_t>(ids.size()));
    for (size_t i = 0; i < ids.size(); ++i) {
      w.short_string(ids[i]);
      for (double v : t.row(i)) w.f64(v);
    }
  };
  table(params.user_ids, params.users);
  table(params.movie_ids, params.movies);
  w.long_string(encode_echo(echo));
  return w.bytes();
}

void save_pmf(const std::filesystem::path& path, const PmfParams& params,
              const ConfigEcho& echo) {
  write_file(path, serialize_pmf(params, echo));
}

PmfCheckpoint deserialize_pmf(std::string_view bytes) {
  BinaryReader r(bytes);
  check_magic(r, kPmfMagic, "matrix factorization");
  PmfCheckpoint ck;
  const uint32_t rank = r.u32();
  if (rank == 0) throw FormatError("matrix factorization rank is zero");
  ck.params.bias = r.f64();
  auto table = [&](std::vector<std::string>& ids, Tensor2& t) {
    const uint32_t n = r.u32();
    t = Tensor2(n, rank);
    for (uint32_t i = 0; i < n; ++i) {
      ids.push_back(r.short_string());
      for (double& v : t.row(i)) v = r.f64();
    }
    if (!std::is_sorted(ids.begin(), ids.end())) {
      throw FormatError("matrix factorization ids are not sorted");
    }
  };
  table(ck.params.user_ids, ck.params.users);
  table(ck.params.movie_ids, ck.params.movies);
  ck.echo = decode_echo(r.long_string());
  check_end(r);
  return ck;
}

}  // namespace merlin
