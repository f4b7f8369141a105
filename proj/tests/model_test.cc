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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "merlin/errors.h"
#include "merlin/gradcheck.h"
#include "merlin/model.h"
#include "merlin/random.h"
#include "test_util.h"

namespace merlin {
namespace {

using testing::rec;
using testing::small_synth_workspace;
using testing::train_only_workspace;

MerlinArchitecture small_arch(size_t frame_dim, size_t demo_width) {
  MerlinArchitecture a;
  a.frame_dim = frame_dim;
  a.demographics_width = demo_width;
  a.embedding_dim = 3;
  a.f_hidden = {5};
  a.g_hidden = {4};
  a.activation = Activation::kTanh;
  return a;
}

void randomize_offsets(MerlinParams& p, uint64_t seed, double scale) {
  Rng rng(seed);
  for (double& v : p.offsets.values()) v = rng.normal(0.0, scale);
}

TEST(MerlinVectors, MovieVectorModes) {
  MerlinParams p = init_merlin(small_arch(4, 3), std::vector<std::string>{"a", "b"}, 1);
  randomize_offsets(p, 2, 1.0);
  const Vec x{0.1, -0.2, 0.3, 0.4};
  const Vec fx = mlp_forward(p.f_spec, p.f, x);
  EXPECT_EQ(movie_vector(p, x, "b", Protocol::kColdStart), fx);
  const Vec in = movie_vector(p, x, "b", Protocol::kInMatrix);
  for (size_t k = 0; k < fx.size(); ++k) EXPECT_EQ(in[k], fx[k] + p.offsets(1, k));
  EXPECT_THROW(movie_vector(p, x, "zz", Protocol::kInMatrix), LookupError);
  EXPECT_EQ(movie_vector(p, x, "zz", Protocol::kColdStart), fx);
}

TEST(MerlinVectors, UserVectorIsHistoryMeanPlusDemographics) {
  MerlinParams p = init_merlin(small_arch(2, 3), std::vector<std::string>{"a", "b", "c"}, 3);
  randomize_offsets(p, 4, 1.0);
  const Vec xa{1, 0}, xb{0, 1}, xc{1, 1};
  const Vec demo{0, 1, 0};
  const std::vector<HistoryItem> hist{{"a", xa}, {"b", xb}, {"c", xc}};
  const Vec u = user_vector(p, hist, demo, std::string_view("c"), Protocol::kInMatrix);
  const Vec va = movie_vector(p, xa, "a", Protocol::kInMatrix);
  const Vec vb = movie_vector(p, xb, "b", Protocol::kInMatrix);
  const Vec g = mlp_forward(p.g_spec, p.g, demo);
  for (size_t k = 0; k < u.size(); ++k) {
    EXPECT_NEAR(u[k], (va[k] + vb[k]) / 2 + g[k], 1e-15);
  }
  // Only the excluded movie: the history term vanishes.
  const std::vector<HistoryItem> only_c{{"c", xc}};
  EXPECT_EQ(user_vector(p, only_c, demo, std::string_view("c"), Protocol::kInMatrix), g);
  EXPECT_EQ(user_vector(p, {}, demo, std::nullopt, Protocol::kColdStart), g);
}

TEST(MerlinHead, DistanceAndRawFeatures) {
  EXPECT_DOUBLE_EQ(propensity_distance(Vec{0, 0}, Vec{3, 4}), 5.0);
  EXPECT_THROW(propensity_distance(Vec{0, 0}, Vec{3}), ShapeError);
  const auto f = raw_head_features(2.0, 3, 73, 365);
  EXPECT_DOUBLE_EQ(f[0], -4.0);
  EXPECT_DOUBLE_EQ(f[1], std::log(4.0));
  EXPECT_DOUBLE_EQ(f[2], -0.2);
}

TEST(MerlinHead, ZeroHeadIsHalfAndUnfittedIsStateError) {
  MerlinParams p = init_merlin(small_arch(2, 1), {}, 1);
  EXPECT_THROW(predict_probability(p, 1.0, 1, 1, RunMode::kEval, 0), StateError);
  p.stats.fitted = true;
  EXPECT_EQ(predict_probability(p, 7.0, 4, 20, RunMode::kEval, 0).probability, 0.5);
}

TEST(MerlinHead, HandComputedLogit) {
  MerlinParams p = init_merlin(small_arch(2, 1), {}, 1);
  p.stats = {{-1.0, 0.5, -0.5}, {2.0, 1.0, 0.25}, true};
  p.head = {0.8, 0.3, 0.5, -0.1};
  const auto s = predict_probability(p, 2.0, 1, 73, RunMode::kEval, 0);
  const double z0 = (-4.0 + 1.0) / 2.0;
  const double z1 = (std::log(2.0) - 0.5) / 1.0;
  const double z2 = (-0.2 + 0.5) / 0.25;
  const double logit = -0.1 + 0.8 * z0 + 0.3 * z1 + 0.5 * z2;
  EXPECT_NEAR(s.logit, logit, 1e-15);
  EXPECT_NEAR(s.probability, 1.0 / (1.0 + std::exp(-logit)), 1e-15);
  EXPECT_NEAR(s.dist_feature, z0, 1e-15);
}

TEST(MerlinHead, ProbabilityFallsWithDistance) {
  MerlinParams p = init_merlin(small_arch(2, 1), {}, 1);
  p.stats.fitted = true;
  p.head = {0.7, 0.2, 0.2, 0.0};
  double prev = 1.0;
  for (double d = 0.0; d < 5.0; d += 0.25) {
    const double pr = predict_probability(p, d, 2, 10, RunMode::kEval, 0).probability;
    EXPECT_LT(pr, prev);
    prev = pr;
  }
}

TEST(MerlinHead, DropoutPreservesExpectedLogit) {
  MerlinParams p = init_merlin(small_arch(2, 1), {}, 1);
  p.stats = {{-1.0, 0.5, -0.5}, {2.0, 1.0, 0.25}, true};
  p.head = {0.8, 0.3, 0.5, -0.1};
  const double eval = predict_probability(p, 1.5, 2, 30, RunMode::kEval, 0).logit;
  double sum = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    sum += predict_probability(p, 1.5, 2, 30, RunMode::kTrain, derive_seed(5, {i})).logit;
  }
  EXPECT_NEAR(sum / n, eval, 0.02 * std::abs(eval));
}

TEST(MerlinScorer, PoisonedOffsetsLeaveColdStartScoresBitIdentical) {
  const Workspace ws = small_synth_workspace(1);
  std::vector<std::string> ids;
  for (uint32_t m : ws.train.movies()) ids.push_back(ws.catalog.movies.id(m));
  MerlinArchitecture arch = small_arch(ws.frame_dim(), ws.schema.width());
  MerlinParams p = init_merlin(arch, ids, 9);
  randomize_offsets(p, 10, 0.3);
  p.head = {0.9, 0.4, 0.3, 0.1};
  p.stats.fitted = true;
  const auto pairs = sample_eval_set(ws.coldstart, ws.all, ws.users, ws.movie_as_of, 9, 2);
  ASSERT_FALSE(pairs.empty());
  std::vector<double> before;
  {
    const MerlinScorer s(p, ws);
    for (const auto& pair : pairs) before.push_back(s.score(pair, Protocol::kColdStart).logit);
  }
  randomize_offsets(p, 11, 1e6);
  const MerlinScorer s(p, ws);
  for (size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(s.score(pairs[i], Protocol::kColdStart).logit, before[i]);
  }
}

TEST(MerlinScorer, HistoryExcludesTargetAndFutureVisits) {
  // u attends a (day 1), b (day 5), c (day 9); v attends everything on day 2.
  const Workspace ws = train_only_workspace(
      {rec("u", "a", 1), rec("u", "b", 5), rec("u", "c", 9), rec("v", "a", 2),
       rec("v", "b", 2), rec("v", "c", 2)},
      3, 4);
  MerlinParams p = init_merlin(small_arch(3, 3), std::vector<std::string>{"a", "b", "c"}, 2);
  randomize_offsets(p, 3, 1.0);
  const MerlinScorer s(p, ws);
  const uint32_t u = ws.catalog.users.at("u");
  const uint32_t a = ws.catalog.movies.at("a"), b = ws.catalog.movies.at("b"),
                 c = ws.catalog.movies.at("c");
  const Vec g = mlp_forward(p.g_spec, p.g, ws.demographics[u]);
  // As of day 9 excluding b: only a precedes.
  const Vec want_a = [&] {
    Vec v(s.movie_vector(a, Protocol::kInMatrix).begin(),
          s.movie_vector(a, Protocol::kInMatrix).end());
    axpy(1.0, g, v);
    return v;
  }();
  EXPECT_EQ(s.user_vector(u, Date{9}, b, Protocol::kInMatrix), want_a);
  // c on day 9 is not strictly before day 9.
  const Vec with_ab = s.user_vector(u, Date{9}, std::nullopt, Protocol::kInMatrix);
  const auto va = s.movie_vector(a, Protocol::kInMatrix);
  const auto vb = s.movie_vector(b, Protocol::kInMatrix);
  for (size_t k = 0; k < with_ab.size(); ++k) {
    EXPECT_NEAR(with_ab[k], (va[k] + vb[k]) / 2 + g[k], 1e-15);
  }
  EXPECT_EQ(s.user_vector(u, Date{100}, c, Protocol::kInMatrix), with_ab);
}

TEST(MerlinLoss, SinglePairMatchesHandComputation) {
  const Workspace ws = train_only_workspace(
      {rec("u", "a", 1), rec("u", "b", 5), rec("v", "a", 2)}, 3, 4);
  MerlinParams p = init_merlin(small_arch(3, 3), std::vector<std::string>{"a", "b"}, 2);
  randomize_offsets(p, 3, 0.5);
  p.head = {0.6, -0.2, 0.3, 0.05};
  p.stats.fitted = true;
  const LabeledPair pos{ws.catalog.users.at("u"), ws.catalog.movies.at("b"), 1, Date{5}};
  const LabeledPair neg{ws.catalog.users.at("v"), ws.catalog.movies.at("b"), 0, Date{5}};
  const MerlinScorer s(p, ws);
  const double lam = 0.01;
  double reg = 0.0;
  for (double v : p.offsets.values()) reg += v * v;
  const double pp = s.score(pos, Protocol::kInMatrix).probability;
  const double pn = s.score(neg, Protocol::kInMatrix).probability;
  const double want = (-std::log(pp) - std::log(1 - pn)) / 2 + lam * reg;
  const std::vector<LabeledPair> batch{pos, neg};
  EXPECT_NEAR(merlin_batch_loss(p, ws, batch, lam, 0.5, RunMode::kEval, 0, nullptr),
              want, 1e-12);
}

TEST(MerlinLoss, GradientsMatchFiniteDifferences) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_gradcheck_instance(seed);
    EXPECT_LE(check_merlin_gradients(inst).max_relative_error, 1e-4) << seed;
  }
}

TEST(MerlinLoss, GradientCheckCatchesABrokenGradient) {
  const auto inst = random_gradcheck_instance(3);
  // A loss whose analytic gradient drops the regularizer term.
  const LossFn broken = [&](std::span<const double> flat, std::span<double> grad) {
    MerlinParams p = inst.params;
    unflatten_params(flat, p);
    if (!grad.empty()) {
      MerlinGrads g = MerlinGrads::zeros_like(p);
      merlin_batch_loss(p, inst.ws, inst.batch, 0.0, 0.0, RunMode::kEval, 0, &g);
      const Vec fg = flatten_grads(g);
      std::copy(fg.begin(), fg.end(), grad.begin());
    }
    return merlin_batch_loss(p, inst.ws, inst.batch, 0.5, 0.0, RunMode::kEval, 0, nullptr);
  };
  EXPECT_GT(grad_check(broken, flatten_params(inst.params), 1e-4, Stencil::kFivePoint)
                .max_relative_error,
            1e-2);
}

TEST(MerlinTraining, ZeroLearningRateIsAFixedPoint) {
  const Workspace ws = small_synth_workspace(2);
  std::vector<std::string> ids;
  for (uint32_t m : ws.train.movies()) ids.push_back(ws.catalog.movies.id(m));
  MerlinParams p = init_merlin(small_arch(ws.frame_dim(), ws.schema.width()), ids, 1);
  const auto batch = sample_training_batch(ws.train, ws.users, 64, 1);
  fit_feature_stats(p, ws, batch);
  const Vec before = flatten_params(p);
  TrainConfig cfg;
  cfg.optimizer = {OptimizerKind::kSgd, 0.0};
  OptimizerState opt(cfg.optimizer);
  for (uint64_t i = 0; i < 5; ++i) training_step(p, opt, ws, batch, cfg, i);
  EXPECT_EQ(flatten_params(p), before);
}

double max_offset_norm(const MerlinParams& p) {
  double worst = 0.0;
  for (size_t r = 0; r < p.offsets.rows(); ++r) {
    worst = std::max(worst, euclidean_norm(p.offsets.row(r)));
  }
  return worst;
}

double train_offsets(const Workspace& ws, double offset_l2) {
  std::vector<std::string> ids;
  for (uint32_t m : ws.train.movies()) ids.push_back(ws.catalog.movies.id(m));
  MerlinParams p = init_merlin(small_arch(ws.frame_dim(), ws.schema.width()), ids, 1);
  fit_feature_stats(p, ws, sample_training_batch(ws.train, ws.users, 512, 2));
  TrainConfig cfg;
  cfg.offset_l2 = offset_l2;
  OptimizerState opt(cfg.optimizer);
  for (uint64_t i = 0; i < 150; ++i) {
    training_step(p, opt, ws, sample_training_batch(ws.train, ws.users, 64, i), cfg, i);
  }
  return max_offset_norm(p);
}

TEST(MerlinTraining, HeavyOffsetPenaltySuppressesOffsets) {
  const Workspace ws = small_synth_workspace(2);
  EXPECT_LT(train_offsets(ws, 1e6), 1e-2);
  // Without the penalty the same run moves the offsets well past that.
  EXPECT_GT(train_offsets(ws, 0.0), 2e-2);
}

TEST(MerlinTraining, NonFiniteLossIsTrainingFault) {
  const Workspace ws = small_synth_workspace(2);
  std::vector<std::string> ids;
  for (uint32_t m : ws.train.movies()) ids.push_back(ws.catalog.movies.id(m));
  MerlinParams p = init_merlin(small_arch(ws.frame_dim(), ws.schema.width()), ids, 1);
  const auto batch = sample_training_batch(ws.train, ws.users, 8, 1);
  fit_feature_stats(p, ws, batch);
  p.offsets(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  OptimizerState opt(cfg.optimizer);
  EXPECT_THROW(training_step(p, opt, ws, batch, cfg, 0), TrainingFault);
}

TEST(MerlinTraining, ConfigValidation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 7;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.patience = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dropout_p = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(EarlyStopper, StopsAfterPatienceAndTracksBest) {
  EarlyStopper s(1);
  EXPECT_TRUE(s.update(0.6));
  EXPECT_FALSE(s.should_stop());
  EXPECT_TRUE(s.update(0.7));
  EXPECT_FALSE(s.should_stop());
  EXPECT_FALSE(s.update(0.69));
  EXPECT_TRUE(s.should_stop());
  EXPECT_EQ(s.best_epoch(), 2u);
  EXPECT_EQ(s.best_metric(), 0.7);
  EXPECT_EQ(s.epochs_seen(), 3u);
}

TEST(MerlinTraining, DeterministicAndLearns) {
  const Workspace ws = small_synth_workspace(3);
  MerlinArchitecture arch = small_arch(ws.frame_dim(), ws.schema.width());
  arch.embedding_dim = 8;
  arch.f_hidden = {16};
  arch.g_hidden = {16};
  arch.activation = Activation::kRelu;
  TrainConfig cfg;
  cfg.batch_size = 128;
  cfg.max_epochs = 4;
  cfg.optimizer.learning_rate = 1e-2;
  cfg.seed = 5;
  const auto a = train_merlin(ws, arch, cfg);
  const auto b = train_merlin(ws, arch, cfg);
  EXPECT_EQ(serialize_merlin(a.params, {}), serialize_merlin(b.params, {}));
  ASSERT_EQ(a.history.size(), b.history.size());
  EXPECT_GE(a.best_epoch, 1u);
  EXPECT_LT(a.history.back().train_loss, a.history.front().train_loss);
  cfg.seed = 6;
  EXPECT_NE(serialize_merlin(train_merlin(ws, arch, cfg).params, {}),
            serialize_merlin(a.params, {}));
}

TEST(MerlinCheckpoint, RoundTripIsByteIdentical) {
  MerlinParams p = init_merlin(small_arch(4, 3), std::vector<std::string>{"a", "bb"}, 1);
  randomize_offsets(p, 2, 1.0);
  p.head = {0.1, 0.2, 0.3, 0.4};
  p.stats = {{1, 2, 3}, {4, 5, 6}, true};
  p.window_days = 180;
  const ConfigEcho echo{{"seed", "7"}, {"embedding_dim", "3"}};
  const std::string bytes = serialize_merlin(p, echo);
  const MerlinCheckpoint back = deserialize_merlin(bytes);
  // The window travels in the echo block.
  ConfigEcho want = echo;
  want["window_days"] = "180";
  EXPECT_EQ(back.echo, want);
  EXPECT_EQ(back.params.window_days, 180);
  EXPECT_EQ(back.params.offset_ids, p.offset_ids);
  EXPECT_EQ(back.params.offsets, p.offsets);
  EXPECT_EQ(back.params.f, p.f);
  EXPECT_EQ(back.params.g_spec, p.g_spec);
  EXPECT_EQ(serialize_merlin(back.params, back.echo), bytes);
  EXPECT_EQ(bytes.substr(0, 4), "MRLC");
}

TEST(MerlinCheckpoint, ReloadedModelScoresIdentically) {
  const Workspace ws = small_synth_workspace(4);
  std::vector<std::string> ids;
  for (uint32_t m : ws.train.movies()) ids.push_back(ws.catalog.movies.id(m));
  MerlinParams p = init_merlin(small_arch(ws.frame_dim(), ws.schema.width()), ids, 8);
  randomize_offsets(p, 9, 0.2);
  p.head = {0.5, 0.3, 0.2, -0.4};
  const auto pairs = sample_training_batch(ws.train, ws.users, 1000, 3);
  fit_feature_stats(p, ws, pairs);
  const MerlinParams back = deserialize_merlin(serialize_merlin(p, {})).params;
  const MerlinScorer a(p, ws), b(back, ws);
  for (const auto& pair : pairs) {
    EXPECT_EQ(a.score(pair, Protocol::kInMatrix).probability,
              b.score(pair, Protocol::kInMatrix).probability);
  }
}

TEST(MerlinCheckpoint, CorruptBytesAreFormatErrors) {
  MerlinParams p = init_merlin(small_arch(2, 1), std::vector<std::string>{"a"}, 1);
  EXPECT_THROW(serialize_merlin(p, {}), StateError);
  p.stats.fitted = true;
  const std::string bytes = serialize_merlin(p, {});
  EXPECT_THROW(deserialize_merlin(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(deserialize_merlin(bytes + "x"), FormatError);
  EXPECT_THROW(deserialize_merlin("MRLP" + bytes.substr(4)), FormatError);
  EXPECT_THROW(deserialize_merlin(""), FormatError);
}

}  // namespace
}  // namespace merlin
