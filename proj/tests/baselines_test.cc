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

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "merlin/baselines.h"
#include "merlin/errors.h"
#include "merlin/metrics.h"
#include "merlin/random.h"
#include "test_util.h"

namespace merlin {
namespace {

using testing::small_synth_workspace;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Labels drawn from sigmoid(strength * (frequency - 3)); recency is noise.
std::vector<RfExample> frequency_examples(size_t n, double strength, uint64_t seed) {
  Rng rng(seed);
  std::vector<RfExample> out;
  for (size_t i = 0; i < n; ++i) {
    RfExample e;
    e.frequency = static_cast<int>(rng.uniform_int(8));
    e.recency = 1 + static_cast<int>(rng.uniform_int(365));
    e.label = rng.bernoulli(sigmoid(strength * (e.frequency - 3)));
    out.push_back(e);
  }
  return out;
}

double rf_auc(const RfParams& p, const std::vector<RfExample>& xs) {
  std::vector<double> s;
  std::vector<uint8_t> y;
  for (const auto& e : xs) {
    s.push_back(rf_predict(p, e.frequency, e.recency));
    y.push_back(e.label);
  }
  return auc(s, y);
}

TEST(Rf, ZeroWeightsPredictHalf) {
  const RfParams p;
  EXPECT_EQ(rf_predict(p, 0, 365), 0.5);
  EXPECT_EQ(rf_predict(p, 12, 3), 0.5);
}

TEST(Rf, HandComputedPrediction) {
  RfParams p;
  p.weights = {1.5, -0.5};
  p.bias = 0.2;
  p.mean = {0.5, -0.5};
  p.stddev = {2.0, 0.25};
  const auto raw = rf_raw_features(3, 73, 365);
  EXPECT_DOUBLE_EQ(raw[0], std::log(4.0));
  EXPECT_DOUBLE_EQ(raw[1], -0.2);
  const double z = 0.2 + 1.5 * (std::log(4.0) - 0.5) / 2.0 - 0.5 * (-0.2 + 0.5) / 0.25;
  EXPECT_NEAR(rf_predict(p, 3, 73), sigmoid(z), 1e-15);
}

TEST(Rf, RecoversFrequencySignal) {
  const auto train = frequency_examples(4000, 1.0, 1);
  const auto val = frequency_examples(1000, 1.0, 2);
  const auto test = frequency_examples(2000, 1.0, 3);
  const RfParams p = rf_train(train, val, {});
  EXPECT_GT(rf_auc(p, test), 0.65);
  EXPECT_GT(p.weights[0], 0.0);
}

TEST(Rf, NoSignalGivesChanceAuc) {
  const auto train = frequency_examples(4000, 0.0, 4);
  const auto test = frequency_examples(4000, 0.0, 5);
  EXPECT_NEAR(rf_auc(rf_train(train, {}, {}), test), 0.5, 0.05);
}

TEST(Rf, SingleClassIsFitError) {
  std::vector<RfExample> xs{{1, 10, 1}, {2, 20, 1}};
  EXPECT_THROW(rf_train(xs, {}, {}), FitError);
  EXPECT_THROW(rf_train({}, {}, {}), FitError);
}

TEST(Rf, ScoresDependOnlyOnFeatures) {
  const Workspace ws = small_synth_workspace(6);
  const RfParams p = train_rf(ws, {}, 3);
  // Users sharing (frequency, recency) at a date share a score.
  const Date as_of = *ws.train.first_date(ws.train.movies().back());
  std::map<std::pair<int, int>, double> seen;
  for (uint32_t u : ws.users) {
    const FreqRec fr = ws.frequency_recency(u, as_of);
    const double s = rf_predict(p, fr.frequency, fr.recency_days);
    auto [it, fresh] = seen.try_emplace({fr.frequency, fr.recency_days}, s);
    if (!fresh) EXPECT_EQ(it->second, s);
  }
  EXPECT_EQ(train_rf(ws, {}, 3), p);
}

TEST(Rf, CheckpointRoundTrip) {
  RfParams p;
  p.weights = {0.25, -1.0 / 3.0};
  p.bias = 0.1;
  p.mean = {1, 2};
  p.stddev = {3, 4};
  p.window_days = 200;
  const std::string bytes = serialize_rf(p, {{"seed", "1"}});
  EXPECT_EQ(bytes.substr(0, 4), "MRLR");
  const RfCheckpoint back = deserialize_rf(bytes);
  EXPECT_EQ(back.params, p);
  EXPECT_EQ(back.echo.at("seed"), "1");
  EXPECT_THROW(deserialize_rf(bytes.substr(0, 10)), FormatError);
}

TEST(Pmf, LogitMatchesDotProductOracle) {
  const PmfParams p = init_pmf({"u1", "u2"}, {"a", "b", "c"}, 5, 0.3, 7);
  for (size_t u = 0; u < 2; ++u) {
    for (size_t m = 0; m < 3; ++m) {
      double dot = p.bias;
      for (size_t k = 0; k < 5; ++k) dot += p.users(u, k) * p.movies(m, k);
      EXPECT_NEAR(pmf_logit(p, u, m), dot, 1e-15);
    }
  }
  EXPECT_NEAR(pmf_predict(p, "u2", "c"), sigmoid(pmf_logit(p, 1, 2)), 1e-15);
}

TEST(Pmf, BilinearInUserVector) {
  PmfParams p = init_pmf({"u"}, {"a"}, 4, 0.5, 3);
  p.bias = 0.7;
  const double before = pmf_logit(p, 0, 0) - p.bias;
  for (double& v : p.users.row(0)) v *= 2;
  EXPECT_NEAR(pmf_logit(p, 0, 0) - p.bias, 2 * before, 1e-15);
}

TEST(Pmf, UnknownIdsAreErrors) {
  const PmfParams p = init_pmf({"u"}, {"a"}, 2, 0.1, 1);
  EXPECT_THROW(pmf_predict(p, "u", "new_movie"), ColdStartUnsupported);
  EXPECT_THROW(pmf_predict(p, "stranger", "a"), LookupError);
}

TEST(Pmf, TinyRankOneFitPrefersAttendedMovie) {
  PmfParams p = init_pmf({"u"}, {"a", "b"}, 1, 0.1, 2);
  const std::vector<PmfExample> batch{{0, 0, 1}, {0, 1, 0}};
  OptimizerState opt({OptimizerKind::kAdam, 0.05});
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 300; ++i) {
    last = pmf_step(p, opt, batch, 1e-3);
    if (i == 0) first = last;
  }
  EXPECT_LT(last, first);
  EXPECT_GT(pmf_predict(p, "u", "a"), pmf_predict(p, "u", "b"));
}

TEST(Pmf, BatchLossGradientMatchesFiniteDifferences) {
  const PmfParams base = init_pmf({"u1", "u2", "u3"}, {"a", "b"}, 3, 0.5, 4);
  const std::vector<PmfExample> batch{{0, 0, 1}, {1, 1, 0}, {2, 0, 0}, {0, 1, 1}};
  const size_t nu = base.users.size(), nm = base.movies.size();
  const LossFn loss = [&](std::span<const double> flat, std::span<double> grad) {
    PmfParams p = base;
    std::copy(flat.begin(), flat.begin() + nu, p.users.values().begin());
    std::copy(flat.begin() + nu, flat.begin() + nu + nm, p.movies.values().begin());
    p.bias = flat[nu + nm];
    Tensor2 gu(p.users.rows(), p.users.cols()), gm(p.movies.rows(), p.movies.cols());
    double gb = 0.0;
    const double l = pmf_batch_loss(p, batch, 0.1, &gu, &gm, &gb);
    if (!grad.empty()) {
      std::copy(gu.values().begin(), gu.values().end(), grad.begin());
      std::copy(gm.values().begin(), gm.values().end(), grad.begin() + nu);
      grad[nu + nm] = gb;
    }
    return l;
  };
  Vec flat(base.users.values().begin(), base.users.values().end());
  flat.insert(flat.end(), base.movies.values().begin(), base.movies.values().end());
  flat.push_back(0.3);
  EXPECT_LT(grad_check(loss, flat, 1e-5).max_relative_error, 1e-6);
}

TEST(Pmf, TrainingIsDeterministicAndCoversCatalog) {
  const Workspace ws = small_synth_workspace(6);
  PmfTrainConfig cfg;
  cfg.rank = 4;
  cfg.max_epochs = 3;
  cfg.seed = 9;
  const PmfParams a = train_pmf(ws, cfg);
  EXPECT_EQ(train_pmf(ws, cfg), a);
  EXPECT_EQ(a.user_ids.size(), ws.catalog.users.size());
  EXPECT_EQ(a.movie_ids.size(), ws.train.movies().size());
  const std::string bytes = serialize_pmf(a, {});
  EXPECT_EQ(bytes.substr(0, 4), "MRLP");
  EXPECT_EQ(deserialize_pmf(bytes).params, a);
}

}  // namespace
}  // namespace merlin
