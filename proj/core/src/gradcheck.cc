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

#include "merlin/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "merlin/random.h"

namespace merlin {
namespace {

size_t pick(Rng& rng, size_t lo, size_t hi) {
  return lo + rng.uniform_int(hi - lo + 1);
}

double min_hidden_preactivation(const MlpSpec& spec, const MlpState& state,
                                std::span<const double> input) {
  MlpCache cache;
  mlp_forward(spec, state, input, &cache);
  double lo = std::numeric_limits<double>::infinity();
  for (size_t l = 0; l + 1 < spec.num_layers(); ++l) {
    if (spec.hidden_activations[l] != Activation::kRelu) continue;
    for (double v : cache.pre[l]) lo = std::min(lo, std::abs(v));
  }
  return lo;
}

GradCheckInstance draw(Rng& rng, uint64_t seed, size_t max_dim) {
  max_dim = std::max<size_t>(max_dim, 2);
  const size_t n_users = pick(rng, 2, 4);
  const size_t n_movies = pick(rng, 3, 5);

  DemographicsSchema schema;
  const size_t n_fields = pick(rng, 1, 2);
  size_t width = 0;
  for (size_t f = 0; f < n_fields; ++f) {
    const size_t n_values = std::min(pick(rng, 2, 3), max_dim - width);
    if (n_values == 0) break;
    DemographicField field{"f" + std::to_string(f), {}};
    for (size_t v = 0; v < n_values; ++v) field.values.push_back("v" + std::to_string(v));
    width += n_values;
    schema.fields.push_back(std::move(field));
  }

  std::vector<std::string> users;
  std::vector<std::string> movies;
  for (size_t u = 0; u < n_users; ++u) users.push_back("u" + std::to_string(u));
  for (size_t m = 0; m < n_movies; ++m) movies.push_back("m" + std::to_string(m));

  DatasetSplit split;
  for (size_t m = 0; m < n_movies; ++m) {
    // Every movie gets at least one attendee so it owns an offset.
    const size_t forced = rng.uniform_int(n_users);
    for (size_t u = 0; u < n_users; ++u) {
      if (u == forced || rng.bernoulli(0.5)) {
        split.train.push_back(
            {users[u], movies[m], Date{static_cast<int32_t>(rng.uniform_int(60))}});
      }
    }
  }
  std::sort(split.train.begin(), split.train.end(), record_less);

  std::vector<UserProfile> profiles;
  for (const auto& id : users) {
    UserProfile p{id, {}};
    for (const auto& field : schema.fields) {
      p.values.push_back(field.values[rng.uniform_int(field.values.size())]);
    }
    profiles.push_back(std::move(p));
  }

  const size_t frame_dim = pick(rng, 2, max_dim);
  VideoTable videos;
  for (const auto& id : movies) {
    Vec v(frame_dim);
    for (double& x : v) x = rng.normal();
    videos[id] = std::move(v);
  }

  GradCheckInstance inst;
  inst.ws = Workspace::build(split, schema, profiles, videos, 30);

  MerlinArchitecture arch;
  arch.frame_dim = frame_dim;
  arch.demographics_width = schema.width();
  arch.embedding_dim = pick(rng, 2, max_dim);
  arch.f_hidden.assign(pick(rng, 1, 2), 0);
  for (size_t& h : arch.f_hidden) h = pick(rng, 2, max_dim);
  arch.g_hidden.assign(pick(rng, 1, 2), 0);
  for (size_t& h : arch.g_hidden) h = pick(rng, 2, max_dim);
  arch.window_days = 30;
  inst.params = init_merlin(arch, movies, derive_seed(seed, {0x1417}));
  for (double& v : inst.params.offsets.values()) v = rng.normal(0.0, 0.3);
  for (auto& layer : inst.params.f.biases) {
    for (double& v : layer) v = rng.normal(0.0, 0.2);
  }
  for (auto& layer : inst.params.g.biases) {
    for (double& v : layer) v = rng.normal(0.0, 0.2);
  }
  for (double& v : inst.params.head) v = rng.normal();

  const size_t batch = pick(rng, 2, 6);
  for (size_t i = 0; i < batch; ++i) {
    inst.batch.push_back({static_cast<uint32_t>(rng.uniform_int(n_users)),
                          static_cast<uint32_t>(rng.uniform_int(n_movies)),
                          static_cast<uint8_t>(rng.uniform_int(2)),
                          Date{static_cast<int32_t>(rng.uniform_int(70))}});
  }
  // Stats over every user-movie pair keep the standardized distance well
  // scaled; a degenerate batch would inflate rounding noise.
  std::vector<LabeledPair> all_pairs;
  for (uint32_t u = 0; u < n_users; ++u) {
    for (uint32_t m = 0; m < n_movies; ++m) {
      for (int32_t day : {20, 45, 70}) all_pairs.push_back({u, m, 0, Date{day}});
    }
  }
  fit_feature_stats(inst.params, inst.ws, all_pairs);
  inst.offset_l2 = rng.uniform(0.0, 0.1);
  return inst;
}

}  // namespace

GradCheckInstance random_gradcheck_instance(uint64_t seed, size_t max_dim,
                                            double kink_margin) {
  for (uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, {0x6c3c, attempt}));
    GradCheckInstance inst = draw(rng, seed, max_dim);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& v : inst.ws.videos) {
      margin = std::min(margin, min_hidden_preactivation(inst.params.f_spec,
                                                         inst.params.f, v));
    }
    for (const auto& d : inst.ws.demographics) {
      margin = std::min(margin, min_hidden_preactivation(inst.params.g_spec,
                                                         inst.params.g, d));
    }
    if (margin >= kink_margin) return inst;
  }
}

GradCheckReport check_merlin_gradients(const GradCheckInstance& inst,
                                       double eps) {
  MerlinParams work = inst.params;
  const LossFn loss = [&](std::span<const double> flat, std::span<double> grad) {
    unflatten_params(flat, work);
    if (grad.empty()) {
      return merlin_batch_loss(work, inst.ws, inst.batch, inst.offset_l2, 0.0,
                               RunMode::kEval, 0, nullptr);
    }
    MerlinGrads grads = MerlinGrads::zeros_like(work);
    const double value = merlin_batch_loss(work, inst.ws, inst.batch,
                                           inst.offset_l2, 0.0, RunMode::kEval,
                                           0, &grads);
    const Vec g = flatten_grads(grads);
    std::copy(g.begin(), g.end(), grad.begin());
    return value;
  };
  return grad_check(loss, flatten_params(inst.params), eps, Stencil::kFivePoint);
}

}  // namespace merlin
