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

#include "merlin/nn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "merlin/errors.h"

namespace merlin {

Vec dropout_mask(size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw InvalidArgument("dropout probability must be in [0, 1), got " +
                          std::to_string(p));
  }
  Vec mask(n, 1.0);
  if (p == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
  return mask;
}

Vec apply_dropout(std::span<const double> input, double p, RunMode mode,
                  uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw InvalidArgument("dropout probability must be in [0, 1), got " +
                          std::to_string(p));
  }
  Vec out(input.begin(), input.end());
  if (mode == RunMode::kEval || p == 0.0) return out;
  Rng rng(seed);
  const Vec mask = dropout_mask(out.size(), p, rng);
  for (size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw InvalidArgument("unknown optimizer '" + std::string(name) + "'");
}

void optimizer_step(OptimizerState& state, std::span<const ParamBlock> blocks) {
  for (size_t b = 0; b < blocks.size(); ++b) {
    require_same_size(blocks[b].values.size(), blocks[b].grads.size(),
                      "optimizer gradient");
    if (!all_finite(blocks[b].grads)) {
      throw TrainingFault("non-finite gradient in parameter block " +
                          std::to_string(b));
    }
  }
  const OptimizerConfig& cfg = state.config;
  if (cfg.kind == OptimizerKind::kSgd) {
    for (const auto& block : blocks) {
      for (size_t i = 0; i < block.values.size(); ++i) {
        block.values[i] -= cfg.learning_rate * block.grads[i];
      }
    }
    ++state.step;
    return;
  }

  if (state.step == 0 && state.first_moment.empty()) {
    for (const auto& block : blocks) {
      state.first_moment.emplace_back(block.values.size(), 0.0);
      state.second_moment.emplace_back(block.values.size(), 0.0);
    }
  }
  require_same_size(state.first_moment.size(), blocks.size(),
                    "optimizer block count");
  for (size_t b = 0; b < blocks.size(); ++b) {
    require_same_size(state.first_moment[b].size(), blocks[b].values.size(),
                      "optimizer moment");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (size_t b = 0; b < blocks.size(); ++b) {
    auto values = blocks[b].values;
    auto grads = blocks[b].grads;
    Vec& m = state.first_moment[b];
    Vec& v = state.second_moment[b];
    for (size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

double gradient_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport grad_check(const LossFn& loss, std::span<const double> params,
                           double eps, Stencil stencil) {
  Vec point(params.begin(), params.end());
  Vec analytic(point.size(), 0.0);
  loss(point, analytic);
  GradCheckReport report;
  for (size_t i = 0; i < point.size(); ++i) {
    const double original = point[i];
    auto at = [&](double step) {
      point[i] = original + step;
      const double v = loss(point, {});
      point[i] = original;
      return v;
    };
    const double numeric =
        stencil == Stencil::kCentral
            ? (at(eps) - at(-eps)) / (2.0 * eps)
            : (at(-2.0 * eps) - 8.0 * at(-eps) + 8.0 * at(eps) - at(2.0 * eps)) /
                  (12.0 * eps);
    const double err = gradient_relative_error(analytic[i], numeric);
    if (i == 0 || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace merlin
