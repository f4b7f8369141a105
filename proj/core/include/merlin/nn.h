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

// Training utilities shared by every model: inverted dropout, first-order
// optimizers and a central-difference gradient checker.

#ifndef MERLIN_NN_H_
#define MERLIN_NN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "merlin/random.h"
#include "merlin/tensor.h"

namespace merlin {

enum class RunMode : uint8_t { kTrain, kEval };

// Per-entry scale factors for inverted dropout: 0 with probability p,
// otherwise 1/(1-p). p == 0 yields all ones without consuming randomness.
Vec dropout_mask(size_t n, double p, Rng& rng);

// Eval mode returns the input untouched. Throws InvalidArgument unless
// 0 <= p < 1.
Vec apply_dropout(std::span<const double> input, double p, RunMode mode,
                  uint64_t seed);

enum class OptimizerKind : uint8_t { kSgd, kAdam };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One parameter tensor and its gradient, flattened.
struct ParamBlock {
  std::span<double> values;
  std::span<const double> grads;
};

struct OptimizerState {
  explicit OptimizerState(OptimizerConfig config = {}) : config(config) {}

  OptimizerConfig config;
  uint64_t step = 0;
  // Adam moments, one entry per parameter block; sized on the first step.
  std::vector<Vec> first_moment;
  std::vector<Vec> second_moment;
};

// Applies one update to every block. SGD: p -= lr * g. Adam: bias-corrected
// moment update. Throws TrainingFault if any gradient is non-finite (nothing
// is modified in that case) and ShapeError if the block layout changed
// between steps.
void optimizer_step(OptimizerState& state, std::span<const ParamBlock> blocks);

// Loss callback for grad_check. Must be deterministic. When `grad` is
// non-empty it receives the analytic gradient (same length as `params`).
using LossFn =
    std::function<double(std::span<const double> params, std::span<double> grad)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// |a - n| / max(1e-6, |a| + |n|). The floor turns the test into an absolute
// 1e-10 tolerance for gradients that are zero up to rounding.
double gradient_relative_error(double analytic, double numeric);

// Finite-difference stencils: (f(x+h) - f(x-h)) / 2h, or the fourth-order
// (f(x-2h) - 8f(x-h) + 8f(x+h) - f(x+2h)) / 12h.
enum class Stencil : uint8_t { kCentral, kFivePoint };

// Compares the analytic gradient of `loss` against finite differences with
// step `eps` for every coordinate of `params`.
GradCheckReport grad_check(const LossFn& loss, std::span<const double> params,
                           double eps = 1e-5,
                           Stencil stencil = Stencil::kCentral);

}  // namespace merlin

#endif  // MERLIN_NN_H_
