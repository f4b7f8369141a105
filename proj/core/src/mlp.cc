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

#include "merlin/mlp.h"

#include <cmath>
#include <string>

#include "merlin/errors.h"
#include "merlin/random.h"

namespace merlin {
namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kIdentity:
      return x;
  }
  return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre) {
  switch (a) {
    case Activation::kRelu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

Activation layer_activation(const MlpSpec& spec, size_t layer) {
  return layer + 1 < spec.num_layers() ? spec.hidden_activations[layer]
                                       : Activation::kIdentity;
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

void MlpSpec::validate() const {
  if (layer_dims.size() < 2) {
    throw ShapeError("mlp needs at least one layer transition");
  }
  for (size_t d : layer_dims) {
    if (d == 0) throw ShapeError("mlp layer widths must be positive");
  }
  require_same_size(layer_dims.size() - 2, hidden_activations.size(),
                    "mlp hidden activations");
}

MlpSpec MlpSpec::make(size_t input, std::span<const size_t> hidden,
                      size_t output, Activation activation) {
  MlpSpec spec;
  spec.layer_dims.push_back(input);
  for (size_t h : hidden) {
    spec.layer_dims.push_back(h);
    spec.hidden_activations.push_back(activation);
  }
  spec.layer_dims.push_back(output);
  spec.validate();
  return spec;
}

MlpState init_mlp(const MlpSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  MlpState state;
  for (size_t l = 0; l < spec.num_layers(); ++l) {
    const size_t fan_in = spec.layer_dims[l];
    const size_t fan_out = spec.layer_dims[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor2 w(fan_out, fan_in);
    for (double& v : w.values()) v = rng.uniform(-a, a);
    state.weights.push_back(std::move(w));
    state.biases.emplace_back(fan_out, 0.0);
  }
  return state;
}

MlpState zeros_like(const MlpState& state) {
  MlpState z;
  for (const auto& w : state.weights) z.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : state.biases) z.biases.emplace_back(b.size(), 0.0);
  return z;
}

void check_state(const MlpSpec& spec, const MlpState& state) {
  spec.validate();
  require_same_size(spec.num_layers(), state.weights.size(), "mlp weight list");
  require_same_size(spec.num_layers(), state.biases.size(), "mlp bias list");
  for (size_t l = 0; l < spec.num_layers(); ++l) {
    require_same_size(spec.layer_dims[l + 1], state.weights[l].rows(),
                      "mlp weight rows");
    require_same_size(spec.layer_dims[l], state.weights[l].cols(),
                      "mlp weight cols");
    require_same_size(spec.layer_dims[l + 1], state.biases[l].size(),
                      "mlp bias");
  }
}

Vec mlp_forward(const MlpSpec& spec, const MlpState& state,
                std::span<const double> input, MlpCache* cache) {
  require_same_size(spec.input_dim(), input.size(), "mlp input");
  if (cache != nullptr) {
    cache->inputs.assign(spec.num_layers(), Vec());
    cache->pre.assign(spec.num_layers(), Vec());
  }
  Vec current(input.begin(), input.end());
  for (size_t l = 0; l < spec.num_layers(); ++l) {
    Vec pre = matvec(state.weights[l], current);
    const Vec& b = state.biases[l];
    for (size_t i = 0; i < pre.size(); ++i) pre[i] += b[i];
    const Activation act = layer_activation(spec, l);
    Vec out(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) out[i] = activate(act, pre[i]);
    if (cache != nullptr) {
      cache->inputs[l] = std::move(current);
      cache->pre[l] = std::move(pre);
    }
    current = std::move(out);
  }
  return current;
}

Vec mlp_backward(const MlpSpec& spec, const MlpState& state,
                 const MlpCache& cache, std::span<const double> grad_output,
                 MlpState& grads) {
  require_same_size(spec.num_layers(), cache.inputs.size(), "mlp cache");
  require_same_size(spec.num_layers(), cache.pre.size(), "mlp cache");
  require_same_size(spec.output_dim(), grad_output.size(), "mlp grad_output");
  require_same_size(state.weights.size(), grads.weights.size(), "mlp grads");
  Vec delta(grad_output.begin(), grad_output.end());
  for (size_t l = spec.num_layers(); l-- > 0;) {
    const Vec& pre = cache.pre[l];
    const Vec& in = cache.inputs[l];
    require_same_size(spec.layer_dims[l + 1], pre.size(), "mlp cache layer");
    require_same_size(spec.layer_dims[l], in.size(), "mlp cache layer");
    const Activation act = layer_activation(spec, l);
    if (act != Activation::kIdentity) {
      for (size_t i = 0; i < delta.size(); ++i) {
        delta[i] *= activate_grad(act, pre[i]);
      }
    }
    add_outer(grads.weights[l], delta, in);
    axpy(1.0, delta, grads.biases[l]);
    delta = matvec_transposed(state.weights[l], delta);
  }
  return delta;
}

size_t parameter_count(const MlpState& state) {
  size_t n = 0;
  for (const auto& w : state.weights) n += w.size();
  for (const auto& b : state.biases) n += b.size();
  return n;
}

}  // namespace merlin
