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

#ifndef MERLIN_MLP_H_
#define MERLIN_MLP_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/tensor.h"

namespace merlin {

enum class Activation : uint8_t { kRelu = 0, kTanh = 1, kIdentity = 2 };

std::string_view activation_name(Activation a);
// Accepts "relu", "tanh" and "identity"; throws InvalidArgument otherwise.
Activation parse_activation(std::string_view name);

// Architecture of a fully connected network. `layer_dims` lists the input
// width first and the output width last; every hidden layer uses its entry in
// `hidden_activations` and the output layer is always linear.
struct MlpSpec {
  std::vector<size_t> layer_dims;
  std::vector<Activation> hidden_activations;

  size_t input_dim() const { return layer_dims.front(); }
  size_t output_dim() const { return layer_dims.back(); }
  size_t num_layers() const { return layer_dims.size() - 1; }

  // Throws ShapeError unless there is at least one transition, every width is
  // positive and there is one activation per hidden layer.
  void validate() const;

  // Convenience builder: input -> hidden... -> output, same activation on
  // every hidden layer.
  static MlpSpec make(size_t input, std::span<const size_t> hidden,
                      size_t output, Activation activation);

  bool operator==(const MlpSpec&) const = default;
};

// Parameters of an MLP. weights[l] is (layer_dims[l+1] x layer_dims[l]).
// The same type carries gradients.
struct MlpState {
  std::vector<Tensor2> weights;
  std::vector<Vec> biases;

  bool operator==(const MlpState&) const = default;
};

// Per-layer activations recorded by a forward pass. inputs[l] is the input to
// layer l (inputs[0] is the network input), pre[l] is W_l inputs[l] + b_l.
struct MlpCache {
  std::vector<Vec> inputs;
  std::vector<Vec> pre;
};

// Glorot-uniform weights, zero biases.
MlpState init_mlp(const MlpSpec& spec, uint64_t seed);

MlpState zeros_like(const MlpState& state);

// Throws ShapeError when `state` does not match `spec`.
void check_state(const MlpSpec& spec, const MlpState& state);

// Evaluates the network. When `cache` is non-null it receives what
// mlp_backward needs.
Vec mlp_forward(const MlpSpec& spec, const MlpState& state,
                std::span<const double> input, MlpCache* cache = nullptr);

// Backpropagates `grad_output` through the cached forward pass, adding the
// parameter gradients into `grads` (which must be shaped like `state`).
// Returns the gradient with respect to the network input.
Vec mlp_backward(const MlpSpec& spec, const MlpState& state,
                 const MlpCache& cache, std::span<const double> grad_output,
                 MlpState& grads);

// Number of scalar parameters.
size_t parameter_count(const MlpState& state);

}  // namespace merlin

#endif  // MERLIN_MLP_H_
