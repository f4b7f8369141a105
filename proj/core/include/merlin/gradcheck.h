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

// Finite-difference verification of the end-to-end Merlin gradient on small
// random instances.

#ifndef MERLIN_GRADCHECK_H_
#define MERLIN_GRADCHECK_H_

#include <cstdint>
#include <vector>

#include "merlin/data.h"
#include "merlin/model.h"
#include "merlin/nn.h"
#include "merlin/workspace.h"

namespace merlin {

struct GradCheckInstance {
  Workspace ws;
  MerlinParams params;
  std::vector<LabeledPair> batch;
  double offset_l2 = 0.0;
};

// A random workspace of 2-4 users and 3-5 movies with every width in
// [2, max_dim], random offsets and head, fitted stats and a 2-6 pair batch.
// Instances whose relu pre-activations come within `kink_margin` of zero are
// redrawn, since finite differences are invalid across a kink.
GradCheckInstance random_gradcheck_instance(uint64_t seed, size_t max_dim = 8,
                                            double kink_margin = 2e-3);

// Dropout disabled; five-point stencil with step `eps`.
GradCheckReport check_merlin_gradients(const GradCheckInstance& instance,
                                       double eps = 1e-4);

}  // namespace merlin

#endif  // MERLIN_GRADCHECK_H_
