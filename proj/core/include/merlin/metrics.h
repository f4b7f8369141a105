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

#ifndef MERLIN_METRICS_H_
#define MERLIN_METRICS_H_

#include <cstdint>
#include <span>

namespace merlin {

// Area under the ROC curve: the probability that a random positive outscores
// a random negative, ties counted one half. Rank-sum (Mann-Whitney) in
// O(n log n). Throws MetricError on length mismatch or single-class input.
double auc(std::span<const double> scores, std::span<const uint8_t> labels);

}  // namespace merlin

#endif  // MERLIN_METRICS_H_
