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

#include "merlin/metrics.h"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "merlin/errors.h"

namespace merlin {

double auc(std::span<const double> scores, std::span<const uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw MetricError("auc: " + std::to_string(scores.size()) + " scores vs " +
                      std::to_string(labels.size()) + " labels");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks with midranks for ties. Ranks are doubled to stay
  // in integers: tied block [i, j) gets 2*rank = i + j + 1.
  uint64_t n_pos = 0;
  uint64_t twice_rank_sum = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    uint64_t pos_in_block = 0;
    for (size_t k = i; k < j; ++k) pos_in_block += labels[order[k]] ? 1 : 0;
    twice_rank_sum += pos_in_block * static_cast<uint64_t>(i + j + 1);
    n_pos += pos_in_block;
    i = j;
  }
  const uint64_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw MetricError("auc needs at least one positive and one negative");
  }
  // U = R_pos - n_pos (n_pos + 1) / 2, all doubled.
  const uint64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace merlin
