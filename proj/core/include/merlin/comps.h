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

// Comp analysis: the movies most attended by a target movie's predicted
// audience.

#ifndef MERLIN_COMPS_H_
#define MERLIN_COMPS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/data.h"
#include "merlin/eval.h"
#include "merlin/workspace.h"

namespace merlin {

struct CompEntry {
  std::string movie_id;
  double share = 0.0;
  bool operator==(const CompEntry&) const = default;
};

struct CompTable {
  std::string target;
  Protocol mode = Protocol::kColdStart;
  size_t k_users = 0;
  // Shares non-increasing, ties by movie_id, target absent, shares > 0.
  std::vector<CompEntry> entries;
  bool operator==(const CompTable&) const = default;
};

// min(10000, 10% of the population), at least 1.
size_t default_k_users(size_t population);

// The date a target is scored at: its first recorded attendance, or the day
// after the last record when nobody attended it.
Date comp_as_of(const Workspace& ws, uint32_t target);

// The protocol a checkpoint can score `target` with: in-matrix when the
// movie has training attendance, cold-start otherwise.
Protocol comp_mode(const Workspace& ws, uint32_t target);

// Top-k candidate users by predicted score for `target`, ties broken by
// user_id. InvalidArgument on empty candidates or k outside [1, count].
std::vector<uint32_t> top_attendees(const PairScorer& scorer,
                                    const Workspace& ws, uint32_t target,
                                    std::span<const uint32_t> candidates,
                                    size_t k, Protocol mode,
                                    size_t threads = 1);

// Ranks every other movie by the fraction of `audience` that attended it in
// `attendance`, keeping the top `n_movies`.
CompTable share_table(const Workspace& ws, const AttendanceIndex& attendance,
                      uint32_t target, std::span<const uint32_t> audience,
                      size_t n_movies);

// Predicted comps: share_table over the scorer's top-k users.
CompTable comp_table(const PairScorer& scorer, const Workspace& ws,
                     uint32_t target, const AttendanceIndex& attendance,
                     size_t k_users, size_t n_movies, Protocol mode,
                     size_t threads = 1);

// Actual comps: share_table over the target's real attendees.
CompTable actual_comp_table(const Workspace& ws, uint32_t target,
                            size_t n_movies);

// Size of the intersection of the two top-n id sets. InvalidArgument when
// n exceeds either length.
size_t comp_overlap(const CompTable& predicted, const CompTable& actual, size_t n);

// CSV `rank,movie_id,share`.
std::string format_comp_csv(const CompTable& table);
// Side-by-side predicted and actual columns, matches marked with '*'.
std::string format_comp_side_by_side(const CompTable& predicted,
                                     const CompTable& actual);

}  // namespace merlin

#endif  // MERLIN_COMPS_H_
