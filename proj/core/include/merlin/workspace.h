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

#ifndef MERLIN_WORKSPACE_H_
#define MERLIN_WORKSPACE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "merlin/data.h"
#include "merlin/videovec.h"

namespace merlin {

// In-matrix: the movie has attendance in the training partition and a
// learned offset. Cold-start: content only.
enum class Protocol : uint8_t { kInMatrix, kColdStart };

std::string_view protocol_name(Protocol p);
// Accepts "in_matrix"/"inmatrix" and "cold_start"/"coldstart".
Protocol parse_protocol(std::string_view name);

inline constexpr int kDefaultWindowDays = 365;

// Everything the models need about one dataset, interned and indexed once.
// Immutable after build(); safe to share across threads for reading.
struct Workspace {
  Catalog catalog;
  DemographicsSchema schema;
  AttendanceIndex train;
  AttendanceIndex validation;
  AttendanceIndex test;
  AttendanceIndex coldstart;
  AttendanceIndex all;
  // Every catalog user; the population negatives are drawn from.
  std::vector<uint32_t> users;
  std::vector<std::optional<Date>> movie_as_of;
  // One-hot demographics per user (all zero without a profile).
  std::vector<Vec> demographics;
  // Pooled trailer vector per movie; empty when the movie has none.
  std::vector<Vec> videos;
  int window_days = kDefaultWindowDays;

  // Throws LookupError when a movie with records has no video vector, and
  // SchemaError for profiles outside the schema.
  static Workspace build(const DatasetSplit& split,
                         const DemographicsSchema& schema,
                         std::span<const UserProfile> profiles,
                         const VideoTable& videos,
                         int window_days = kDefaultWindowDays);

  size_t frame_dim() const;
  bool is_coldstart_movie(uint32_t movie) const {
    return coldstart.first_date(movie).has_value() &&
           !train.first_date(movie).has_value();
  }
  // Frequency/recency from the training partition.
  FreqRec frequency_recency(uint32_t user, Date as_of) const {
    return train.frequency_recency(user, as_of, window_days);
  }
};

}  // namespace merlin

#endif  // MERLIN_WORKSPACE_H_
