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

#include "merlin/workspace.h"

#include <string>

#include "merlin/errors.h"

namespace merlin {

std::string_view protocol_name(Protocol p) {
  return p == Protocol::kInMatrix ? "in_matrix" : "cold_start";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "in_matrix" || name == "inmatrix") return Protocol::kInMatrix;
  if (name == "cold_start" || name == "coldstart") return Protocol::kColdStart;
  throw InvalidArgument("unknown protocol '" + std::string(name) + "'");
}

Workspace Workspace::build(const DatasetSplit& split,
                           const DemographicsSchema& schema,
                           std::span<const UserProfile> profiles,
                           const VideoTable& videos, int window_days) {
  Workspace ws;
  ws.schema = schema;
  ws.window_days = window_days;

  std::vector<AttendanceRecord> everything;
  everything.reserve(split.train.size() + split.validation.size() +
                     split.test.size() + split.coldstart.size());
  for (const auto* part :
       {&split.train, &split.validation, &split.test, &split.coldstart}) {
    everything.insert(everything.end(), part->begin(), part->end());
  }
  std::vector<std::string> profile_users;
  for (const auto& p : profiles) profile_users.push_back(p.user_id);
  ws.catalog = Catalog::build(everything, profile_users);

  ws.train = AttendanceIndex(ws.catalog, split.train);
  ws.validation = AttendanceIndex(ws.catalog, split.validation);
  ws.test = AttendanceIndex(ws.catalog, split.test);
  ws.coldstart = AttendanceIndex(ws.catalog, split.coldstart);
  ws.all = AttendanceIndex(ws.catalog, everything);
  ws.movie_as_of = movie_as_of_dates(ws.train, ws.coldstart);

  ws.users.resize(ws.catalog.users.size());
  for (uint32_t u = 0; u < ws.users.size(); ++u) ws.users[u] = u;

  ws.demographics.assign(ws.catalog.users.size(), Vec(schema.width(), 0.0));
  for (const auto& p : profiles) {
    ws.demographics[ws.catalog.users.at(p.user_id)] =
        encode_demographics(p, schema);
  }

  ws.videos.assign(ws.catalog.movies.size(), Vec());
  size_t dim = 0;
  for (uint32_t m = 0; m < ws.catalog.movies.size(); ++m) {
    auto it = videos.find(ws.catalog.movies.id(m));
    if (it == videos.end()) {
      throw LookupError("no video vector for movie '" +
                        ws.catalog.movies.id(m) + "'");
    }
    if (dim == 0) dim = it->second.size();
    if (it->second.size() != dim) {
      throw ShapeError("video vector for movie '" + it->first +
                       "' has inconsistent dimension");
    }
    ws.videos[m] = it->second;
  }
  return ws;
}

size_t Workspace::frame_dim() const {
  for (const auto& v : videos) {
    if (!v.empty()) return v.size();
  }
  return 0;
}

}  // namespace merlin
