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

#include "merlin/comps.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include "merlin/errors.h"
#include "merlin/io.h"

namespace merlin {

size_t default_k_users(size_t population) {
  return std::max<size_t>(1, std::min<size_t>(10000, population / 10));
}

Date comp_as_of(const Workspace& ws, uint32_t target) {
  if (auto d = ws.movie_as_of[target]) return *d;
  if (auto d = ws.all.first_date(target)) return *d;
  Date last{INT32_MIN};
  for (uint32_t u = 0; u < ws.all.num_users(); ++u) {
    for (const auto& v : ws.all.visits(u)) last = std::max(last, v.date);
  }
  return add_days(last, 1);
}

Protocol comp_mode(const Workspace& ws, uint32_t target) {
  return ws.train.first_date(target) ? Protocol::kInMatrix : Protocol::kColdStart;
}

std::vector<uint32_t> top_attendees(const PairScorer& scorer,
                                    const Workspace& ws, uint32_t target,
                                    std::span<const uint32_t> candidates,
                                    size_t k, Protocol mode, size_t threads) {
  if (candidates.empty()) throw InvalidArgument("no candidate users");
  if (k == 0 || k > candidates.size()) {
    throw InvalidArgument("k_users must lie in [1, " +
                          std::to_string(candidates.size()) + "]");
  }
  const Date as_of = comp_as_of(ws, target);
  std::vector<LabeledPair> pairs;
  pairs.reserve(candidates.size());
  for (uint32_t u : candidates) pairs.push_back({u, target, 0, as_of});
  const auto scores = score_pairs(scorer, pairs, mode, threads);

  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), size_t{0});
  // Catalog indices follow sorted user ids.
  auto better = [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), better);
  std::vector<uint32_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(candidates[order[i]]);
  return out;
}

CompTable share_table(const Workspace& ws, const AttendanceIndex& attendance,
                      uint32_t target, std::span<const uint32_t> audience,
                      size_t n_movies) {
  CompTable table;
  table.target = ws.catalog.movies.id(target);
  table.k_users = audience.size();
  if (audience.empty()) return table;
  std::vector<uint32_t> counts(ws.catalog.movies.size(), 0);
  std::vector<uint8_t> seen(ws.catalog.movies.size(), 0);
  for (uint32_t u : audience) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& v : attendance.visits(u)) {
      if (v.movie == target || seen[v.movie]) continue;
      seen[v.movie] = 1;
      ++counts[v.movie];
    }
  }
  std::vector<uint32_t> movies;
  for (uint32_t m = 0; m < counts.size(); ++m) {
    if (counts[m] > 0) movies.push_back(m);
  }
  // Movie indices follow sorted movie ids.
  std::stable_sort(movies.begin(), movies.end(), [&](uint32_t a, uint32_t b) {
    return counts[a] > counts[b];
  });
  if (movies.size() > n_movies) movies.resize(n_movies);
  const double k = static_cast<double>(audience.size());
  for (uint32_t m : movies) {
    table.entries.push_back({ws.catalog.movies.id(m), counts[m] / k});
  }
  return table;
}

CompTable comp_table(const PairScorer& scorer, const Workspace& ws,
                     uint32_t target, const AttendanceIndex& attendance,
                     size_t k_users, size_t n_movies, Protocol mode,
                     size_t threads) {
  const auto audience =
      top_attendees(scorer, ws, target, ws.users, k_users, mode, threads);
  CompTable table = share_table(ws, attendance, target, audience, n_movies);
  table.mode = mode;
  return table;
}

CompTable actual_comp_table(const Workspace& ws, uint32_t target,
                            size_t n_movies) {
  const auto attendees = ws.all.attendees(target);
  CompTable table = share_table(ws, ws.all, target, attendees, n_movies);
  table.mode = comp_mode(ws, target);
  return table;
}

size_t comp_overlap(const CompTable& predicted, const CompTable& actual, size_t n) {
  if (n > predicted.entries.size() || n > actual.entries.size()) {
    throw InvalidArgument("overlap depth " + std::to_string(n) +
                          " exceeds a table length");
  }
  std::set<std::string_view> a;
  for (size_t i = 0; i < n; ++i) a.insert(predicted.entries[i].movie_id);
  size_t count = 0;
  for (size_t i = 0; i < n; ++i) count += a.count(actual.entries[i].movie_id);
  return count;
}

std::string format_comp_csv(const CompTable& table) {
  std::string out = "rank,movie_id,share\n";
  for (size_t i = 0; i < table.entries.size(); ++i) {
    out += std::to_string(i + 1) + "," + table.entries[i].movie_id + "," +
           format_double(table.entries[i].share) + "\n";
  }
  return out;
}

std::string format_comp_side_by_side(const CompTable& predicted,
                                     const CompTable& actual) {
  std::set<std::string_view> pred_ids;
  std::set<std::string_view> actual_ids;
  for (const auto& e : predicted.entries) pred_ids.insert(e.movie_id);
  for (const auto& e : actual.entries) actual_ids.insert(e.movie_id);

  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "target %s (%s, k=%zu)\n",
                predicted.target.c_str(),
                std::string(protocol_name(predicted.mode)).c_str(),
                predicted.k_users);
  out += line;
  std::snprintf(line, sizeof line, "%4s  %-20s %6s  %-20s %6s\n", "rank",
                "predicted", "share", "actual", "share");
  out += line;
  const size_t rows = std::max(predicted.entries.size(), actual.entries.size());
  for (size_t i = 0; i < rows; ++i) {
    std::string p_id, a_id;
    std::string p_share, a_share;
    if (i < predicted.entries.size()) {
      const auto& e = predicted.entries[i];
      p_id = (actual_ids.count(e.movie_id) ? "*" : " ") + e.movie_id;
      char s[16];
      std::snprintf(s, sizeof s, "%.3f", e.share);
      p_share = s;
    }
    if (i < actual.entries.size()) {
      const auto& e = actual.entries[i];
      a_id = (pred_ids.count(e.movie_id) ? "*" : " ") + e.movie_id;
      char s[16];
      std::snprintf(s, sizeof s, "%.3f", e.share);
      a_share = s;
    }
    std::snprintf(line, sizeof line, "%4zu  %-20s %6s  %-20s %6s\n", i + 1,
                  p_id.c_str(), p_share.c_str(), a_id.c_str(), a_share.c_str());
    out += line;
  }
  return out;
}

}  // namespace merlin
