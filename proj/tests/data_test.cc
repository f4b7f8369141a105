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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "merlin/data.h"
#include "merlin/errors.h"
#include "merlin/io.h"
#include "merlin/random.h"
#include "test_util.h"

namespace merlin {
namespace {

using testing::rec;
using testing::scratch_dir;

TEST(Dates, ParseFormatRoundTrip) {
  EXPECT_EQ(parse_date("1970-01-01").days, 0);
  EXPECT_EQ(parse_date("1970-01-02").days, 1);
  EXPECT_EQ(parse_date("2000-03-01").days - parse_date("2000-02-28").days, 2);
  EXPECT_EQ(parse_date("1999-03-01").days - parse_date("1999-02-28").days, 1);
  for (int d = -1000; d < 30000; d += 37) {
    EXPECT_EQ(parse_date(format_date(Date{d})).days, d);
  }
  EXPECT_EQ(format_date(parse_date("2016-02-29")), "2016-02-29");
}

TEST(Dates, RejectsMalformed) {
  for (const char* bad : {"2015-13-01", "2015-02-29", "2015-1-01", "15-01-01",
                          "2015/01/01", "2015-01-32", "", "2015-01-01x"}) {
    EXPECT_THROW(parse_date(bad), ParseError) << bad;
  }
}

TEST(Attendance, NormalizeSortsAndDropsDuplicates) {
  auto load = normalize_records({rec("b", "m1", 5), rec("a", "m2", 5),
                                 rec("a", "m1", 3), rec("b", "m1", 5)});
  EXPECT_EQ(load.duplicates_dropped, 1u);
  ASSERT_EQ(load.records.size(), 3u);
  EXPECT_EQ(load.records[0], rec("a", "m1", 3));
  EXPECT_EQ(load.records[1], rec("a", "m2", 5));
  EXPECT_EQ(load.records[2], rec("b", "m1", 5));
}

TEST(Attendance, FileRoundTripAndErrors) {
  const auto dir = scratch_dir("attendance");
  const std::vector<AttendanceRecord> rs{rec("u1", "m1", 16000), rec("u2", "m1", 16001)};
  write_attendance(dir / "a.csv", rs);
  EXPECT_EQ(load_attendance(dir / "a.csv").records, rs);

  write_file(dir / "bad.csv", "user_id,movie_id,date\nu1,m1,2015-01-01\nu2,m1\n");
  try {
    load_attendance(dir / "bad.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  write_file(dir / "empty.csv", "user_id,movie_id,date\n");
  EXPECT_THROW(load_attendance(dir / "empty.csv"), EmptyDatasetError);
  EXPECT_THROW(load_attendance(dir / "missing.csv"), IoError);
}

TEST(Demographics, EncodeOneHotAndMissing) {
  DemographicsSchema schema;
  schema.fields = {{"region", {"n", "s"}}, {"age", {"y", "m", "o"}}};
  EXPECT_EQ(schema.width(), 5u);
  EXPECT_EQ(encode_demographics({"u", {"s", "o"}}, schema), (Vec{0, 1, 0, 0, 1}));
  EXPECT_EQ(encode_demographics({"u", {std::nullopt, "y"}}, schema),
            (Vec{0, 0, 1, 0, 0}));
  EXPECT_THROW(encode_demographics({"u", {"w", "y"}}, schema), SchemaError);

  DemographicsSchema dup;
  dup.fields = {{"a", {"x", "x"}}};
  EXPECT_THROW(dup.validate(), SchemaError);
}

TEST(Demographics, FileRoundTrip) {
  const auto dir = scratch_dir("demographics");
  DemographicsSchema schema;
  schema.fields = {{"region", {"n", "s"}}, {"age", {"y", "o"}}};
  write_schema(dir / "schema.csv", schema);
  const DemographicsSchema back = load_schema(dir / "schema.csv");
  ASSERT_EQ(back.fields.size(), 2u);
  EXPECT_EQ(back.fields[1].name, "age");
  EXPECT_EQ(back.fields[1].values, (std::vector<std::string>{"y", "o"}));

  const std::vector<UserProfile> profiles{{"u1", {"n", std::nullopt}}, {"u2", {"s", "o"}}};
  write_demographics(dir / "demo.csv", schema, profiles);
  const auto loaded = load_demographics(dir / "demo.csv", schema);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].values, profiles[0].values);
  EXPECT_EQ(loaded[1].values, profiles[1].values);
}

std::vector<AttendanceRecord> random_records(uint64_t seed, int n_users,
                                             int n_movies, int n) {
  Rng rng(seed);
  std::vector<AttendanceRecord> out;
  for (int i = 0; i < n; ++i) {
    const int m = static_cast<int>(rng.uniform_int(n_movies));
    out.push_back(rec("u" + std::to_string(rng.uniform_int(n_users)),
                      "m" + std::to_string(100 + m),
                      m * 3 + static_cast<int>(rng.uniform_int(20))));
  }
  return normalize_records(std::move(out)).records;
}

TEST(Split, ColdStartHoldsOutLatestMoviesEntirely) {
  const auto records = random_records(1, 40, 30, 600);
  SplitConfig cfg;
  cfg.n_coldstart = 5;
  const DatasetSplit s = split_dataset(records, cfg);

  // Oracle: first attendance per movie, latest five (ties by smaller id).
  std::map<std::string, int> first;
  for (const auto& r : records) {
    auto [it, fresh] = first.emplace(r.movie_id, r.date.days);
    if (!fresh) it->second = std::min(it->second, r.date.days);
  }
  std::vector<std::pair<int, std::string>> order;
  for (const auto& [m, d] : first) order.push_back({d, m});
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::set<std::string> want;
  for (size_t i = 0; i < 5; ++i) want.insert(order[i].second);
  EXPECT_EQ(s.coldstart_movies, want);

  for (const auto& r : s.coldstart) EXPECT_TRUE(want.count(r.movie_id));
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    for (const auto& r : *part) EXPECT_FALSE(want.count(r.movie_id));
  }
  EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size() + s.coldstart.size(),
            records.size());
  std::vector<AttendanceRecord> all;
  for (const auto* part : {&s.train, &s.validation, &s.test, &s.coldstart}) {
    all.insert(all.end(), part->begin(), part->end());
  }
  EXPECT_EQ(normalize_records(all).records, records);
}

TEST(Split, FractionsSeedAndErrors) {
  const auto records = random_records(2, 50, 40, 2000);
  SplitConfig cfg;
  cfg.n_coldstart = 4;
  cfg.seed = 7;
  const DatasetSplit a = split_dataset(records, cfg);
  const double rest = static_cast<double>(records.size() - a.coldstart.size());
  EXPECT_NEAR(a.validation.size() / rest, 0.1, 0.01);
  EXPECT_NEAR(a.test.size() / rest, 0.1, 0.01);
  EXPECT_EQ(split_dataset(records, cfg).train, a.train);
  cfg.seed = 8;
  EXPECT_NE(split_dataset(records, cfg).train, a.train);

  cfg.val_frac = 0.5;
  EXPECT_THROW(split_dataset(records, cfg), ConfigError);
  cfg.val_frac = 0.0;
  EXPECT_THROW(split_dataset(records, cfg), ConfigError);
  cfg.val_frac = 0.1;
  cfg.n_coldstart = 1000;
  EXPECT_THROW(split_dataset(records, cfg), ConfigError);
}

TEST(Split, WriteLoadRoundTrip) {
  const auto records = random_records(3, 20, 12, 200);
  SplitConfig cfg;
  cfg.n_coldstart = 3;
  const DatasetSplit s = split_dataset(records, cfg);
  const auto dir = scratch_dir("split");
  write_split(dir, s);
  const DatasetSplit back = load_split(dir);
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.validation, s.validation);
  EXPECT_EQ(back.test, s.test);
  EXPECT_EQ(back.coldstart, s.coldstart);
  EXPECT_EQ(back.coldstart_movies, s.coldstart_movies);
}

// Direct definition: visits in [as_of - window, as_of).
FreqRec reference_freq_rec(const std::vector<AttendanceRecord>& rs,
                           const std::string& user, int as_of, int window) {
  FreqRec out{0, window};
  int latest = -1 << 30;
  for (const auto& r : rs) {
    if (r.user_id != user) continue;
    if (r.date.days < as_of && r.date.days >= as_of - window) {
      ++out.frequency;
      latest = std::max(latest, r.date.days);
    }
  }
  if (out.frequency > 0) out.recency_days = as_of - latest;
  return out;
}

TEST(FreqRec, HandExample) {
  const std::vector<AttendanceRecord> rs{rec("u", "a", 10), rec("u", "b", 20),
                                         rec("u", "c", 30), rec("v", "a", 29)};
  EXPECT_EQ(compute_frequency_recency(rs, "u", Date{30}, 365), (FreqRec{2, 10}));
  EXPECT_EQ(compute_frequency_recency(rs, "u", Date{31}, 365), (FreqRec{3, 1}));
  EXPECT_EQ(compute_frequency_recency(rs, "u", Date{31}, 15), (FreqRec{2, 1}));
  EXPECT_EQ(compute_frequency_recency(rs, "u", Date{30}, 20), (FreqRec{2, 10}));
  EXPECT_EQ(compute_frequency_recency(rs, "u", Date{30}, 19), (FreqRec{1, 10}));
  EXPECT_EQ(compute_frequency_recency(rs, "u", Date{10}, 365), (FreqRec{0, 365}));
  EXPECT_EQ(compute_frequency_recency(rs, "w", Date{50}, 30), (FreqRec{0, 30}));
}

TEST(FreqRec, IndexMatchesReference) {
  const auto records = random_records(4, 15, 20, 400);
  const Catalog cat = Catalog::build(records);
  const AttendanceIndex idx(cat, records);
  for (uint32_t u = 0; u < cat.users.size(); ++u) {
    for (int as_of : {0, 17, 40, 63, 90}) {
      for (int window : {5, 30, 365}) {
        const auto want = reference_freq_rec(records, cat.users.id(u), as_of, window);
        EXPECT_EQ(idx.frequency_recency(u, Date{as_of}, window), want);
        EXPECT_EQ(compute_frequency_recency(records, cat.users.id(u), Date{as_of}, window),
                  want);
      }
    }
  }
}

TEST(Index, HistoryAndFirstDates) {
  const std::vector<AttendanceRecord> rs{rec("u", "a", 5), rec("u", "b", 7),
                                         rec("u", "a", 9), rec("v", "c", 8)};
  const Catalog cat = Catalog::build(rs);
  const AttendanceIndex idx(cat, rs);
  const uint32_t u = cat.users.at("u");
  std::vector<uint32_t> h;
  idx.history(u, Date{8}, std::nullopt, h);
  EXPECT_EQ(h, (std::vector<uint32_t>{cat.movies.at("a"), cat.movies.at("b")}));
  idx.history(u, Date{8}, cat.movies.at("a"), h);
  EXPECT_EQ(h, (std::vector<uint32_t>{cat.movies.at("b")}));
  idx.history(u, Date{5}, std::nullopt, h);
  EXPECT_TRUE(h.empty());
  EXPECT_EQ(idx.first_date(cat.movies.at("a")), Date{5});
  EXPECT_EQ(idx.pairs().size(), 3u);
  EXPECT_TRUE(idx.attended(u, cat.movies.at("b")));
  EXPECT_FALSE(idx.attended(u, cat.movies.at("c")));
  EXPECT_THROW(cat.users.at("zzz"), LookupError);
}

TEST(Sampling, TrainingBatchIsBalancedAndValid) {
  const auto records = random_records(5, 30, 25, 300);
  const Catalog cat = Catalog::build(records);
  const AttendanceIndex idx(cat, records);
  std::vector<uint32_t> users(cat.users.size());
  for (uint32_t i = 0; i < users.size(); ++i) users[i] = i;
  const auto batch = sample_training_batch(idx, users, 64, 3);
  ASSERT_EQ(batch.size(), 64u);
  size_t pos = 0;
  for (const auto& p : batch) {
    pos += p.label;
    EXPECT_EQ(idx.attended(p.user, p.movie), p.label == 1);
    EXPECT_EQ(p.as_of, *idx.first_date(p.movie));
  }
  EXPECT_EQ(pos, 32u);
  EXPECT_EQ(sample_training_batch(idx, users, 64, 3), batch);
  EXPECT_THROW(sample_training_batch(idx, users, 63, 3), InvalidArgument);
  EXPECT_THROW(sample_training_batch(idx, users, 0, 3), InvalidArgument);
}

TEST(Sampling, SaturatedUsersRaiseSamplingError) {
  // The only user attended every movie, so no negative exists.
  const std::vector<AttendanceRecord> rs{rec("u", "a", 1), rec("u", "b", 2)};
  const Catalog cat = Catalog::build(rs);
  const AttendanceIndex idx(cat, rs);
  const std::vector<uint32_t> users{0};
  EXPECT_THROW(sample_training_batch(idx, users, 4, 1), SamplingError);
}

TEST(Sampling, EvalSetStructure) {
  const auto records = random_records(6, 60, 10, 150);
  const Catalog cat = Catalog::build(records);
  const AttendanceIndex idx(cat, records);
  std::vector<uint32_t> users(cat.users.size());
  for (uint32_t i = 0; i < users.size(); ++i) users[i] = i;
  const auto as_of = movie_as_of_dates(idx, AttendanceIndex(cat, {}));
  const auto set = sample_eval_set(idx, idx, users, as_of, 9, 4);
  ASSERT_EQ(set.size(), idx.pairs().size() * 10);
  for (size_t i = 0; i < set.size(); i += 10) {
    EXPECT_EQ(set[i].label, 1);
    std::set<uint32_t> negs;
    for (size_t j = 1; j < 10; ++j) {
      EXPECT_EQ(set[i + j].label, 0);
      EXPECT_EQ(set[i + j].movie, set[i].movie);
      EXPECT_FALSE(idx.attended(set[i + j].user, set[i].movie));
      negs.insert(set[i + j].user);
    }
    EXPECT_EQ(negs.size(), 9u);
  }
}

TEST(Sampling, EvalSetNamesStarvedMovie) {
  const std::vector<AttendanceRecord> rs{rec("u1", "hit", 1), rec("u2", "hit", 1),
                                         rec("u3", "x", 2)};
  const Catalog cat = Catalog::build(rs);
  const AttendanceIndex idx(cat, rs);
  const std::vector<uint32_t> users{0, 1, 2};
  const auto as_of = movie_as_of_dates(idx, AttendanceIndex(cat, {}));
  try {
    sample_eval_set(idx, idx, users, as_of, 9, 1, &cat.movies);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("hit"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace merlin
