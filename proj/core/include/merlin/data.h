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

#ifndef MERLIN_DATA_H_
#define MERLIN_DATA_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "merlin/tensor.h"

namespace merlin {

// Calendar day, stored as days since 1970-01-01.
struct Date {
  int32_t days = 0;

  auto operator<=>(const Date&) const = default;
};

// Strict ISO-8601 YYYY-MM-DD. Throws ParseError on anything else, including
// out-of-range months and days.
Date parse_date(std::string_view text);
std::string format_date(Date date);
inline Date add_days(Date d, int n) { return Date{d.days + n}; }
inline int days_between(Date from, Date to) { return to.days - from.days; }

// ---------------------------------------------------------------------------
// Attendance records

struct AttendanceRecord {
  std::string user_id;
  std::string movie_id;
  Date date;

  bool operator==(const AttendanceRecord&) const = default;
};

// Canonical order: date, then user_id, then movie_id.
bool record_less(const AttendanceRecord& a, const AttendanceRecord& b);

struct AttendanceLoad {
  std::vector<AttendanceRecord> records;
  size_t duplicates_dropped = 0;
};

// Sorts into canonical order and collapses identical triples.
AttendanceLoad normalize_records(std::vector<AttendanceRecord> records);

// Reads `user_id,movie_id,date`. Throws ParseError (with the 1-based line
// number) on malformed rows and EmptyDatasetError when no rows are present.
AttendanceLoad load_attendance(const std::filesystem::path& path);
void write_attendance(const std::filesystem::path& path,
                      std::span<const AttendanceRecord> records);

// ---------------------------------------------------------------------------
// Demographics

struct DemographicField {
  std::string name;
  std::vector<std::string> values;
};

struct DemographicsSchema {
  std::vector<DemographicField> fields;

  // Total one-hot width.
  size_t width() const;
  // Throws SchemaError on duplicate field names or values.
  void validate() const;
};

struct UserProfile {
  std::string user_id;
  // One entry per schema field; nullopt marks a missing value.
  std::vector<std::optional<std::string>> values;
};

// Schema file: rows `field,value`, categories in order; an optional
// `field,value` header row is skipped.
DemographicsSchema load_schema(const std::filesystem::path& path);
void write_schema(const std::filesystem::path& path,
                  const DemographicsSchema& schema);

// Demographics file: header `user_id,<field>...`; empty cell = missing.
// Columns are matched to schema fields by name.
std::vector<UserProfile> load_demographics(const std::filesystem::path& path,
                                           const DemographicsSchema& schema);
void write_demographics(const std::filesystem::path& path,
                        const DemographicsSchema& schema,
                        std::span<const UserProfile> profiles);

// One-hot encoding; a missing field leaves its block at zero. Throws
// SchemaError for values outside the schema.
Vec encode_demographics(const UserProfile& profile,
                        const DemographicsSchema& schema);

// ---------------------------------------------------------------------------
// Splits

struct SplitConfig {
  size_t n_coldstart = 50;
  double val_frac = 0.1;
  double test_frac = 0.1;
  uint64_t seed = 0;
};

struct DatasetSplit {
  std::vector<AttendanceRecord> train;
  std::vector<AttendanceRecord> validation;
  std::vector<AttendanceRecord> test;
  std::vector<AttendanceRecord> coldstart;
  std::set<std::string> coldstart_movies;
  // Latest record date in each partition (default Date{} when empty).
  Date train_as_of;
  Date validation_as_of;
  Date test_as_of;
  Date coldstart_as_of;
};

// Holds out every record of the `n_coldstart` movies whose first attendance
// is latest (ties: smaller movie_id first), then shuffles the remainder with
// `seed` into validation, test and train. Throws ConfigError when there are
// not enough movies or the fractions are outside (0, 0.5).
DatasetSplit split_dataset(std::span<const AttendanceRecord> records,
                           const SplitConfig& config);

// Writes/reads train.csv, validation.csv, test.csv, coldstart.csv.
void write_split(const std::filesystem::path& dir, const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Frequency and recency

struct FreqRec {
  int frequency = 0;
  int recency_days = 0;

  bool operator==(const FreqRec&) const = default;
};

// Counts the user's visits in [as_of - window_days, as_of), so strictly
// before as_of and at most window_days old, and the days since the latest of
// them. No such visit gives (0, window_days).
FreqRec compute_frequency_recency(std::span<const AttendanceRecord> records,
                                  std::string_view user_id, Date as_of,
                                  int window_days);

// ---------------------------------------------------------------------------
// Interned views used by training, evaluation and comps.

class IdTable {
 public:
  IdTable() = default;
  // Ids are assigned in sorted order of the (deduplicated) input.
  explicit IdTable(std::vector<std::string> ids);

  size_t size() const { return ids_.size(); }
  const std::string& id(uint32_t index) const { return ids_[index]; }
  std::optional<uint32_t> find(std::string_view id) const;
  // Throws LookupError for unknown ids.
  uint32_t at(std::string_view id) const;
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, uint32_t> index_;
};

// User and movie vocabularies shared by every partition of a dataset.
struct Catalog {
  IdTable users;
  IdTable movies;

  // Users and movies are the union of the record ids plus `extra_users`.
  static Catalog build(std::span<const AttendanceRecord> records,
                       std::span<const std::string> extra_users = {});
};

struct Visit {
  Date date;
  uint32_t movie;
};

// Read-only index over one set of records.
class AttendanceIndex {
 public:
  AttendanceIndex() = default;
  // Throws LookupError if a record id is not in the catalog.
  AttendanceIndex(const Catalog& catalog,
                  std::span<const AttendanceRecord> records);

  size_t num_users() const { return visits_.size(); }
  size_t num_movies() const { return attendees_.size(); }
  size_t num_records() const { return num_records_; }

  bool attended(uint32_t user, uint32_t movie) const {
    return pair_set_.count(key(user, movie)) != 0;
  }
  // Visits by date (ties by movie index).
  std::span<const Visit> visits(uint32_t user) const { return visits_[user]; }
  // Sorted distinct attendees.
  std::span<const uint32_t> attendees(uint32_t movie) const {
    return attendees_[movie];
  }
  std::optional<Date> first_date(uint32_t movie) const {
    return first_dates_[movie];
  }
  // Distinct (user, movie) pairs, sorted.
  std::span<const std::pair<uint32_t, uint32_t>> pairs() const { return pairs_; }
  // Movies with at least one record, ascending.
  std::span<const uint32_t> movies() const { return movies_; }

  FreqRec frequency_recency(uint32_t user, Date as_of, int window_days) const;

  // Distinct movies the user first attended strictly before `as_of`, other
  // than `exclude`, in ascending movie index. Overwrites `out`.
  void history(uint32_t user, Date as_of, std::optional<uint32_t> exclude,
               std::vector<uint32_t>& out) const;

 private:
  static uint64_t key(uint32_t u, uint32_t m) {
    return (static_cast<uint64_t>(u) << 32) | m;
  }

  size_t num_records_ = 0;
  std::vector<std::vector<Visit>> visits_;
  std::vector<std::vector<uint32_t>> attendees_;
  std::vector<std::optional<Date>> first_dates_;
  std::vector<std::pair<uint32_t, uint32_t>> pairs_;
  std::vector<uint32_t> movies_;
  std::unordered_set<uint64_t> pair_set_;
};

// ---------------------------------------------------------------------------
// Sampling

struct LabeledPair {
  uint32_t user = 0;
  uint32_t movie = 0;
  uint8_t label = 0;
  Date as_of;

  bool operator==(const LabeledPair&) const = default;
};

// Scoring date of each movie: its first attendance in `train`, falling back
// to its first attendance in `fallback` (the cold-start partition). Movies
// in neither stay nullopt.
std::vector<std::optional<Date>> movie_as_of_dates(
    const AttendanceIndex& train, const AttendanceIndex& fallback);

// batch_size/2 positives drawn uniformly (with replacement) from the distinct
// train pairs and batch_size/2 negatives pairing a uniform user from `users`
// with a uniform train movie that user never attended in train. Every pair
// is dated at the movie's first train attendance. Throws InvalidArgument for
// odd or < 2 batch sizes and SamplingError after 100 consecutive rejections.
std::vector<LabeledPair> sample_training_batch(const AttendanceIndex& train,
                                               std::span<const uint32_t> users,
                                               size_t batch_size,
                                               uint64_t seed);

// For every distinct (user, movie) pair of `partition` whose movie has an
// as-of date, emits the positive followed by `neg_per_pos` distinct users
// from `users` with no record of that movie in `all`. Throws EvaluationError
// naming the movie when too few users are eligible.
std::vector<LabeledPair> sample_eval_set(
    const AttendanceIndex& partition, const AttendanceIndex& all,
    std::span<const uint32_t> users,
    std::span<const std::optional<Date>> movie_as_of, size_t neg_per_pos,
    uint64_t seed, const IdTable* movie_names = nullptr);

}  // namespace merlin

#endif  // MERLIN_DATA_H_
