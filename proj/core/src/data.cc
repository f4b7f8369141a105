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

#include "merlin/data.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "merlin/errors.h"
#include "merlin/io.h"
#include "merlin/random.h"

namespace merlin {

namespace chr = std::chrono;

Date parse_date(std::string_view text) {
  auto fail = [&]() -> Date {
    throw ParseError("invalid date '" + std::string(text) + "'");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return fail();
  for (size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (text[i] < '0' || text[i] > '9') return fail();
  }
  const int y = std::stoi(std::string(text.substr(0, 4)));
  const unsigned m = std::stoul(std::string(text.substr(5, 2)));
  const unsigned d = std::stoul(std::string(text.substr(8, 2)));
  const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) return fail();
  return Date{static_cast<int32_t>(
      chr::sys_days(ymd).time_since_epoch().count())};
}

std::string format_date(Date date) {
  const chr::year_month_day ymd{chr::sys_days{chr::days{date.days}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

// ---------------------------------------------------------------------------

bool record_less(const AttendanceRecord& a, const AttendanceRecord& b) {
  if (a.date != b.date) return a.date < b.date;
  if (a.user_id != b.user_id) return a.user_id < b.user_id;
  return a.movie_id < b.movie_id;
}

AttendanceLoad normalize_records(std::vector<AttendanceRecord> records) {
  std::sort(records.begin(), records.end(), record_less);
  const size_t before = records.size();
  records.erase(std::unique(records.begin(), records.end()), records.end());
  AttendanceLoad out;
  out.duplicates_dropped = before - records.size();
  out.records = std::move(records);
  return out;
}

namespace {

std::vector<AttendanceRecord> parse_attendance(std::string_view text,
                                               const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw EmptyDatasetError(source + ": empty attendance file");
  if (trim(lines[0]) != "user_id,movie_id,date") {
    throw ParseError(source + ":1: expected header 'user_id,movie_id,date'");
  }
  std::vector<AttendanceRecord> records;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string where = source + ":" + std::to_string(i + 1);
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 3) {
      throw ParseError(where + ": expected 3 columns, got " +
                       std::to_string(cells.size()));
    }
    AttendanceRecord r;
    r.user_id = std::string(trim(cells[0]));
    r.movie_id = std::string(trim(cells[1]));
    if (r.user_id.empty() || r.movie_id.empty()) {
      throw ParseError(where + ": empty user_id or movie_id");
    }
    try {
      r.date = parse_date(trim(cells[2]));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw EmptyDatasetError(source + ": no attendance records");
  return records;
}

}  // namespace

AttendanceLoad load_attendance(const std::filesystem::path& path) {
  return normalize_records(parse_attendance(read_file(path), path.string()));
}

void write_attendance(const std::filesystem::path& path,
                      std::span<const AttendanceRecord> records) {
  std::string out = "user_id,movie_id,date\n";
  for (const auto& r : records) {
    out += r.user_id;
    out += ',';
    out += r.movie_id;
    out += ',';
    out += format_date(r.date);
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------

size_t DemographicsSchema::width() const {
  size_t w = 0;
  for (const auto& f : fields) w += f.values.size();
  return w;
}

void DemographicsSchema::validate() const {
  std::set<std::string> names;
  for (const auto& f : fields) {
    if (!names.insert(f.name).second) {
      throw SchemaError("duplicate schema field '" + f.name + "'");
    }
    std::set<std::string> values(f.values.begin(), f.values.end());
    if (values.size() != f.values.size()) {
      throw SchemaError("duplicate category in field '" + f.name + "'");
    }
  }
}

DemographicsSchema load_schema(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  DemographicsSchema schema;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 2) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": expected 'field,value'");
    }
    const std::string field(trim(cells[0]));
    const std::string value(trim(cells[1]));
    if (i == 0 && field == "field" && value == "value") continue;
    if (field.empty() || value.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": empty field or value");
    }
    auto it = std::find_if(schema.fields.begin(), schema.fields.end(),
                           [&](const auto& f) { return f.name == field; });
    if (it == schema.fields.end()) {
      schema.fields.push_back({field, {}});
      it = schema.fields.end() - 1;
    }
    it->values.push_back(value);
  }
  schema.validate();
  return schema;
}

void write_schema(const std::filesystem::path& path,
                  const DemographicsSchema& schema) {
  std::string out = "field,value\n";
  for (const auto& f : schema.fields) {
    for (const auto& v : f.values) out += f.name + "," + v + "\n";
  }
  write_file(path, out);
}

std::vector<UserProfile> load_demographics(const std::filesystem::path& path,
                                           const DemographicsSchema& schema) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw EmptyDatasetError(path.string() + ": empty file");
  const auto header = split_csv(lines[0]);
  if (header.empty() || trim(header[0]) != "user_id") {
    throw ParseError(path.string() + ":1: header must start with user_id");
  }
  // column -> schema field index
  std::vector<size_t> column_field;
  for (size_t c = 1; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    auto it = std::find_if(schema.fields.begin(), schema.fields.end(),
                           [&](const auto& f) { return f.name == name; });
    if (it == schema.fields.end()) {
      throw SchemaError("demographics column '" + std::string(name) +
                        "' is not in the schema");
    }
    column_field.push_back(static_cast<size_t>(it - schema.fields.begin()));
  }
  std::vector<UserProfile> profiles;
  std::set<std::string> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv(lines[i]);
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": expected " + std::to_string(header.size()) +
                       " columns");
    }
    UserProfile p;
    p.user_id = std::string(trim(cells[0]));
    if (p.user_id.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": empty user_id");
    }
    if (!seen.insert(p.user_id).second) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": duplicate user '" + p.user_id + "'");
    }
    p.values.assign(schema.fields.size(), std::nullopt);
    for (size_t c = 1; c < cells.size(); ++c) {
      const auto v = trim(cells[c]);
      if (!v.empty()) p.values[column_field[c - 1]] = std::string(v);
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

void write_demographics(const std::filesystem::path& path,
                        const DemographicsSchema& schema,
                        std::span<const UserProfile> profiles) {
  std::string out = "user_id";
  for (const auto& f : schema.fields) out += "," + f.name;
  out += "\n";
  for (const auto& p : profiles) {
    out += p.user_id;
    for (const auto& v : p.values) {
      out += ",";
      if (v) out += *v;
    }
    out += "\n";
  }
  write_file(path, out);
}

Vec encode_demographics(const UserProfile& profile,
                        const DemographicsSchema& schema) {
  if (profile.values.size() != schema.fields.size()) {
    throw SchemaError("profile for '" + profile.user_id + "' has " +
                      std::to_string(profile.values.size()) +
                      " fields, schema has " +
                      std::to_string(schema.fields.size()));
  }
  Vec out(schema.width(), 0.0);
  size_t offset = 0;
  for (size_t f = 0; f < schema.fields.size(); ++f) {
    const auto& field = schema.fields[f];
    if (const auto& v = profile.values[f]) {
      auto it = std::find(field.values.begin(), field.values.end(), *v);
      if (it == field.values.end()) {
        throw SchemaError("value '" + *v + "' is not a category of field '" +
                          field.name + "'");
      }
      out[offset + static_cast<size_t>(it - field.values.begin())] = 1.0;
    }
    offset += field.values.size();
  }
  return out;
}

// ---------------------------------------------------------------------------

DatasetSplit split_dataset(std::span<const AttendanceRecord> records,
                           const SplitConfig& config) {
  if (!(config.val_frac > 0.0 && config.val_frac < 0.5) ||
      !(config.test_frac > 0.0 && config.test_frac < 0.5)) {
    throw ConfigError("val_frac and test_frac must lie in (0, 0.5)");
  }
  std::map<std::string, Date> first_date;
  for (const auto& r : records) {
    auto [it, inserted] = first_date.emplace(r.movie_id, r.date);
    if (!inserted && r.date < it->second) it->second = r.date;
  }
  if (config.n_coldstart >= first_date.size()) {
    throw ConfigError("n_coldstart=" + std::to_string(config.n_coldstart) +
                      " needs more than " + std::to_string(first_date.size()) +
                      " distinct movies");
  }
  std::vector<std::pair<Date, std::string>> order;
  for (const auto& [id, d] : first_date) order.emplace_back(d, id);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  DatasetSplit split;
  for (size_t i = 0; i < config.n_coldstart; ++i) {
    split.coldstart_movies.insert(order[i].second);
  }

  std::vector<AttendanceRecord> rest;
  for (const auto& r : records) {
    if (split.coldstart_movies.count(r.movie_id)) {
      split.coldstart.push_back(r);
    } else {
      rest.push_back(r);
    }
  }
  std::sort(rest.begin(), rest.end(), record_less);
  Rng rng(derive_seed(config.seed, {0x5b117}));
  rng.shuffle(rest.begin(), rest.end());
  const auto n = static_cast<double>(rest.size());
  const auto n_val = static_cast<size_t>(std::llround(config.val_frac * n));
  const auto n_test = static_cast<size_t>(std::llround(config.test_frac * n));
  for (size_t i = 0; i < rest.size(); ++i) {
    auto& target = i < n_val            ? split.validation
                   : i < n_val + n_test ? split.test
                                        : split.train;
    target.push_back(std::move(rest[i]));
  }
  auto finish = [](std::vector<AttendanceRecord>& part, Date& as_of) {
    std::sort(part.begin(), part.end(), record_less);
    as_of = part.empty() ? Date{} : part.back().date;
  };
  finish(split.train, split.train_as_of);
  finish(split.validation, split.validation_as_of);
  finish(split.test, split.test_as_of);
  finish(split.coldstart, split.coldstart_as_of);
  return split;
}

void write_split(const std::filesystem::path& dir, const DatasetSplit& split) {
  std::filesystem::create_directories(dir);
  write_attendance(dir / "train.csv", split.train);
  write_attendance(dir / "validation.csv", split.validation);
  write_attendance(dir / "test.csv", split.test);
  write_attendance(dir / "coldstart.csv", split.coldstart);
}

DatasetSplit load_split(const std::filesystem::path& dir) {
  auto load = [&](const char* name, std::vector<AttendanceRecord>& out,
                  Date& as_of, bool allow_empty) {
    const auto path = dir / name;
    const std::string text = read_file(path);
    try {
      out = normalize_records(parse_attendance(text, path.string())).records;
    } catch (const EmptyDatasetError&) {
      if (!allow_empty) throw;
      out.clear();
    }
    as_of = out.empty() ? Date{} : out.back().date;
  };
  DatasetSplit split;
  load("train.csv", split.train, split.train_as_of, false);
  load("validation.csv", split.validation, split.validation_as_of, true);
  load("test.csv", split.test, split.test_as_of, true);
  load("coldstart.csv", split.coldstart, split.coldstart_as_of, true);
  for (const auto& r : split.coldstart) split.coldstart_movies.insert(r.movie_id);
  return split;
}

// ---------------------------------------------------------------------------

FreqRec compute_frequency_recency(std::span<const AttendanceRecord> records,
                                  std::string_view user_id, Date as_of,
                                  int window_days) {
  FreqRec out{0, window_days};
  std::optional<Date> last;
  for (const auto& r : records) {
    if (r.user_id != user_id) continue;
    const int age = days_between(r.date, as_of);
    if (age <= 0 || age > window_days) continue;
    ++out.frequency;
    if (!last || r.date > *last) last = r.date;
  }
  if (last) out.recency_days = days_between(*last, as_of);
  return out;
}

// ---------------------------------------------------------------------------

IdTable::IdTable(std::vector<std::string> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  index_.reserve(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) {
    index_.emplace(ids_[i], static_cast<uint32_t>(i));
  }
}

std::optional<uint32_t> IdTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

uint32_t IdTable::at(std::string_view id) const {
  auto found = find(id);
  if (!found) throw LookupError("unknown id '" + std::string(id) + "'");
  return *found;
}

Catalog Catalog::build(std::span<const AttendanceRecord> records,
                       std::span<const std::string> extra_users) {
  std::vector<std::string> users(extra_users.begin(), extra_users.end());
  std::vector<std::string> movies;
  for (const auto& r : records) {
    users.push_back(r.user_id);
    movies.push_back(r.movie_id);
  }
  return Catalog{IdTable(std::move(users)), IdTable(std::move(movies))};
}

AttendanceIndex::AttendanceIndex(const Catalog& catalog,
                                 std::span<const AttendanceRecord> records)
    : num_records_(records.size()),
      visits_(catalog.users.size()),
      attendees_(catalog.movies.size()),
      first_dates_(catalog.movies.size()) {
  for (const auto& r : records) {
    const uint32_t u = catalog.users.at(r.user_id);
    const uint32_t m = catalog.movies.at(r.movie_id);
    visits_[u].push_back({r.date, m});
    if (pair_set_.insert(key(u, m)).second) {
      attendees_[m].push_back(u);
      pairs_.emplace_back(u, m);
    }
    auto& fd = first_dates_[m];
    if (!fd || r.date < *fd) fd = r.date;
  }
  for (auto& v : visits_) {
    std::sort(v.begin(), v.end(), [](const Visit& a, const Visit& b) {
      return a.date != b.date ? a.date < b.date : a.movie < b.movie;
    });
  }
  for (uint32_t m = 0; m < attendees_.size(); ++m) {
    std::sort(attendees_[m].begin(), attendees_[m].end());
    if (!attendees_[m].empty()) movies_.push_back(m);
  }
  std::sort(pairs_.begin(), pairs_.end());
}

FreqRec AttendanceIndex::frequency_recency(uint32_t user, Date as_of,
                                           int window_days) const {
  FreqRec out{0, window_days};
  std::optional<Date> last;
  for (const Visit& v : visits_[user]) {
    if (v.date >= as_of) break;
    const int age = days_between(v.date, as_of);
    if (age > window_days) continue;
    ++out.frequency;
    last = v.date;
  }
  if (last) out.recency_days = days_between(*last, as_of);
  return out;
}

void AttendanceIndex::history(uint32_t user, Date as_of,
                              std::optional<uint32_t> exclude,
                              std::vector<uint32_t>& out) const {
  out.clear();
  for (const Visit& v : visits_[user]) {
    if (v.date >= as_of) break;
    if (exclude && v.movie == *exclude) continue;
    out.push_back(v.movie);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

// ---------------------------------------------------------------------------

std::vector<std::optional<Date>> movie_as_of_dates(
    const AttendanceIndex& train, const AttendanceIndex& fallback) {
  std::vector<std::optional<Date>> out(train.num_movies());
  for (uint32_t m = 0; m < out.size(); ++m) {
    out[m] = train.first_date(m);
    if (!out[m] && m < fallback.num_movies()) out[m] = fallback.first_date(m);
  }
  return out;
}

std::vector<LabeledPair> sample_training_batch(const AttendanceIndex& train,
                                               std::span<const uint32_t> users,
                                               size_t batch_size,
                                               uint64_t seed) {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw InvalidArgument("batch_size must be even and >= 2, got " +
                          std::to_string(batch_size));
  }
  const auto pairs = train.pairs();
  const auto movies = train.movies();
  if (pairs.empty() || users.empty()) {
    throw SamplingError("cannot sample from an empty training partition");
  }
  Rng rng(seed);
  std::vector<LabeledPair> batch;
  batch.reserve(batch_size);
  const size_t half = batch_size / 2;
  for (size_t i = 0; i < half; ++i) {
    const auto& [u, m] = pairs[rng.uniform_int(pairs.size())];
    batch.push_back({u, m, 1, *train.first_date(m)});
  }
  for (size_t i = 0; i < half; ++i) {
    bool found = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const uint32_t u = users[rng.uniform_int(users.size())];
      const uint32_t m = movies[rng.uniform_int(movies.size())];
      if (train.attended(u, m)) continue;
      batch.push_back({u, m, 0, *train.first_date(m)});
      found = true;
      break;
    }
    if (!found) {
      throw SamplingError(
          "no negative pair found in 100 rejections; attendance matrix too "
          "dense");
    }
  }
  return batch;
}

std::vector<LabeledPair> sample_eval_set(
    const AttendanceIndex& partition, const AttendanceIndex& all,
    std::span<const uint32_t> users,
    std::span<const std::optional<Date>> movie_as_of, size_t neg_per_pos,
    uint64_t seed, const IdTable* movie_names) {
  if (neg_per_pos < 1) throw InvalidArgument("neg_per_pos must be >= 1");
  Rng rng(seed);
  std::vector<LabeledPair> out;
  std::vector<uint32_t> chosen;
  std::vector<uint32_t> eligible;
  std::vector<int64_t> eligible_count(movie_as_of.size(), -1);
  for (const auto& [u, m] : partition.pairs()) {
    if (m >= movie_as_of.size() || !movie_as_of[m]) continue;
    const Date as_of = *movie_as_of[m];
    out.push_back({u, m, 1, as_of});
    if (eligible_count[m] < 0) {
      eligible_count[m] = 0;
      for (uint32_t cand : users) eligible_count[m] += all.attended(cand, m) ? 0 : 1;
    }
    const auto n_eligible = static_cast<size_t>(eligible_count[m]);
    if (n_eligible < neg_per_pos) {
      const std::string name = movie_names != nullptr
                                   ? "'" + movie_names->id(m) + "'"
                                   : "index " + std::to_string(m);
      throw EvaluationError("movie " + name + " has only " +
                            std::to_string(n_eligible) +
                            " non-attending users, need " +
                            std::to_string(neg_per_pos));
    }
    chosen.clear();
    // Rejection sampling while eligible users are plentiful; enumerate
    // otherwise so the loop always terminates.
    if (n_eligible * 2 >= users.size()) {
      while (chosen.size() < neg_per_pos) {
        const uint32_t cand = users[rng.uniform_int(users.size())];
        if (all.attended(cand, m)) continue;
        if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) {
          continue;
        }
        chosen.push_back(cand);
      }
    } else {
      eligible.clear();
      for (uint32_t cand : users) {
        if (!all.attended(cand, m)) eligible.push_back(cand);
      }
      for (size_t i = 0; i < neg_per_pos; ++i) {
        const size_t j = i + rng.uniform_int(eligible.size() - i);
        std::swap(eligible[i], eligible[j]);
        chosen.push_back(eligible[i]);
      }
    }
    for (uint32_t neg : chosen) out.push_back({neg, m, 0, as_of});
  }
  return out;
}

}  // namespace merlin
