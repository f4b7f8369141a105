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

#include "merlin/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "merlin/errors.h"
#include "merlin/io.h"

namespace merlin {
namespace {

enum SeedTag : uint64_t {
  kProjectionTag = 1,
  kClusterTag,
  kUserTag,
  kMovieTag,
  kSequelTag,
  kAttendanceTag,
  kFrameTag,
};

Vec random_unit(size_t n, Rng& rng) {
  Vec v(n);
  double norm = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    norm = euclidean_norm(v);
  } while (norm == 0.0);
  for (double& x : v) x /= norm;
  return v;
}

void normalize(Vec& v) {
  const double norm = euclidean_norm(v);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
}

std::string padded_id(char prefix, size_t i, size_t count) {
  int width = 1;
  for (size_t c = count > 0 ? count - 1 : 0; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(i);
  const size_t pad = static_cast<size_t>(std::max(width, 4));
  if (digits.size() < pad) digits.insert(0, pad - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_users == 0 || n_movies == 0 || latent_dim == 0 || frame_dim == 0 ||
      n_clusters == 0 || frames_min == 0) {
    throw ConfigError("synth counts must be >= 1");
  }
  if (frame_dim < latent_dim) throw ConfigError("frame_dim must be >= latent_dim");
  if (frames_max < frames_min) throw ConfigError("frames_max must be >= frames_min");
  if (!(frame_noise >= 0.0) || !(taste_noise >= 0.0) || !(sequel_noise >= 0.0)) {
    throw ConfigError("noise levels must be non-negative");
  }
  if (!(upside > 0.0)) throw ConfigError("upside must be positive");
  if (!(heavy_downside_min >= 0.0 && heavy_downside_min <= heavy_downside_max &&
        casual_downside_min >= 0.0 && casual_downside_min <= casual_downside_max)) {
    throw ConfigError("downside ranges must be non-negative and ordered");
  }
  for (double p : {heavy_fraction, awareness, sequel_tail, sequel_prob,
                   demo_signal, demo_missing}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("synth probabilities and fractions must lie in [0, 1]");
    }
  }
  if (release_span_days < 1 || attendance_span_days < 1) {
    throw ConfigError("release and attendance spans must be >= 1 day");
  }
  parse_date(start_date);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "cosine operands");
  const double na = euclidean_norm(a);
  const double nb = euclidean_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double attendance_probability(const SyntheticUser& user,
                              const SyntheticMovie& movie) {
  const double c = cosine(user.taste, movie.latent);
  return 1.0 / (1.0 + std::exp(-4.0 * c));
}

bool decide_attendance(double p, double upside, double downside) {
  if (!(upside > 0.0)) throw InvalidArgument("upside must be positive");
  if (!(downside <= 0.0)) throw InvalidArgument("downside must be <= 0");
  const double d = -downside;
  return p > d / (upside + d);
}

Tensor2 make_frame_projection(const SynthConfig& config) {
  Rng rng(derive_seed(config.seed, {kProjectionTag}));
  Tensor2 p(config.frame_dim, config.latent_dim);
  for (double& v : p.values()) v = rng.normal();
  return p;
}

FrameFeatureSet gen_frame_features(const SyntheticMovie& movie,
                                   const SynthConfig& config,
                                   const Tensor2& projection, Rng& rng) {
  require_same_size(projection.cols(), movie.latent.size(), "movie latent");
  if (projection.rows() != config.frame_dim) {
    throw ShapeError("projection rows do not match frame_dim");
  }
  const Vec clean = matvec(projection, movie.latent);
  FrameFeatureSet set;
  set.movie_id = movie.movie_id;
  set.frames = Tensor2(movie.frame_count, config.frame_dim);
  for (size_t f = 0; f < movie.frame_count; ++f) {
    auto row = set.frames.row(f);
    for (size_t i = 0; i < row.size(); ++i) {
      const double v = clean[i] + (config.frame_noise > 0.0
                                       ? rng.normal(0.0, config.frame_noise)
                                       : 0.0);
      row[i] = static_cast<float>(v);
    }
  }
  return set;
}

DemographicsSchema synth_schema() {
  DemographicsSchema schema;
  schema.fields = {
      {"region", {"north", "south", "east", "west", "central", "coastal"}},
      {"age_band", {"18-24", "25-34", "35-44", "45-54", "55+"}},
      {"segment", {"a", "b", "c", "d"}},
  };
  return schema;
}

SyntheticWorld simulate(const SynthConfig& config) {
  config.validate();
  SyntheticWorld w;
  w.config = config;
  w.projection = make_frame_projection(config);
  w.schema = synth_schema();
  const Date start = parse_date(config.start_date);
  const size_t L = config.latent_dim;

  // Taste clusters, each with a preferred value per demographic field.
  std::vector<Vec> centers;
  std::vector<std::vector<size_t>> preferred;
  {
    Rng rng(derive_seed(config.seed, {kClusterTag}));
    for (size_t k = 0; k < config.n_clusters; ++k) {
      centers.push_back(random_unit(L, rng));
      std::vector<size_t> pref;
      for (const auto& field : w.schema.fields) {
        pref.push_back(rng.uniform_int(field.values.size()));
      }
      preferred.push_back(std::move(pref));
    }
  }

  for (size_t i = 0; i < config.n_users; ++i) {
    Rng rng(derive_seed(config.seed, {kUserTag, i}));
    SyntheticUser u;
    u.user_id = padded_id('u', i, config.n_users);
    u.cluster = rng.uniform_int(config.n_clusters);
    u.taste = centers[u.cluster];
    for (double& x : u.taste) x += rng.normal(0.0, config.taste_noise);
    normalize(u.taste);
    u.heavy = rng.bernoulli(config.heavy_fraction);
    u.upside = config.upside;
    u.downside = u.heavy ? -rng.uniform(config.heavy_downside_min,
                                        config.heavy_downside_max)
                         : -rng.uniform(config.casual_downside_min,
                                        config.casual_downside_max);
    u.profile.user_id = u.user_id;
    for (size_t f = 0; f < w.schema.fields.size(); ++f) {
      const auto& values = w.schema.fields[f].values;
      const bool missing = rng.bernoulli(config.demo_missing);
      const size_t v = rng.bernoulli(config.demo_signal)
                           ? preferred[u.cluster][f]
                           : rng.uniform_int(values.size());
      if (missing) {
        u.profile.values.push_back(std::nullopt);
      } else {
        u.profile.values.push_back(values[v]);
      }
    }
    w.profiles.push_back(u.profile);
    w.users.push_back(std::move(u));
  }

  {
    Rng rng(derive_seed(config.seed, {kMovieTag}));
    std::vector<int> offsets(config.n_movies);
    for (int& d : offsets) {
      d = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(config.release_span_days)));
    }
    std::sort(offsets.begin(), offsets.end());
    for (size_t j = 0; j < config.n_movies; ++j) {
      SyntheticMovie m;
      m.movie_id = padded_id('m', j, config.n_movies);
      m.latent = random_unit(L, rng);
      m.release_date = add_days(start, offsets[j]);
      m.frame_count = config.frames_min +
                      rng.uniform_int(config.frames_max - config.frames_min + 1);
      w.movies.push_back(std::move(m));
    }
  }

  {
    // Sequels in the release tail, parents drawn without replacement from
    // the releases before the tail.
    Rng rng(derive_seed(config.seed, {kSequelTag}));
    const size_t tail = static_cast<size_t>(
        std::llround(config.sequel_tail * static_cast<double>(config.n_movies)));
    const size_t first_tail = config.n_movies - std::min(tail, config.n_movies);
    std::vector<size_t> parents(first_tail);
    std::iota(parents.begin(), parents.end(), size_t{0});
    rng.shuffle(parents.begin(), parents.end());
    size_t next_parent = 0;
    for (size_t j = first_tail; j < config.n_movies; ++j) {
      if (!rng.bernoulli(config.sequel_prob) || next_parent >= parents.size()) continue;
      const SyntheticMovie& parent = w.movies[parents[next_parent++]];
      Vec latent = parent.latent;
      for (double& x : latent) x += rng.normal(0.0, config.sequel_noise);
      normalize(latent);
      w.movies[j].latent = std::move(latent);
      w.movies[j].parent_id = parent.movie_id;
    }
  }

  const double years = static_cast<double>(config.release_span_days) / 365.0;
  for (size_t i = 0; i < config.n_users; ++i) {
    Rng rng(derive_seed(config.seed, {kAttendanceTag, i}));
    SyntheticUser& u = w.users[i];
    size_t would_attend = 0;
    for (const auto& m : w.movies) {
      const double p = attendance_probability(u, m);
      const bool aware = rng.bernoulli(config.awareness);
      const int lag = static_cast<int>(
          rng.uniform_int(static_cast<uint64_t>(config.attendance_span_days)));
      if (!decide_attendance(p, u.upside, u.downside)) continue;
      ++would_attend;
      if (aware) {
        w.records.push_back({u.user_id, m.movie_id, add_days(m.release_date, lag)});
      }
    }
    u.base_rate = config.awareness * static_cast<double>(would_attend) / years;
  }
  std::sort(w.records.begin(), w.records.end(), record_less);

  for (size_t j = 0; j < w.movies.size(); ++j) {
    Rng rng(derive_seed(config.seed, {kFrameTag, j}));
    w.frames.push_back(gen_frame_features(w.movies[j], config, w.projection, rng));
  }
  return w;
}

VideoTable pool_world(const SyntheticWorld& world, size_t max_frames) {
  VideoTable table;
  for (const auto& f : world.frames) {
    table[f.movie_id] = pool_frames(f, max_frames).values;
  }
  return table;
}

void write_manifest(const std::filesystem::path& path,
                    const SyntheticWorld& world) {
  const size_t L = world.config.latent_dim;
  std::string out = "movie_id,release_date,parent_id,frame_count";
  for (size_t k = 0; k < L; ++k) out += ",latent" + std::to_string(k);
  out += "\n";
  for (const auto& m : world.movies) {
    out += m.movie_id + "," + format_date(m.release_date) + "," +
           m.parent_id.value_or("") + "," + std::to_string(m.frame_count);
    for (double v : m.latent) out += "," + format_double(v);
    out += "\n";
  }
  out += "user_id,U,D,base_rate,cohort,cluster";
  for (size_t k = 0; k < L; ++k) out += ",taste" + std::to_string(k);
  out += "\n";
  for (const auto& u : world.users) {
    out += u.user_id + "," + format_double(u.upside) + "," +
           format_double(u.downside) + "," + format_double(u.base_rate) + "," +
           (u.heavy ? "heavy" : "casual") + "," + std::to_string(u.cluster);
    for (double v : u.taste) out += "," + format_double(v);
    out += "\n";
  }
  write_file(path, out);
}

Manifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Manifest manifest;
  enum { kNone, kMovies, kUsers } section = kNone;
  size_t line_no = 0;
  const std::string where = path.string();
  for (auto line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string ctx = where + ":" + std::to_string(line_no);
    if (cells[0] == "movie_id") {
      section = kMovies;
      continue;
    }
    if (cells[0] == "user_id") {
      section = kUsers;
      continue;
    }
    if (section == kMovies) {
      if (cells.size() < 5) throw ParseError(ctx + ": movie row needs a latent");
      SyntheticMovie m;
      m.movie_id = std::string(cells[0]);
      m.release_date = parse_date(cells[1]);
      if (!cells[2].empty()) m.parent_id = std::string(cells[2]);
      m.frame_count = static_cast<size_t>(parse_int(cells[3], ctx));
      for (size_t k = 4; k < cells.size(); ++k) m.latent.push_back(parse_double(cells[k], ctx));
      manifest.movies.push_back(std::move(m));
    } else if (section == kUsers) {
      if (cells.size() < 7) throw ParseError(ctx + ": user row needs a taste");
      SyntheticUser u;
      u.user_id = std::string(cells[0]);
      u.upside = parse_double(cells[1], ctx);
      u.downside = parse_double(cells[2], ctx);
      u.base_rate = parse_double(cells[3], ctx);
      u.heavy = cells[4] == "heavy";
      u.cluster = static_cast<size_t>(parse_int(cells[5], ctx));
      for (size_t k = 6; k < cells.size(); ++k) u.taste.push_back(parse_double(cells[k], ctx));
      manifest.users.push_back(std::move(u));
    } else {
      throw ParseError(ctx + ": row before any manifest header");
    }
  }
  return manifest;
}

void write_world(const std::filesystem::path& dir, const SyntheticWorld& world) {
  std::filesystem::create_directories(dir / "frames");
  write_attendance(dir / "attendance.csv", world.records);
  write_schema(dir / "schema.csv", world.schema);
  write_demographics(dir / "demographics.csv", world.schema, world.profiles);
  for (const auto& f : world.frames) {
    save_frame_features(dir / "frames" / (f.movie_id + ".mrlf"), f);
  }
  write_manifest(dir / "manifest.csv", world);
}

std::string nearest_movie(const Manifest& manifest, size_t movie_index) {
  const auto& target = manifest.movies.at(movie_index).latent;
  double best = -2.0;
  std::string best_id;
  for (size_t j = 0; j < manifest.movies.size(); ++j) {
    if (j == movie_index) continue;
    const double c = cosine(target, manifest.movies[j].latent);
    if (c > best) {
      best = c;
      best_id = manifest.movies[j].movie_id;
    }
  }
  return best_id;
}

}  // namespace merlin
