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

// Synthetic ground-truth world. Each user likes a movie with probability
// p = sigmoid(4 cos(taste, latent)) and, when aware of it, attends iff
// p U + (1 - p) D > 0. Trailer frames are noisy linear images of the latent.
// Some late releases are sequels whose latent sits next to an earlier
// movie's, which gives comp analysis a planted answer.

#ifndef MERLIN_SYNTH_H_
#define MERLIN_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "merlin/data.h"
#include "merlin/random.h"
#include "merlin/tensor.h"
#include "merlin/videovec.h"

namespace merlin {

struct SynthConfig {
  size_t n_users = 2000;
  size_t n_movies = 200;
  size_t latent_dim = 8;
  size_t frame_dim = 64;
  size_t frames_min = 50;
  size_t frames_max = 150;
  double frame_noise = 1.0;
  double taste_noise = 0.5;
  size_t n_clusters = 6;
  double heavy_fraction = 0.2;
  double upside = 1.0;
  // |D| ranges per cohort.
  double heavy_downside_min = 0.3;
  double heavy_downside_max = 1.0;
  double casual_downside_min = 2.0;
  double casual_downside_max = 8.0;
  // Probability a user considers any given movie.
  double awareness = 0.5;
  // Movies in the latest `sequel_tail` fraction of releases become sequels
  // of an earlier movie with probability `sequel_prob`.
  double sequel_tail = 0.4;
  double sequel_prob = 0.6;
  double sequel_noise = 0.12;
  // Probability a demographic field takes the cluster's preferred value,
  // and probability it is missing.
  double demo_signal = 0.7;
  double demo_missing = 0.05;
  int release_span_days = 1095;
  int attendance_span_days = 90;
  std::string start_date = "2015-01-01";
  uint64_t seed = 0;

  // Throws ConfigError on zero counts, negative noise, inverted ranges or
  // frame_dim < latent_dim.
  void validate() const;
};

struct SyntheticUser {
  std::string user_id;
  Vec taste;
  double upside = 1.0;
  double downside = -1.0;  // D < 0
  double base_rate = 0.0;  // expected attendances per year
  bool heavy = false;
  size_t cluster = 0;
  UserProfile profile;
};

struct SyntheticMovie {
  std::string movie_id;
  Vec latent;  // unit norm
  Date release_date;
  size_t frame_count = 0;
  std::optional<std::string> parent_id;
};

double cosine(std::span<const double> a, std::span<const double> b);

// sigmoid(4 cos(taste, latent)). ShapeError on mismatched dims.
double attendance_probability(const SyntheticUser& user,
                              const SyntheticMovie& movie);

// p > |D| / (U + |D|). InvalidArgument unless U > 0 and D <= 0.
bool decide_attendance(double p, double upside, double downside);

// frame_dim x latent_dim matrix with N(0, 1) entries, seeded from the config.
Tensor2 make_frame_projection(const SynthConfig& config);

// frame_count frames, each projection * latent + N(0, frame_noise^2) noise,
// rounded to f32 so the frames equal what the frame file stores.
FrameFeatureSet gen_frame_features(const SyntheticMovie& movie,
                                   const SynthConfig& config,
                                   const Tensor2& projection, Rng& rng);

struct SyntheticWorld {
  SynthConfig config;
  Tensor2 projection;
  std::vector<SyntheticUser> users;
  std::vector<SyntheticMovie> movies;  // in release order
  std::vector<AttendanceRecord> records;
  DemographicsSchema schema;
  std::vector<UserProfile> profiles;
  std::vector<FrameFeatureSet> frames;  // parallel to movies
};

// A pure function of the config, seed included.
SyntheticWorld simulate(const SynthConfig& config);

// The demographics fields used by simulate().
DemographicsSchema synth_schema();

// Pools every movie's frames into a video table.
VideoTable pool_world(const SyntheticWorld& world,
                      size_t max_frames = kDefaultMaxFrames);

// Ground truth. One file with a movies block then a users block, each
// starting with its own header line:
//   movie_id,release_date,parent_id,frame_count,latent0..
//   user_id,U,D,base_rate,cohort,cluster,taste0..
struct Manifest {
  std::vector<SyntheticMovie> movies;
  std::vector<SyntheticUser> users;
};
void write_manifest(const std::filesystem::path& path,
                    const SyntheticWorld& world);
Manifest load_manifest(const std::filesystem::path& path);

// Writes attendance.csv, demographics.csv, schema.csv, frames/<id>.mrlf and
// manifest.csv under `dir`.
void write_world(const std::filesystem::path& dir, const SyntheticWorld& world);

// Latent-cosine nearest other movie.
std::string nearest_movie(const Manifest& manifest, size_t movie_index);

}  // namespace merlin

#endif  // MERLIN_SYNTH_H_
