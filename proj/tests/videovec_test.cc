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

#include <cstring>
#include <string>

#include "merlin/errors.h"
#include "merlin/io.h"
#include "merlin/random.h"
#include "merlin/videovec.h"
#include "test_util.h"

namespace merlin {
namespace {

using testing::scratch_dir;

FrameFeatureSet random_frames(const std::string& id, size_t count, size_t dim,
                              uint64_t seed) {
  Rng rng(seed);
  FrameFeatureSet f{id, Tensor2(count, dim)};
  // f32-representable values so binary round trips are exact.
  for (double& v : f.frames.values()) v = static_cast<float>(rng.normal());
  return f;
}

TEST(Pooling, HandExample) {
  FrameFeatureSet f{"m", Tensor2(3, 2, {1, 2, 3, 4, 5, 9})};
  EXPECT_EQ(pool_frames(f).values, (Vec{3, 5}));
  EXPECT_EQ(pool_frames(f, 2).values, (Vec{2, 3}));
  EXPECT_EQ(pool_frames(f, 1).values, (Vec{1, 2}));
  EXPECT_EQ(pool_frames(f).movie_id, "m");
}

TEST(Pooling, TruncatesAtMaxFrames) {
  const auto f = random_frames("m", 150, 3, 1);
  const auto head = FrameFeatureSet{"m", Tensor2(100, 3, Vec(f.frames.values().begin(),
                                                           f.frames.values().begin() + 300))};
  EXPECT_EQ(pool_frames(f).values, pool_frames(head).values);
}

TEST(Pooling, Errors) {
  EXPECT_THROW(pool_frames(FrameFeatureSet{"m", Tensor2(0, 4)}), EmptyDatasetError);
  EXPECT_THROW(pool_frames(random_frames("m", 3, 2, 1), 0), InvalidArgument);
}

TEST(FrameFile, BinaryRoundTripIsExact) {
  const auto dir = scratch_dir("frames");
  const auto f = random_frames("movie_7", 13, 5, 2);
  save_frame_features(dir / "x.mrlf", f);
  const auto back = load_frame_features(dir / "x.mrlf");
  EXPECT_EQ(back.movie_id, "movie_7");
  EXPECT_EQ(back.frames, f.frames);
}

TEST(FrameFile, LayoutMatchesDocumentedBytes) {
  const auto dir = scratch_dir("frames_layout");
  save_frame_features(dir / "x.mrlf", FrameFeatureSet{"ab", Tensor2(1, 2, {1.5, -2})});
  const std::string bytes = read_file(dir / "x.mrlf");
  // 4 magic + 2 version + 2 len + 2 id + 4 count + 4 dim + 8 payload.
  ASSERT_EQ(bytes.size(), 26u);
  EXPECT_EQ(bytes.substr(0, 4), "MRLF");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[6], 2);
  EXPECT_EQ(bytes.substr(8, 2), "ab");
  EXPECT_EQ(bytes[10], 1);
  EXPECT_EQ(bytes[14], 2);
  float first;
  std::memcpy(&first, bytes.data() + 18, 4);
  EXPECT_EQ(first, 1.5f);
}

TEST(FrameFile, CorruptInputIsFormatError) {
  const auto dir = scratch_dir("frames_bad");
  save_frame_features(dir / "ok.mrlf", random_frames("m", 4, 3, 3));
  const std::string bytes = read_file(dir / "ok.mrlf");
  write_file(dir / "trunc.mrlf", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_frame_features(dir / "trunc.mrlf"), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  write_file(dir / "magic.mrlf", bad);
  EXPECT_THROW(load_frame_features(dir / "magic.mrlf"), FormatError);
  write_file(dir / "tail.mrlf", bytes + "z");
  EXPECT_THROW(load_frame_features(dir / "tail.mrlf"), FormatError);
}

TEST(FrameFile, CsvInput) {
  const auto dir = scratch_dir("frames_csv");
  write_file(dir / "m42.csv", "1,2,3\n4,5,6\n");
  const auto f = load_frame_features(dir / "m42.csv");
  EXPECT_EQ(f.movie_id, "m42");
  EXPECT_EQ(f.frames, Tensor2(2, 3, {1, 2, 3, 4, 5, 6}));
  write_file(dir / "ragged.csv", "1,2,3\n4,5\n");
  EXPECT_THROW(load_frame_features(dir / "ragged.csv"), FormatError);
}

TEST(VideoTable, CsvRoundTripIsExact) {
  const auto dir = scratch_dir("videos");
  Rng rng(5);
  VideoTable t;
  for (const char* id : {"a", "b", "c"}) {
    Vec v(4);
    for (double& x : v) x = rng.normal() * 1e-3 + 1.0 / 3.0;
    t[id] = v;
  }
  save_video_vectors(dir / "v.csv", t);
  EXPECT_EQ(load_video_vectors(dir / "v.csv"), t);
}

}  // namespace
}  // namespace merlin
