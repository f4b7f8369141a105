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

#ifndef MERLIN_VIDEOVEC_H_
#define MERLIN_VIDEOVEC_H_

#include <filesystem>
#include <map>
#include <string>

#include "merlin/tensor.h"

namespace merlin {

inline constexpr size_t kDefaultFrameDim = 1024;
inline constexpr size_t kDefaultMaxFrames = 100;

// Per-second frame features of one trailer, one frame per row.
struct FrameFeatureSet {
  std::string movie_id;
  Tensor2 frames;

  size_t frame_dim() const { return frames.cols(); }
  size_t frame_count() const { return frames.rows(); }
};

struct VideoVector {
  std::string movie_id;
  Vec values;
};

// Mean of the first min(max_frames, frame_count) frames, in stored order.
// Throws InvalidArgument for max_frames == 0 and EmptyDatasetError when the
// set has no frames.
VideoVector pool_frames(const FrameFeatureSet& frames,
                        size_t max_frames = kDefaultMaxFrames);

// Binary layout, little-endian:
//   "MRLF" | u16 version=1 | u16 id_len | id bytes | u32 count | u32 dim |
//   count*dim f32, frame-major.
// Values are narrowed to f32 on write.
void save_frame_features(const std::filesystem::path& path,
                         const FrameFeatureSet& frames);

// Reads the binary format, or a `.csv` file with one comma-separated frame
// per row whose movie_id is the file stem. Throws FormatError (with the byte
// offset for binary input) on bad magic, truncation or inconsistent dims.
FrameFeatureSet load_frame_features(const std::filesystem::path& path);

// Pooled vectors keyed by movie_id, stored as CSV `movie_id,x0,x1,...`
// with round-trip exact decimal text.
using VideoTable = std::map<std::string, Vec>;
void save_video_vectors(const std::filesystem::path& path,
                        const VideoTable& videos);
VideoTable load_video_vectors(const std::filesystem::path& path);

}  // namespace merlin

#endif  // MERLIN_VIDEOVEC_H_
