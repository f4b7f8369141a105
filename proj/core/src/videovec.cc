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

#include "merlin/videovec.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "merlin/errors.h"
#include "merlin/io.h"

namespace merlin {
namespace {

constexpr std::string_view kFrameMagic = "MRLF";
constexpr uint16_t kFrameVersion = 1;

FrameFeatureSet load_frames_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  FrameFeatureSet set;
  set.movie_id = path.stem().string();
  const auto lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv(lines[i]);
    Vec frame;
    frame.reserve(cells.size());
    for (auto c : cells) {
      try {
        frame.push_back(parse_double(trim(c), "frame value"));
      } catch (const ParseError& e) {
        throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": " +
                          e.what());
      }
    }
    if (set.frames.rows() > 0 && frame.size() != set.frames.cols()) {
      throw FormatError(path.string() + ":" + std::to_string(i + 1) +
                        ": frame has " + std::to_string(frame.size()) +
                        " values, expected " +
                        std::to_string(set.frames.cols()));
    }
    if (!all_finite(frame)) {
      throw FormatError(path.string() + ":" + std::to_string(i + 1) +
                        ": non-finite frame value");
    }
    set.frames.append_row(frame);
  }
  if (set.frames.rows() == 0) {
    throw FormatError(path.string() + ": no frames");
  }
  return set;
}

}  // namespace

VideoVector pool_frames(const FrameFeatureSet& frames, size_t max_frames) {
  if (max_frames == 0) throw InvalidArgument("max_frames must be >= 1");
  if (frames.frame_count() == 0) {
    throw EmptyDatasetError("movie '" + frames.movie_id + "' has no frames");
  }
  const size_t n = std::min(max_frames, frames.frame_count());
  VideoVector out{frames.movie_id, Vec(frames.frame_dim(), 0.0)};
  for (size_t t = 0; t < n; ++t) {
    const auto row = frames.frames.row(t);
    for (size_t i = 0; i < row.size(); ++i) out.values[i] += row[i];
  }
  for (double& v : out.values) v /= static_cast<double>(n);
  return out;
}

void save_frame_features(const std::filesystem::path& path,
                         const FrameFeatureSet& frames) {
  BinaryWriter w;
  w.raw(kFrameMagic);
  w.u16(kFrameVersion);
  w.short_string(frames.movie_id);
  w.u32(static_cast<uint32_t>(frames.frame_count()));
  w.u32(static_cast<uint32_t>(frames.frame_dim()));
  for (double v : frames.frames.values()) w.f32(static_cast<float>(v));
  write_file(path, w.bytes());
}

FrameFeatureSet load_frame_features(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_frames_csv(path);
  const std::string bytes = read_file(path);
  BinaryReader r(bytes);
  if (r.remaining() < 4 || r.raw(4) != kFrameMagic) {
    throw FormatError(path.string() + ": bad magic at byte offset 0");
  }
  const size_t version_at = r.offset();
  const uint16_t version = r.u16();
  if (version != kFrameVersion) {
    throw FormatError(path.string() + ": unsupported version " +
                      std::to_string(version) + " at byte offset " +
                      std::to_string(version_at));
  }
  FrameFeatureSet set;
  set.movie_id = r.short_string();
  const uint32_t count = r.u32();
  const size_t dim_at = r.offset();
  const uint32_t dim = r.u32();
  if (dim == 0) {
    throw FormatError(path.string() + ": zero frame dim at byte offset " +
                      std::to_string(dim_at));
  }
  const uint64_t expected = uint64_t{count} * dim * sizeof(float);
  if (r.remaining() != expected) {
    throw FormatError(path.string() + ": payload of " +
                      std::to_string(r.remaining()) + " bytes at byte offset " +
                      std::to_string(r.offset()) + ", expected " +
                      std::to_string(expected) + " for " +
                      std::to_string(count) + "x" + std::to_string(dim));
  }
  set.frames = Tensor2(count, dim);
  for (double& v : set.frames.values()) v = static_cast<double>(r.f32());
  if (!all_finite(set.frames.values())) {
    throw FormatError(path.string() + ": non-finite frame value");
  }
  return set;
}

void save_video_vectors(const std::filesystem::path& path,
                        const VideoTable& videos) {
  std::string out;
  for (const auto& [id, values] : videos) {
    out += id;
    for (double v : values) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  write_file(path, out);
}

VideoTable load_video_vectors(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  VideoTable table;
  size_t dim = 0;
  const auto lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv(lines[i]);
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (cells.size() < 2) throw FormatError(where + ": no values");
    Vec values;
    for (size_t c = 1; c < cells.size(); ++c) {
      values.push_back(parse_double(trim(cells[c]), "video vector value"));
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) throw FormatError(where + ": inconsistent dim");
    if (!table.emplace(std::string(trim(cells[0])), std::move(values)).second) {
      throw FormatError(where + ": duplicate movie id");
    }
  }
  return table;
}

}  // namespace merlin
