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

// Small text and little-endian binary helpers shared by the file formats.

#ifndef MERLIN_IO_H_
#define MERLIN_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace merlin {

// Reads a whole file; throws IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes (truncate + write).
void write_file(const std::filesystem::path& path, std::string_view contents);

// Splits on '\n', dropping one trailing '\r' per line and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text);
// Splits one CSV line on ','. No quoting support.
std::vector<std::string_view> split_csv(std::string_view line);

// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);
// Strict parse of the full string; throws ParseError naming `what`.
double parse_double(std::string_view text, std::string_view what);
int64_t parse_int(std::string_view text, std::string_view what);

std::string_view trim(std::string_view s);

class BinaryWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void f32(float v);
  void f64(double v);
  void raw(std::string_view bytes) { bytes_.append(bytes); }
  // u16 length prefix + UTF-8 bytes.
  void short_string(std::string_view s);
  // u32 length prefix + UTF-8 bytes.
  void long_string(std::string_view s);

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

// Bounds-checked reader; every read past the end throws FormatError with the
// failing byte offset.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view bytes) : bytes_(bytes) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  float f32();
  double f64();
  std::string_view raw(size_t n);
  std::string short_string();
  std::string long_string();

  size_t offset() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n, const char* what) const;

  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace merlin

#endif  // MERLIN_IO_H_
