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

#include "merlin/io.h"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "merlin/errors.h"

namespace merlin {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      text.empty()) {
    throw ParseError("invalid number for " + std::string(what) + ": '" +
                     std::string(text) + "'");
  }
  return v;
}

int64_t parse_int(std::string_view text, std::string_view what) {
  int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      text.empty()) {
    throw ParseError("invalid integer for " + std::string(what) + ": '" +
                     std::string(text) + "'");
  }
  return v;
}

namespace {

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

void BinaryWriter::u16(uint16_t v) { append_le(bytes_, v); }
void BinaryWriter::u32(uint32_t v) { append_le(bytes_, v); }
void BinaryWriter::u64(uint64_t v) { append_le(bytes_, v); }
void BinaryWriter::f32(float v) { append_le(bytes_, v); }
void BinaryWriter::f64(double v) { append_le(bytes_, v); }

void BinaryWriter::short_string(std::string_view s) {
  if (s.size() > UINT16_MAX) throw InvalidArgument("string too long for u16 prefix");
  u16(static_cast<uint16_t>(s.size()));
  raw(s);
}

void BinaryWriter::long_string(std::string_view s) {
  u32(static_cast<uint32_t>(s.size()));
  raw(s);
}

void BinaryReader::need(size_t n, const char* what) const {
  if (remaining() < n) {
    throw FormatError("truncated payload reading " + std::string(what) +
                      " at byte offset " + std::to_string(pos_));
  }
}

namespace {

template <typename T>
T read_le(std::string_view bytes, size_t pos) {
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  return v;
}

}  // namespace

uint8_t BinaryReader::u8() {
  need(1, "u8");
  return static_cast<uint8_t>(bytes_[pos_++]);
}

uint16_t BinaryReader::u16() {
  need(2, "u16");
  auto v = read_le<uint16_t>(bytes_, pos_);
  pos_ += 2;
  return v;
}

uint32_t BinaryReader::u32() {
  need(4, "u32");
  auto v = read_le<uint32_t>(bytes_, pos_);
  pos_ += 4;
  return v;
}

uint64_t BinaryReader::u64() {
  need(8, "u64");
  auto v = read_le<uint64_t>(bytes_, pos_);
  pos_ += 8;
  return v;
}

float BinaryReader::f32() {
  need(4, "f32");
  auto v = read_le<float>(bytes_, pos_);
  pos_ += 4;
  return v;
}

double BinaryReader::f64() {
  need(8, "f64");
  auto v = read_le<double>(bytes_, pos_);
  pos_ += 8;
  return v;
}

std::string_view BinaryReader::raw(size_t n) {
  need(n, "bytes");
  auto v = bytes_.substr(pos_, n);
  pos_ += n;
  return v;
}

std::string BinaryReader::short_string() {
  const uint16_t n = u16();
  return std::string(raw(n));
}

std::string BinaryReader::long_string() {
  const uint32_t n = u32();
  return std::string(raw(n));
}

}  // namespace merlin
