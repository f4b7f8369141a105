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

#include "merlin/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "merlin/errors.h"

namespace merlin {

Tensor2::Tensor2(size_t rows, size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_same_size(rows * cols, data_.size(), "tensor data");
}

void Tensor2::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  require_same_size(cols_, values.size(), "appended row");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void Tensor2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void require_same_size(size_t expected, size_t actual, const char* what) {
  if (expected != actual) {
    throw ShapeError(std::string(what) + ": expected length " +
                     std::to_string(expected) + ", got " +
                     std::to_string(actual));
  }
}

Vec matvec(const Tensor2& w, std::span<const double> x) {
  require_same_size(w.cols(), x.size(), "matvec input");
  Vec y(w.rows(), 0.0);
  for (size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    double acc = 0.0;
    for (size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Vec matvec_transposed(const Tensor2& w, std::span<const double> x) {
  require_same_size(w.rows(), x.size(), "matvec_transposed input");
  Vec y(w.cols(), 0.0);
  for (size_t r = 0; r < w.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const auto row = w.row(r);
    for (size_t c = 0; c < row.size(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

void add_outer(Tensor2& w, std::span<const double> a, std::span<const double> b,
               double alpha) {
  require_same_size(w.rows(), a.size(), "outer product rows");
  require_same_size(w.cols(), b.size(), "outer product cols");
  for (size_t r = 0; r < w.rows(); ++r) {
    const double ar = alpha * a[r];
    if (ar == 0.0) continue;
    auto row = w.row(r);
    for (size_t c = 0; c < row.size(); ++c) row[c] += ar * b[c];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot operand");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(y.size(), x.size(), "axpy operand");
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "distance operand");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double euclidean_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace merlin
