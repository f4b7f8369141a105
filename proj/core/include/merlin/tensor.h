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

#ifndef MERLIN_TENSOR_H_
#define MERLIN_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace merlin {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(size_t rows, size_t cols, std::vector<double> data);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  // Appends a row; the tensor must be empty or have matching column count.
  void append_row(std::span<const double> values);

  void fill(double v);

  bool operator==(const Tensor2&) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

// y = W x. Throws ShapeError on mismatch.
Vec matvec(const Tensor2& w, std::span<const double> x);
// y = W^T x.
Vec matvec_transposed(const Tensor2& w, std::span<const double> x);
// W += alpha * a b^T.
void add_outer(Tensor2& w, std::span<const double> a, std::span<const double> b,
               double alpha = 1.0);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x.
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_norm(std::span<const double> a);

bool all_finite(std::span<const double> values);

// Throws ShapeError naming `what` when the sizes differ.
void require_same_size(size_t expected, size_t actual, const char* what);

}  // namespace merlin

#endif  // MERLIN_TENSOR_H_
