// Copyright 2026 The FuseBench Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense row-major arrays and the handful of deterministic primitives the
// fusion, head and training code build on. Every reduction here runs in
// index order so identical inputs give bit-identical outputs.

#ifndef FUSEBENCH_NUMERICS_H_
#define FUSEBENCH_NUMERICS_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fusebench {

class DenseArray {
 public:
  DenseArray() = default;
  explicit DenseArray(std::vector<size_t> shape, double fill = 0.0);
  // Throws ShapeError unless data.size() equals the product of extents.
  DenseArray(std::vector<size_t> shape, std::vector<double> data);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t extent(size_t axis) const { return shape_.at(axis); }
  size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator()(size_t i, size_t j) { return data_[i * shape_[1] + j]; }
  double operator()(size_t i, size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& operator()(size_t i, size_t j, size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double operator()(size_t i, size_t j, size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Innermost-axis slices: row(i) of a matrix, row(i, j) of a rank-3 array.
  std::span<double> row(size_t i);
  std::span<const double> row(size_t i) const;
  std::span<double> row(size_t i, size_t j);
  std::span<const double> row(size_t i, size_t j) const;

  void fill(double value);
  bool all_finite() const;

  bool operator==(const DenseArray&) const = default;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

std::vector<double> softmax_stable(std::span<const double> logits);
double logsumexp(std::span<const double> logits);

// Vector-Jacobian product of softmax: given p = softmax(z) and dL/dp,
// returns dL/dz = p * (dL/dp - <p, dL/dp>).
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> grad_probs);

// W x + b with W of shape [rows, cols].
std::vector<double> affine(std::span<const double> x, const DenseArray& w,
                           std::span<const double> b);

// Per-dimension mean over the rows of a [T, d] matrix.
std::vector<double> mean_pool(const DenseArray& frames);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Seeded generator with portable conversions. The standard distributions
// are implementation-defined, so uniform/normal are derived here directly
// from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; no cached second value.
  double normal();
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fusebench

#endif  // FUSEBENCH_NUMERICS_H_
