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

#include "fusebench/numerics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

size_t ShapeProduct(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t e : shape) n *= e;
  return n;
}

}  // namespace

DenseArray::DenseArray(std::vector<size_t> shape, double fill)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), fill) {}

DenseArray::DenseArray(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != ShapeProduct(shape_)) {
    throw ShapeError("DenseArray: data length " + std::to_string(data_.size()) +
                     " does not match shape product " +
                     std::to_string(ShapeProduct(shape_)));
  }
}

std::span<double> DenseArray::row(size_t i) {
  const size_t w = shape_.back();
  return std::span<double>(data_).subspan(i * w, w);
}

std::span<const double> DenseArray::row(size_t i) const {
  const size_t w = shape_.back();
  return std::span<const double>(data_).subspan(i * w, w);
}

std::span<double> DenseArray::row(size_t i, size_t j) {
  return row(i * shape_[1] + j);
}

std::span<const double> DenseArray::row(size_t i, size_t j) const {
  return row(i * shape_[1] + j);
}

void DenseArray::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool DenseArray::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::vector<double> softmax_stable(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax_stable: empty input");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - peak);
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

double logsumexp(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("logsumexp: empty input");
  const double peak = *std::max_element(logits.begin(), logits.end());
  if (std::isinf(peak)) return peak;
  double total = 0.0;
  for (double v : logits) total += std::exp(v - peak);
  return peak + std::log(total);
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> grad_probs) {
  if (probs.size() != grad_probs.size()) {
    throw ShapeError("softmax_backward: size mismatch");
  }
  const double inner = dot(probs, grad_probs);
  std::vector<double> out(probs.size());
  for (size_t k = 0; k < probs.size(); ++k) {
    out[k] = probs[k] * (grad_probs[k] - inner);
  }
  return out;
}

std::vector<double> affine(std::span<const double> x, const DenseArray& w,
                           std::span<const double> b) {
  if (w.rank() != 2 || w.extent(1) != x.size() || w.extent(0) != b.size()) {
    throw ShapeError("affine: W must be [" + std::to_string(b.size()) + ", " +
                     std::to_string(x.size()) + "]");
  }
  std::vector<double> out(b.begin(), b.end());
  for (size_t r = 0; r < out.size(); ++r) {
    double acc = 0.0;
    const auto w_row = w.row(r);
    for (size_t c = 0; c < x.size(); ++c) acc += w_row[c] * x[c];
    out[r] = acc + b[r];
  }
  return out;
}

std::vector<double> mean_pool(const DenseArray& frames) {
  if (frames.rank() != 2) throw ShapeError("mean_pool: expected [T, d]");
  const size_t count = frames.extent(0);
  if (count == 0) throw DomainError("mean_pool: no frames");
  std::vector<double> out(frames.extent(1), 0.0);
  for (size_t t = 0; t < count; ++t) {
    const auto f = frames.row(t);
    for (size_t k = 0; k < out.size(); ++k) out[k] += f[k];
  }
  for (double& v : out) v /= static_cast<double>(count);
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw DomainError("Rng::below: empty range");
  // Rejection keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

Rng Rng::deserialize(const std::string& state) {
  Rng rng(0);
  std::istringstream is(state);
  is >> rng.engine_;
  if (!is) throw FormatError("Rng: malformed engine state");
  return rng;
}

}  // namespace fusebench
