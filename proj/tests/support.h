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

// Helpers and independent reference oracles shared by the unit tests and
// the acceptance binary. Nothing here calls the code it is used to check.

#ifndef FUSEBENCH_TESTS_SUPPORT_H_
#define FUSEBENCH_TESTS_SUPPORT_H_

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "fusebench/numerics.h"
#include "fusebench/stackio.h"
#include "fusebench/system.h"

namespace fusebench::testing {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("fusebench-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// FNV-1a over the file contents.
inline uint64_t file_checksum(const fs::path& path) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : read_bytes(path)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Checksum of every regular file below dir, visited in sorted path order.
inline uint64_t tree_checksum(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  uint64_t h = 1469598103934665603ull;
  for (const auto& f : files) {
    h ^= file_checksum(f);
    h *= 1099511628211ull;
  }
  return h;
}

inline LayerStack random_stack(Rng& rng, size_t layers, size_t frames, size_t dim,
                               double scale = 1.0) {
  LayerStack s(layers, frames, dim);
  for (double& v : s.values.data()) v = scale * rng.normal();
  return s;
}

inline std::vector<double> random_logits(Rng& rng, size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

// [rows, C] with each row a softmax of N(0, scale^2) logits, computed
// without the library.
inline DenseArray random_posterior(Rng& rng, size_t rows, size_t classes,
                                   double scale = 1.0) {
  DenseArray p({rows, classes});
  for (size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (size_t c = 0; c < classes; ++c) {
      p(r, c) = std::exp(scale * rng.normal());
      total += p(r, c);
    }
    for (size_t c = 0; c < classes; ++c) p(r, c) /= total;
  }
  return p;
}

// Collapse repeats, drop blanks (id 0).
inline std::vector<int> collapse_path(const std::vector<int>& path) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != 0) out.push_back(s);
    prev = s;
  }
  return out;
}

// p(y | posteriors): sum over all C^T frame paths that collapse to y.
inline double brute_force_ctc_probability(const DenseArray& posteriors,
                                          const std::vector<int>& transcript) {
  const size_t frames = posteriors.extent(0);
  const size_t classes = posteriors.extent(1);
  std::vector<int> path(frames, 0);
  double total = 0.0;
  while (true) {
    if (collapse_path(path) == transcript) {
      double prob = 1.0;
      for (size_t t = 0; t < frames; ++t) prob *= posteriors(t, static_cast<size_t>(path[t]));
      total += prob;
    }
    size_t t = 0;
    while (t < frames && static_cast<size_t>(++path[t]) == classes) path[t++] = 0;
    if (t == frames) break;
  }
  return total;
}

// Plain O(nm) Levenshtein distance.
inline size_t reference_edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::vector<size_t>> d(a.size() + 1, std::vector<size_t>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

// Central differences of the single-record loss for every trainable
// scalar, flattened in parameter_groups order.
inline std::vector<double> numeric_gradient(const FusionSystem& system,
                                            std::span<const LayerStack> stacks,
                                            const Target& target, double step = 1e-5) {
  FusionSystem probe = system;
  std::vector<double> out;
  for (auto& group : parameter_groups(probe)) {
    for (double& v : group.values) {
      const double saved = v;
      v = saved + step;
      const double up = target_loss(system_posterior(probe, stacks), probe.task, target);
      v = saved - step;
      const double down = target_loss(system_posterior(probe, stacks), probe.task, target);
      v = saved;
      out.push_back((up - down) / (2.0 * step));
    }
  }
  return out;
}

inline std::vector<double> flatten(FusionSystem& system) {
  std::vector<double> out;
  for (auto& group : parameter_groups(system)) {
    out.insert(out.end(), group.values.begin(), group.values.end());
  }
  return out;
}

// Central differences at step 1e-5 on an O(1) loss carry ~1e-11 of
// roundoff, so magnitudes under 1e-6 are compared on that absolute scale.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// A random tiny system for one mode and task, with logits moved off zero.
inline FusionSystem random_system(Rng& rng, TaskKind task, FusionMode mode,
                                  std::span<const StackShape> shapes, size_t label_space,
                                  bool p_learnable) {
  FusionSystem s = make_system(task, mode, shapes, label_space, p_learnable, rng);
  for (auto& group : parameter_groups(s)) {
    for (double& v : group.values) v = rng.normal();
  }
  return s;
}

}  // namespace fusebench::testing

#endif  // FUSEBENCH_TESTS_SUPPORT_H_
