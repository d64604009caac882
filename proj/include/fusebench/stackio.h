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

// Layer stacks and corpus manifests.
//
// A layer stack holds the frozen hidden states of one upstream model for
// one utterance: values[j][t][k] is dimension k of frame t at layer j,
// where layer 0 is the pre-encoder feature and layers 1..l are the
// transformer outputs. On disk ("LSK1"):
//
//   bytes 0..3    magic "LSK1"
//   bytes 4..15   L, T, d as uint32 little-endian
//   bytes 16..    L*T*d float32 little-endian, row-major [layer, frame, dim]
//
// Manifests are JSON lines:
//   {"id": "utt0001", "label": 3, "stacks": ["a.lsk", "b.lsk"]}
//   {"id": "utt0002", "transcript": [4, 1, 7], "stacks": [...]}
// Optional "class_count" / "vocab_size" declare the label space; other
// fields are ignored. Relative stack paths resolve against the manifest's
// directory.

#ifndef FUSEBENCH_STACKIO_H_
#define FUSEBENCH_STACKIO_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fusebench/numerics.h"

namespace fusebench {

struct LayerStack {
  DenseArray values;  // [L, T, d]

  LayerStack() = default;
  explicit LayerStack(DenseArray v);
  LayerStack(size_t layers, size_t frames, size_t dim)
      : values({layers, frames, dim}) {}

  size_t layer_count() const { return values.extent(0); }
  size_t frame_count() const { return values.extent(1); }
  size_t dim() const { return values.extent(2); }
  std::span<const double> frame(size_t layer, size_t t) const {
    return values.row(layer, t);
  }

  bool operator==(const LayerStack&) const = default;
};

void save_stack(const LayerStack& stack, const std::filesystem::path& path);
LayerStack load_stack(const std::filesystem::path& path);

enum class TaskKind { kUtteranceClassification, kSequenceTranscription };

// "sid" / "asr".
std::string_view task_name(TaskKind kind);
TaskKind parse_task(std::string_view name);

struct UtteranceRecord {
  std::string id;
  std::optional<int> class_id;
  std::optional<std::vector<int>> transcript;
  std::vector<std::filesystem::path> stack_paths;
};

struct Manifest {
  TaskKind task_kind = TaskKind::kUtteranceClassification;
  // class_count for classification, vocab_size (blank included) for
  // transcription.
  size_t label_space = 0;
  std::vector<UtteranceRecord> records;

  size_t model_count() const {
    return records.empty() ? 0 : records.front().stack_paths.size();
  }
};

Manifest load_manifest(const std::filesystem::path& path);
// Stack paths are written relative to the manifest directory when they
// live beneath it.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct StackShape {
  size_t layers = 0;
  size_t dim = 0;
  bool operator==(const StackShape&) const = default;
};

struct CorpusReport {
  std::vector<StackShape> model_shapes;  // taken from the first record
  std::vector<size_t> frame_counts;      // one per record
  std::vector<std::string> errors;
  // False when the models disagree on d: only per-model-head probability
  // fusion can run then.
  bool feature_fusion_available = true;
};

// Opens every stack. Throws ValidationError listing every problem (frame
// mismatch within a record, inconsistent per-model shapes, unexpected
// dims); a clean corpus returns a report with an empty error list.
CorpusReport validate_corpus(
    const Manifest& manifest,
    const std::optional<std::vector<StackShape>>& expected = std::nullopt);

}  // namespace fusebench

#endif  // FUSEBENCH_STACKIO_H_
