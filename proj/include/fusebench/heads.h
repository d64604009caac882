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

// Downstream heads and their losses.
//
// Both heads are a single affine map followed by a softmax. The utterance
// head mean-pools frames first and emits one distribution; the CTC head
// emits one distribution per frame over {blank = 0, tokens 1..C-1}.
// Posteriors are DenseArrays of shape [rows, C] with one row per utterance
// (utterance head) or per frame (CTC head).

#ifndef FUSEBENCH_HEADS_H_
#define FUSEBENCH_HEADS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "fusebench/fusion.h"
#include "fusebench/numerics.h"
#include "fusebench/stackio.h"

namespace fusebench {

inline constexpr int kBlank = 0;
// Floor applied inside logarithms of (possibly fused) probabilities.
inline constexpr double kProbFloor = 1e-12;

enum class HeadKind { kUtterance, kFrameCtc };

HeadKind head_kind_for(TaskKind task);

struct DownstreamHead {
  HeadKind kind = HeadKind::kUtterance;
  DenseArray weight;         // [C, d]
  std::vector<double> bias;  // C

  static DownstreamHead zeros(HeadKind kind, size_t input_dim,
                              size_t output_dim);
  // Weights uniform in +-1/sqrt(d), bias zero.
  static DownstreamHead random(HeadKind kind, size_t input_dim,
                               size_t output_dim, Rng& rng);

  size_t input_dim() const { return weight.extent(1); }
  size_t output_dim() const { return weight.extent(0); }

  bool operator==(const DownstreamHead&) const = default;
};

// Pre-softmax scores, [1, C] or [T, C].
DenseArray head_logits(const DownstreamHead& head, const FusedFeature& feature);
DenseArray head_forward(const DownstreamHead& head, const FusedFeature& feature);

DenseArray softmax_rows(const DenseArray& logits);
// Row-wise softmax VJP.
DenseArray softmax_rows_backward(const DenseArray& probs,
                                 const DenseArray& grad_probs);

struct LossResult {
  double loss = 0.0;
  // dL/dprobs; valid for any posterior, fused or not.
  DenseArray grad_probs;
  // dL/dlogits under the assumption that the posterior is a softmax of
  // those logits (single-head, unfused case).
  DenseArray grad_logits;
};

// loss = -ln(posterior[class_id] + 1e-12); grad_logits = posterior - onehot.
LossResult cross_entropy_loss(const DenseArray& posterior, int class_id);

// Negative log-likelihood of the transcript summed over all CTC alignments,
// via the log-space forward-backward recursion over the blank-interleaved
// label. Probabilities are floored at 1e-12 before taking logs.
// Throws LabelError for ids outside 1..C-1 and AlignmentError when the
// transcript needs more frames than available.
LossResult ctc_loss(const DenseArray& posteriors, std::span<const int> transcript);

// Frames needed to emit a transcript: its length plus one blank between
// every pair of equal neighbours.
size_t ctc_min_frames(std::span<const int> transcript);

// Best path: per-frame argmax (lowest index on ties), collapse repeats,
// drop blanks.
std::vector<int> ctc_greedy_decode(const DenseArray& posteriors);

struct HeadGradient {
  DenseArray weight;
  std::vector<double> bias;
  FusedFeature feature;
};

HeadGradient head_backward(const DownstreamHead& head,
                           const FusedFeature& feature,
                           const DenseArray& grad_logits);

}  // namespace fusebench

#endif  // FUSEBENCH_HEADS_H_
