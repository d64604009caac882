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

// Fusion of frozen upstream layer stacks.
//
// Notation: model i = 0..m-1, layer j = 0..L_i-1, h_ij[t] the hidden vector
// of frame t. Weights are softmax-parametrized so every realized weight
// vector lies on its simplex:
//
//   naive            F = sum_ij u_ij h_ij       u = softmax over all (i, j)
//   structured       F = sum_i p_i sum_j w_ij h_ij     w_i = softmax per model
//   prob-shared      P = sum_i p_i Head(sum_j w_ij h_ij)
//   prob-individual  P = sum_i p_i Head_i(sum_j w_ij h_ij)
//   last-layer       F = sum_i v_i h_i,last     v = softmax over models
//
// p is either fixed (uniform by default) or softmax(model_logits).
// Upstream stacks are frozen: no gradient with respect to h is produced.

#ifndef FUSEBENCH_FUSION_H_
#define FUSEBENCH_FUSION_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fusebench/numerics.h"
#include "fusebench/stackio.h"

namespace fusebench {

enum class FusionMode {
  kNaive,
  kStructured,
  kProbShared,
  kProbIndividual,
  kLastLayer,
};

inline constexpr FusionMode kAllModes[] = {
    FusionMode::kNaive, FusionMode::kStructured, FusionMode::kProbShared,
    FusionMode::kProbIndividual, FusionMode::kLastLayer};

// "naive", "structured", "prob-shared", "prob-individual", "last-layer".
std::string_view mode_name(FusionMode mode);
// Accepts the names above (underscores also accepted); ConfigError lists
// the valid names otherwise.
FusionMode parse_mode(std::string_view name);

bool is_probability_level(FusionMode mode);
// True when the mode's logits are normalized jointly across models.
bool has_global_constraint(FusionMode mode);

// [T, d] input to a downstream head.
using FusedFeature = DenseArray;

struct FusionParams {
  FusionMode mode = FusionMode::kStructured;
  std::vector<size_t> layer_counts;  // L_i per model
  // naive: one vector of sum(L_i) logits, model-major.
  // last-layer: one vector of m logits.
  // otherwise: m vectors, vector i of length L_i.
  std::vector<std::vector<double>> layer_logits;
  bool p_learnable = false;
  std::vector<double> model_logits;  // m entries, used when p_learnable
  std::vector<double> fixed_p;       // m entries, used otherwise

  // All logits zero, fixed p uniform.
  static FusionParams uniform(FusionMode mode, std::vector<size_t> layer_counts,
                              bool p_learnable = false);

  size_t model_count() const { return layer_counts.size(); }

  // Realized weights w[i][j]. For naive and last-layer the whole table sums
  // to 1 (last-layer is zero outside the final layer); otherwise each row
  // sums to 1.
  std::vector<std::vector<double>> layer_weights() const;
  // Model mixture p (all ones / m for naive and last-layer, where it is
  // unused).
  std::vector<double> mixture() const;

  bool operator==(const FusionParams&) const = default;

  // ConfigError unless the logit layout matches mode and layer_counts.
  void check() const;
  // Additionally checks stack count and per-model layer counts.
  void check_against(std::span<const LayerStack> stacks) const;
};

// Gradients mirror the FusionParams layout.
struct FusionGradient {
  std::vector<std::vector<double>> layer_logits;
  std::vector<double> model_logits;  // empty unless p is learnable
};

FusedFeature fuse_naive(std::span<const LayerStack> stacks,
                        const FusionParams& params);
FusedFeature fuse_structured(std::span<const LayerStack> stacks,
                             const FusionParams& params);
FusedFeature fuse_last_layer(std::span<const LayerStack> stacks,
                             const FusionParams& params);
// Dispatches on params.mode; feature-level modes only.
FusedFeature fuse_features(std::span<const LayerStack> stacks,
                           const FusionParams& params);

// sum_j w_ij h_ij for every model i. prob-shared requires a common d,
// prob-individual does not.
std::vector<FusedFeature> fuse_per_model(std::span<const LayerStack> stacks,
                                         const FusionParams& params);

// sum_i p_i probs_i. Each input is [rows, C] (one row per utterance or per
// frame); all inputs must share that shape.
DenseArray fuse_probabilities(std::span<const DenseArray> probs,
                              std::span<const double> p);

// Upstream gradient for fusion_backward.
struct FusionUpstream {
  // Feature-level modes: one entry, dL/dF. Probability modes: m entries,
  // dL/dF_i for each model's fused feature.
  std::vector<DenseArray> features;
  // Probability modes with learnable p: dL/dp_i. Ignored otherwise (the
  // structured mode derives it from the stacks).
  std::vector<double> mixture;
};

FusionGradient fusion_backward(std::span<const LayerStack> stacks,
                               const FusionParams& params,
                               const FusionUpstream& upstream);

}  // namespace fusebench

#endif  // FUSEBENCH_FUSION_H_
