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

// A trainable fusion system: fusion parameters plus downstream head(s),
// with a single forward/backward path for all five modes and both tasks.

#ifndef FUSEBENCH_SYSTEM_H_
#define FUSEBENCH_SYSTEM_H_

#include <span>
#include <string>
#include <vector>

#include "fusebench/fusion.h"
#include "fusebench/heads.h"
#include "fusebench/stackio.h"

namespace fusebench {

// Training target of one utterance.
struct Target {
  int class_id = -1;          // classification
  std::vector<int> transcript;  // transcription
};

struct FusionSystem {
  TaskKind task = TaskKind::kUtteranceClassification;
  FusionParams fusion;
  // One head, or one per model for prob-individual.
  std::vector<DownstreamHead> heads;

  bool operator==(const FusionSystem&) const = default;
};

// Uniform fusion logits, heads initialized uniform(+-1/sqrt(d)) from rng in
// model order. Throws DimError when the mode needs a common d.
FusionSystem make_system(TaskKind task, FusionMode mode,
                         std::span<const StackShape> shapes,
                         size_t label_space, bool p_learnable, Rng& rng);

// Same shapes, all zeros; used as a gradient accumulator.
FusionSystem zeros_like(const FusionSystem& system);

// Mutable view of one trainable parameter block.
struct ParamGroup {
  std::string name;
  std::span<double> values;
  bool is_head = false;
};

// Stable order: fusion layer logits, model logits (if learnable), then
// each head's weight and bias.
std::vector<ParamGroup> parameter_groups(FusionSystem& system);
size_t parameter_count(const FusionSystem& system);

// Posterior [rows, C] for one utterance.
DenseArray system_posterior(const FusionSystem& system,
                            std::span<const LayerStack> stacks);

double target_loss(const DenseArray& posterior, TaskKind task,
                   const Target& target);

// Loss of one utterance; adds scale * dL/dtheta into grad (which must have
// the layout of zeros_like(system)).
double loss_and_gradient(const FusionSystem& system,
                         std::span<const LayerStack> stacks,
                         const Target& target, FusionSystem& grad,
                         double scale = 1.0);

}  // namespace fusebench

#endif  // FUSEBENCH_SYSTEM_H_
