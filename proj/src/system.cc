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

#include "fusebench/system.h"

#include "fusebench/errors.h"

namespace fusebench {
namespace {

struct Forward {
  std::vector<FusedFeature> features;  // 1 (feature-level) or m
  std::vector<DenseArray> branch_probs;  // per head application
  DenseArray posterior;
};

const DownstreamHead& HeadFor(const FusionSystem& system, size_t branch) {
  return system.fusion.mode == FusionMode::kProbIndividual ? system.heads[branch]
                                                           : system.heads[0];
}

Forward RunForward(const FusionSystem& system,
                   std::span<const LayerStack> stacks) {
  Forward fw;
  if (!is_probability_level(system.fusion.mode)) {
    fw.features.push_back(fuse_features(stacks, system.fusion));
    fw.branch_probs.push_back(head_forward(system.heads[0], fw.features[0]));
    fw.posterior = fw.branch_probs[0];
    return fw;
  }
  fw.features = fuse_per_model(stacks, system.fusion);
  for (size_t i = 0; i < fw.features.size(); ++i) {
    fw.branch_probs.push_back(head_forward(HeadFor(system, i), fw.features[i]));
  }
  fw.posterior = fuse_probabilities(fw.branch_probs, system.fusion.mixture());
  return fw;
}

LossResult TargetLoss(const DenseArray& posterior, TaskKind task,
                      const Target& target) {
  return task == TaskKind::kUtteranceClassification
             ? cross_entropy_loss(posterior, target.class_id)
             : ctc_loss(posterior, target.transcript);
}

}  // namespace

FusionSystem make_system(TaskKind task, FusionMode mode,
                         std::span<const StackShape> shapes,
                         size_t label_space, bool p_learnable, Rng& rng) {
  if (shapes.empty()) throw ConfigError("make_system: no models");
  std::vector<size_t> layers;
  for (const auto& s : shapes) layers.push_back(s.layers);
  if (mode != FusionMode::kProbIndividual) {
    for (const auto& s : shapes) {
      if (s.dim != shapes.front().dim) {
        throw DimError(std::string(mode_name(mode)) +
                       " fusion needs a common feature width across models; "
                       "use prob-individual for mixed widths");
      }
    }
  }
  FusionSystem system;
  system.task = task;
  system.fusion = FusionParams::uniform(mode, std::move(layers), p_learnable);
  const HeadKind kind = head_kind_for(task);
  const size_t head_count =
      mode == FusionMode::kProbIndividual ? shapes.size() : 1;
  for (size_t k = 0; k < head_count; ++k) {
    system.heads.push_back(
        DownstreamHead::random(kind, shapes[k].dim, label_space, rng));
  }
  return system;
}

FusionSystem zeros_like(const FusionSystem& system) {
  FusionSystem z = system;
  for (auto& group : parameter_groups(z)) {
    std::fill(group.values.begin(), group.values.end(), 0.0);
  }
  return z;
}

std::vector<ParamGroup> parameter_groups(FusionSystem& system) {
  std::vector<ParamGroup> groups;
  auto& fusion = system.fusion;
  for (size_t i = 0; i < fusion.layer_logits.size(); ++i) {
    groups.push_back({"fusion.layer_logits[" + std::to_string(i) + "]",
                      fusion.layer_logits[i], false});
  }
  if (fusion.p_learnable) {
    groups.push_back({"fusion.model_logits", fusion.model_logits, false});
  }
  for (size_t k = 0; k < system.heads.size(); ++k) {
    const std::string prefix = "head[" + std::to_string(k) + "].";
    groups.push_back({prefix + "weight", system.heads[k].weight.data(), true});
    groups.push_back({prefix + "bias", system.heads[k].bias, true});
  }
  return groups;
}

size_t parameter_count(const FusionSystem& system) {
  size_t n = 0;
  for (const auto& g : parameter_groups(const_cast<FusionSystem&>(system))) {
    n += g.values.size();
  }
  return n;
}

DenseArray system_posterior(const FusionSystem& system,
                            std::span<const LayerStack> stacks) {
  return RunForward(system, stacks).posterior;
}

double target_loss(const DenseArray& posterior, TaskKind task,
                   const Target& target) {
  return TargetLoss(posterior, task, target).loss;
}

double loss_and_gradient(const FusionSystem& system,
                         std::span<const LayerStack> stacks,
                         const Target& target, FusionSystem& grad,
                         double scale) {
  const Forward fw = RunForward(system, stacks);
  const LossResult loss = TargetLoss(fw.posterior, system.task, target);
  const auto mixture = system.fusion.mixture();
  const bool prob = is_probability_level(system.fusion.mode);

  FusionUpstream upstream;
  for (size_t b = 0; b < fw.branch_probs.size(); ++b) {
    // dL/dP_b = p_b * dL/dP for probability fusion, dL/dP otherwise.
    DenseArray grad_branch = loss.grad_probs;
    if (prob) {
      for (double& v : grad_branch.data()) v *= mixture[b];
      upstream.mixture.push_back(dot(loss.grad_probs.data(), fw.branch_probs[b].data()));
    }
    const DenseArray grad_logits = softmax_rows_backward(fw.branch_probs[b], grad_branch);
    const size_t head_index =
        system.fusion.mode == FusionMode::kProbIndividual ? b : 0;
    HeadGradient hg = head_backward(system.heads[head_index], fw.features[b], grad_logits);
    auto& dst = grad.heads[head_index];
    axpy(scale, hg.weight.data(), dst.weight.data());
    axpy(scale, hg.bias, dst.bias);
    upstream.features.push_back(std::move(hg.feature));
  }

  const FusionGradient fg = fusion_backward(stacks, system.fusion, upstream);
  for (size_t i = 0; i < fg.layer_logits.size(); ++i) {
    axpy(scale, fg.layer_logits[i], grad.fusion.layer_logits[i]);
  }
  if (system.fusion.p_learnable) {
    axpy(scale, fg.model_logits, grad.fusion.model_logits);
  }
  return loss.loss;
}

}  // namespace fusebench
