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

#include "fusebench/fusion.h"

#include <cmath>
#include <numeric>
#include <string>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

size_t TotalLayers(const std::vector<size_t>& counts) {
  return std::accumulate(counts.begin(), counts.end(), size_t{0});
}

// Common frame count across models (FrameError otherwise).
size_t CommonFrames(std::span<const LayerStack> stacks) {
  const size_t frames = stacks.front().frame_count();
  for (size_t i = 1; i < stacks.size(); ++i) {
    if (stacks[i].frame_count() != frames) {
      throw FrameError("model " + std::to_string(i) + " has " +
                       std::to_string(stacks[i].frame_count()) +
                       " frames, model 0 has " + std::to_string(frames));
    }
  }
  return frames;
}

size_t CommonDim(std::span<const LayerStack> stacks, FusionMode mode) {
  const size_t dim = stacks.front().dim();
  for (size_t i = 1; i < stacks.size(); ++i) {
    if (stacks[i].dim() != dim) {
      throw DimError(std::string(mode_name(mode)) +
                     " fusion needs a common feature width; model " +
                     std::to_string(i) + " has d=" +
                     std::to_string(stacks[i].dim()) + ", model 0 has d=" +
                     std::to_string(dim));
    }
  }
  return dim;
}

// out += coeff * h_ij over all frames.
void AccumulateLayer(const LayerStack& stack, size_t layer, double coeff,
                     FusedFeature& out) {
  for (size_t t = 0; t < stack.frame_count(); ++t) {
    axpy(coeff, stack.frame(layer, t), out.row(t));
  }
}

// <G, h_ij> summed over frames and dims.
double LayerInner(const LayerStack& stack, size_t layer, const DenseArray& g) {
  double acc = 0.0;
  for (size_t t = 0; t < stack.frame_count(); ++t) {
    acc += dot(stack.frame(layer, t), g.row(t));
  }
  return acc;
}

void CheckUpstreamShape(const DenseArray& g, size_t frames, size_t dim) {
  if (g.rank() != 2 || g.extent(0) != frames || g.extent(1) != dim) {
    throw ShapeError("fusion_backward: upstream gradient must be [" +
                     std::to_string(frames) + ", " + std::to_string(dim) + "]");
  }
}

FusedFeature PerModelSum(const LayerStack& stack, std::span<const double> w) {
  FusedFeature out({stack.frame_count(), stack.dim()});
  for (size_t j = 0; j < w.size(); ++j) AccumulateLayer(stack, j, w[j], out);
  return out;
}

}  // namespace

std::string_view mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kNaive: return "naive";
    case FusionMode::kStructured: return "structured";
    case FusionMode::kProbShared: return "prob-shared";
    case FusionMode::kProbIndividual: return "prob-individual";
    case FusionMode::kLastLayer: return "last-layer";
  }
  return "?";
}

FusionMode parse_mode(std::string_view name) {
  std::string key(name);
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  for (FusionMode m : kAllModes) {
    if (key == mode_name(m)) return m;
  }
  throw ConfigError("unknown fusion mode '" + std::string(name) +
                    "' (valid: naive, structured, prob-shared, "
                    "prob-individual, last-layer)");
}

bool is_probability_level(FusionMode mode) {
  return mode == FusionMode::kProbShared || mode == FusionMode::kProbIndividual;
}

bool has_global_constraint(FusionMode mode) {
  return mode == FusionMode::kNaive || mode == FusionMode::kLastLayer;
}

FusionParams FusionParams::uniform(FusionMode mode,
                                   std::vector<size_t> layer_counts,
                                   bool p_learnable) {
  FusionParams params;
  params.mode = mode;
  params.layer_counts = std::move(layer_counts);
  const size_t m = params.layer_counts.size();
  switch (mode) {
    case FusionMode::kNaive:
      params.layer_logits.assign(1, std::vector<double>(TotalLayers(params.layer_counts), 0.0));
      break;
    case FusionMode::kLastLayer:
      params.layer_logits.assign(1, std::vector<double>(m, 0.0));
      break;
    default:
      for (size_t count : params.layer_counts) {
        params.layer_logits.emplace_back(count, 0.0);
      }
  }
  params.p_learnable = p_learnable;
  params.model_logits.assign(p_learnable ? m : 0, 0.0);
  params.fixed_p.assign(m, 1.0 / static_cast<double>(m));
  return params;
}

void FusionParams::check() const {
  const size_t m = model_count();
  if (m == 0) throw ConfigError("fusion needs at least one model");
  const auto bad = [&](const std::string& what) {
    throw ConfigError(std::string(mode_name(mode)) + " fusion: " + what);
  };
  switch (mode) {
    case FusionMode::kNaive:
      if (layer_logits.size() != 1 ||
          layer_logits[0].size() != TotalLayers(layer_counts)) {
        bad("expected one logit vector over all (model, layer) pairs");
      }
      break;
    case FusionMode::kLastLayer:
      if (layer_logits.size() != 1 || layer_logits[0].size() != m) {
        bad("expected one logit per model");
      }
      break;
    default:
      if (layer_logits.size() != m) bad("expected one logit vector per model");
      for (size_t i = 0; i < m; ++i) {
        if (layer_logits[i].size() != layer_counts[i]) {
          bad("model " + std::to_string(i) + " logit count mismatch");
        }
      }
  }
  if (p_learnable) {
    if (model_logits.size() != m) bad("expected one model logit per model");
  } else {
    if (fixed_p.size() != m) bad("fixed mixture must have one entry per model");
    double total = 0.0;
    for (double v : fixed_p) {
      if (v < 0.0) bad("fixed mixture has a negative entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) bad("fixed mixture must sum to 1");
  }
}

void FusionParams::check_against(std::span<const LayerStack> stacks) const {
  check();
  if (stacks.size() != model_count()) {
    throw ConfigError("fusion configured for " + std::to_string(model_count()) +
                      " models, got " + std::to_string(stacks.size()) +
                      " stacks");
  }
  for (size_t i = 0; i < stacks.size(); ++i) {
    if (stacks[i].layer_count() != layer_counts[i]) {
      throw ConfigError("model " + std::to_string(i) + " stack has " +
                        std::to_string(stacks[i].layer_count()) +
                        " layers, fusion configured for " +
                        std::to_string(layer_counts[i]));
    }
  }
}

std::vector<std::vector<double>> FusionParams::layer_weights() const {
  check();
  std::vector<std::vector<double>> w;
  for (size_t count : layer_counts) w.emplace_back(count, 0.0);
  switch (mode) {
    case FusionMode::kNaive: {
      const auto u = softmax_stable(layer_logits[0]);
      size_t flat = 0;
      for (auto& row : w) {
        for (double& v : row) v = u[flat++];
      }
      break;
    }
    case FusionMode::kLastLayer: {
      const auto v = softmax_stable(layer_logits[0]);
      for (size_t i = 0; i < w.size(); ++i) w[i].back() = v[i];
      break;
    }
    default:
      for (size_t i = 0; i < w.size(); ++i) w[i] = softmax_stable(layer_logits[i]);
  }
  return w;
}

std::vector<double> FusionParams::mixture() const {
  if (p_learnable) return softmax_stable(model_logits);
  return fixed_p;
}

FusedFeature fuse_naive(std::span<const LayerStack> stacks,
                        const FusionParams& params) {
  if (params.mode != FusionMode::kNaive) throw ConfigError("fuse_naive: mode mismatch");
  params.check_against(stacks);
  const size_t frames = CommonFrames(stacks);
  const size_t dim = CommonDim(stacks, params.mode);
  const auto u = softmax_stable(params.layer_logits[0]);
  FusedFeature out({frames, dim});
  size_t flat = 0;
  for (const auto& stack : stacks) {
    for (size_t j = 0; j < stack.layer_count(); ++j) {
      AccumulateLayer(stack, j, u[flat++], out);
    }
  }
  return out;
}

FusedFeature fuse_structured(std::span<const LayerStack> stacks,
                             const FusionParams& params) {
  if (params.mode != FusionMode::kStructured) {
    throw ConfigError("fuse_structured: mode mismatch");
  }
  params.check_against(stacks);
  const size_t frames = CommonFrames(stacks);
  const size_t dim = CommonDim(stacks, params.mode);
  const auto p = params.mixture();
  FusedFeature out({frames, dim});
  for (size_t i = 0; i < stacks.size(); ++i) {
    const auto inner =
        PerModelSum(stacks[i], softmax_stable(params.layer_logits[i]));
    axpy(p[i], inner.data(), out.data());
  }
  return out;
}

FusedFeature fuse_last_layer(std::span<const LayerStack> stacks,
                             const FusionParams& params) {
  if (params.mode != FusionMode::kLastLayer) {
    throw ConfigError("fuse_last_layer: mode mismatch");
  }
  params.check_against(stacks);
  const size_t frames = CommonFrames(stacks);
  const size_t dim = CommonDim(stacks, params.mode);
  const auto v = softmax_stable(params.layer_logits[0]);
  FusedFeature out({frames, dim});
  for (size_t i = 0; i < stacks.size(); ++i) {
    AccumulateLayer(stacks[i], stacks[i].layer_count() - 1, v[i], out);
  }
  return out;
}

FusedFeature fuse_features(std::span<const LayerStack> stacks,
                           const FusionParams& params) {
  switch (params.mode) {
    case FusionMode::kNaive: return fuse_naive(stacks, params);
    case FusionMode::kStructured: return fuse_structured(stacks, params);
    case FusionMode::kLastLayer: return fuse_last_layer(stacks, params);
    default:
      throw ConfigError(std::string(mode_name(params.mode)) +
                        " is a probability-level mode");
  }
}

std::vector<FusedFeature> fuse_per_model(std::span<const LayerStack> stacks,
                                         const FusionParams& params) {
  if (!is_probability_level(params.mode)) {
    throw ConfigError("fuse_per_model: needs a probability-level mode");
  }
  params.check_against(stacks);
  CommonFrames(stacks);
  if (params.mode == FusionMode::kProbShared) CommonDim(stacks, params.mode);
  std::vector<FusedFeature> out;
  out.reserve(stacks.size());
  for (size_t i = 0; i < stacks.size(); ++i) {
    out.push_back(
        PerModelSum(stacks[i], softmax_stable(params.layer_logits[i])));
  }
  return out;
}

DenseArray fuse_probabilities(std::span<const DenseArray> probs,
                              std::span<const double> p) {
  if (probs.empty() || probs.size() != p.size()) {
    throw ShapeError("fuse_probabilities: need one mixture weight per model");
  }
  for (const auto& q : probs) {
    if (q.shape() != probs.front().shape()) {
      throw DimError("fuse_probabilities: label spaces or row counts differ");
    }
  }
  DenseArray out(probs.front().shape());
  for (size_t i = 0; i < probs.size(); ++i) axpy(p[i], probs[i].data(), out.data());
  return out;
}

FusionGradient fusion_backward(std::span<const LayerStack> stacks,
                               const FusionParams& params,
                               const FusionUpstream& upstream) {
  params.check_against(stacks);
  const size_t m = stacks.size();
  const size_t frames = CommonFrames(stacks);
  FusionGradient grad;
  const bool prob = is_probability_level(params.mode);
  if (upstream.features.size() != (prob ? m : 1)) {
    throw ConfigError(std::string(mode_name(params.mode)) +
                      " backward: expected " + std::to_string(prob ? m : 1) +
                      " feature gradients, got " +
                      std::to_string(upstream.features.size()));
  }

  std::vector<double> grad_p(m, 0.0);
  switch (params.mode) {
    case FusionMode::kNaive: {
      const auto& g = upstream.features[0];
      CheckUpstreamShape(g, frames, CommonDim(stacks, params.mode));
      const auto u = softmax_stable(params.layer_logits[0]);
      std::vector<double> grad_u;
      grad_u.reserve(u.size());
      for (const auto& stack : stacks) {
        for (size_t j = 0; j < stack.layer_count(); ++j) {
          grad_u.push_back(LayerInner(stack, j, g));
        }
      }
      grad.layer_logits.push_back(softmax_backward(u, grad_u));
      break;
    }
    case FusionMode::kLastLayer: {
      const auto& g = upstream.features[0];
      CheckUpstreamShape(g, frames, CommonDim(stacks, params.mode));
      const auto v = softmax_stable(params.layer_logits[0]);
      std::vector<double> grad_v(m);
      for (size_t i = 0; i < m; ++i) {
        grad_v[i] = LayerInner(stacks[i], stacks[i].layer_count() - 1, g);
      }
      grad.layer_logits.push_back(softmax_backward(v, grad_v));
      break;
    }
    case FusionMode::kStructured: {
      const auto& g = upstream.features[0];
      CheckUpstreamShape(g, frames, CommonDim(stacks, params.mode));
      const auto p = params.mixture();
      for (size_t i = 0; i < m; ++i) {
        const auto w = softmax_stable(params.layer_logits[i]);
        std::vector<double> inner(w.size());
        for (size_t j = 0; j < w.size(); ++j) inner[j] = LayerInner(stacks[i], j, g);
        grad_p[i] = dot(w, inner);
        for (double& v : inner) v *= p[i];
        grad.layer_logits.push_back(softmax_backward(w, inner));
      }
      break;
    }
    case FusionMode::kProbShared:
    case FusionMode::kProbIndividual: {
      for (size_t i = 0; i < m; ++i) {
        const auto& g = upstream.features[i];
        CheckUpstreamShape(g, frames, stacks[i].dim());
        const auto w = softmax_stable(params.layer_logits[i]);
        std::vector<double> inner(w.size());
        for (size_t j = 0; j < w.size(); ++j) inner[j] = LayerInner(stacks[i], j, g);
        grad.layer_logits.push_back(softmax_backward(w, inner));
      }
      if (params.p_learnable) {
        if (upstream.mixture.size() != m) {
          throw ConfigError("probability fusion backward: learnable mixture "
                            "needs dL/dp for every model");
        }
        grad_p = upstream.mixture;
      }
      break;
    }
  }
  if (params.p_learnable && !has_global_constraint(params.mode)) {
    grad.model_logits = softmax_backward(params.mixture(), grad_p);
  } else if (params.p_learnable) {
    grad.model_logits.assign(m, 0.0);
  }
  return grad;
}

}  // namespace fusebench
