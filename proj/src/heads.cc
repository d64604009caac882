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

#include "fusebench/heads.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void CheckPosterior(const DenseArray& probs, const char* who) {
  if (probs.rank() != 2 || probs.extent(0) == 0 || probs.extent(1) == 0) {
    throw ShapeError(std::string(who) + ": posterior must be [rows, C]");
  }
}

}  // namespace

HeadKind head_kind_for(TaskKind task) {
  return task == TaskKind::kUtteranceClassification ? HeadKind::kUtterance
                                                    : HeadKind::kFrameCtc;
}

DownstreamHead DownstreamHead::zeros(HeadKind kind, size_t input_dim,
                                     size_t output_dim) {
  if (input_dim == 0 || output_dim == 0) {
    throw ConfigError("head needs positive input and output sizes");
  }
  if (kind == HeadKind::kFrameCtc && output_dim < 2) {
    throw ConfigError("CTC head needs blank plus at least one token");
  }
  DownstreamHead head;
  head.kind = kind;
  head.weight = DenseArray({output_dim, input_dim});
  head.bias.assign(output_dim, 0.0);
  return head;
}

DownstreamHead DownstreamHead::random(HeadKind kind, size_t input_dim,
                                      size_t output_dim, Rng& rng) {
  DownstreamHead head = zeros(kind, input_dim, output_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& v : head.weight.data()) v = rng.uniform(-bound, bound);
  return head;
}

DenseArray head_logits(const DownstreamHead& head, const FusedFeature& feature) {
  if (feature.rank() != 2 || feature.extent(1) != head.input_dim()) {
    throw DimError("head expects feature width " +
                   std::to_string(head.input_dim()) + ", got " +
                   (feature.rank() == 2 ? std::to_string(feature.extent(1))
                                        : std::string("non-matrix input")));
  }
  const size_t classes = head.output_dim();
  if (head.kind == HeadKind::kUtterance) {
    const auto pooled = mean_pool(feature);
    return DenseArray({1, classes}, affine(pooled, head.weight, head.bias));
  }
  DenseArray out({feature.extent(0), classes});
  for (size_t t = 0; t < feature.extent(0); ++t) {
    const auto z = affine(feature.row(t), head.weight, head.bias);
    std::copy(z.begin(), z.end(), out.row(t).begin());
  }
  return out;
}

DenseArray head_forward(const DownstreamHead& head, const FusedFeature& feature) {
  return softmax_rows(head_logits(head, feature));
}

DenseArray softmax_rows(const DenseArray& logits) {
  DenseArray out(logits.shape());
  for (size_t r = 0; r < logits.extent(0); ++r) {
    const auto p = softmax_stable(logits.row(r));
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

DenseArray softmax_rows_backward(const DenseArray& probs,
                                 const DenseArray& grad_probs) {
  if (probs.shape() != grad_probs.shape()) {
    throw ShapeError("softmax_rows_backward: shape mismatch");
  }
  DenseArray out(probs.shape());
  for (size_t r = 0; r < probs.extent(0); ++r) {
    const auto g = softmax_backward(probs.row(r), grad_probs.row(r));
    std::copy(g.begin(), g.end(), out.row(r).begin());
  }
  return out;
}

LossResult cross_entropy_loss(const DenseArray& posterior, int class_id) {
  CheckPosterior(posterior, "cross_entropy_loss");
  if (posterior.extent(0) != 1) {
    throw ShapeError("cross_entropy_loss: expects one utterance-level row");
  }
  const size_t classes = posterior.extent(1);
  if (class_id < 0 || static_cast<size_t>(class_id) >= classes) {
    throw LabelError("class id " + std::to_string(class_id) +
                     " outside [0, " + std::to_string(classes) + ")");
  }
  const double target = posterior(0, class_id);
  LossResult result;
  result.loss = -std::log(target + kProbFloor);
  result.grad_probs = DenseArray({1, classes});
  result.grad_probs(0, class_id) = -1.0 / (target + kProbFloor);
  result.grad_logits = posterior;
  result.grad_logits(0, class_id) -= 1.0;
  return result;
}

size_t ctc_min_frames(std::span<const int> transcript) {
  size_t frames = transcript.size();
  for (size_t u = 1; u < transcript.size(); ++u) {
    if (transcript[u] == transcript[u - 1]) ++frames;
  }
  return frames;
}

LossResult ctc_loss(const DenseArray& posteriors,
                    std::span<const int> transcript) {
  CheckPosterior(posteriors, "ctc_loss");
  const size_t frames = posteriors.extent(0);
  const size_t classes = posteriors.extent(1);
  for (int tok : transcript) {
    if (tok <= kBlank || static_cast<size_t>(tok) >= classes) {
      throw LabelError("token id " + std::to_string(tok) + " outside [1, " +
                       std::to_string(classes) + ")");
    }
  }
  const size_t needed = ctc_min_frames(transcript);
  if (frames < needed) {
    throw AlignmentError("transcript of " + std::to_string(transcript.size()) +
                         " tokens needs at least " + std::to_string(needed) +
                         " frames, got " + std::to_string(frames));
  }

  // Blank-interleaved label: blank, y1, blank, y2, ..., blank.
  const size_t states = 2 * transcript.size() + 1;
  std::vector<int> ext(states, kBlank);
  for (size_t u = 0; u < transcript.size(); ++u) ext[2 * u + 1] = transcript[u];
  const auto skip_allowed = [&](size_t s) {
    return s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2];
  };

  DenseArray log_probs(posteriors.shape());
  for (size_t k = 0; k < posteriors.size(); ++k) {
    log_probs.data()[k] = std::log(std::max(posteriors.data()[k], kProbFloor));
  }

  DenseArray alpha({frames, states}, kNegInf);
  alpha(0, 0) = log_probs(0, ext[0]);
  if (states > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (size_t t = 1; t < frames; ++t) {
    for (size_t s = 0; s < states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (skip_allowed(s)) a = LogAdd(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kNegInf ? kNegInf : a + log_probs(t, ext[s]);
    }
  }
  double log_likelihood = alpha(frames - 1, states - 1);
  if (states > 1) log_likelihood = LogAdd(log_likelihood, alpha(frames - 1, states - 2));

  // beta(t, s): log-probability of emitting the rest of the label after
  // frame t, given state s at frame t.
  DenseArray beta({frames, states}, kNegInf);
  beta(frames - 1, states - 1) = 0.0;
  if (states > 1) beta(frames - 1, states - 2) = 0.0;
  for (size_t t = frames - 1; t-- > 0;) {
    for (size_t s = 0; s < states; ++s) {
      double b = beta(t + 1, s) + log_probs(t + 1, ext[s]);
      if (s + 1 < states) b = LogAdd(b, beta(t + 1, s + 1) + log_probs(t + 1, ext[s + 1]));
      if (s + 2 < states && skip_allowed(s + 2)) {
        b = LogAdd(b, beta(t + 1, s + 2) + log_probs(t + 1, ext[s + 2]));
      }
      beta(t, s) = b;
    }
  }

  LossResult result;
  result.loss = -log_likelihood;
  DenseArray occupancy({frames, classes});
  for (size_t t = 0; t < frames; ++t) {
    for (size_t s = 0; s < states; ++s) {
      const double lg = alpha(t, s) + beta(t, s);
      if (lg != kNegInf) occupancy(t, ext[s]) += std::exp(lg - log_likelihood);
    }
  }
  result.grad_probs = DenseArray(posteriors.shape());
  result.grad_logits = DenseArray(posteriors.shape());
  for (size_t k = 0; k < posteriors.size(); ++k) {
    const double p = posteriors.data()[k];
    const double occ = occupancy.data()[k];
    result.grad_probs.data()[k] = p >= kProbFloor ? -occ / p : 0.0;
    result.grad_logits.data()[k] = p - occ;
  }
  return result;
}

std::vector<int> ctc_greedy_decode(const DenseArray& posteriors) {
  CheckPosterior(posteriors, "ctc_greedy_decode");
  std::vector<int> out;
  int previous = kBlank;
  for (size_t t = 0; t < posteriors.extent(0); ++t) {
    const auto row = posteriors.row(t);
    const int best =
        static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != kBlank && best != previous) out.push_back(best);
    previous = best;
  }
  return out;
}

HeadGradient head_backward(const DownstreamHead& head,
                           const FusedFeature& feature,
                           const DenseArray& grad_logits) {
  const size_t classes = head.output_dim();
  const size_t dim = head.input_dim();
  const size_t frames = feature.extent(0);
  const size_t rows = head.kind == HeadKind::kUtterance ? 1 : frames;
  if (feature.rank() != 2 || feature.extent(1) != dim) {
    throw DimError("head_backward: feature width mismatch");
  }
  if (grad_logits.rank() != 2 || grad_logits.extent(0) != rows ||
      grad_logits.extent(1) != classes) {
    throw ShapeError("head_backward: logit gradient must be [" +
                     std::to_string(rows) + ", " + std::to_string(classes) + "]");
  }

  HeadGradient grad{DenseArray({classes, dim}), std::vector<double>(classes, 0.0),
                    FusedFeature({frames, dim})};
  if (head.kind == HeadKind::kUtterance) {
    const auto pooled = mean_pool(feature);
    const auto g = grad_logits.row(0);
    std::vector<double> grad_pooled(dim, 0.0);
    for (size_t c = 0; c < classes; ++c) {
      axpy(g[c], pooled, grad.weight.row(c));
      grad.bias[c] = g[c];
      axpy(g[c], head.weight.row(c), grad_pooled);
    }
    const double inv = 1.0 / static_cast<double>(frames);
    for (size_t t = 0; t < frames; ++t) axpy(inv, grad_pooled, grad.feature.row(t));
    return grad;
  }
  for (size_t t = 0; t < frames; ++t) {
    const auto g = grad_logits.row(t);
    const auto f = feature.row(t);
    for (size_t c = 0; c < classes; ++c) {
      axpy(g[c], f, grad.weight.row(c));
      grad.bias[c] += g[c];
      axpy(g[c], head.weight.row(c), grad.feature.row(t));
    }
  }
  return grad;
}

}  // namespace fusebench
