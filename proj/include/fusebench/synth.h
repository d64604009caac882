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

// Synthetic corpora with complementary upstream models.
//
// Each utterance carries a class id (speaker-like) and a token sequence
// (content-like) aligned to frames. Model i encodes them at layer j as
//
//   h_ij[t] = scale_i * ( o_ij + a_ij * E_i[class] + b_ij * G_i[token_t]
//                         + utterance_noise_i + frame_noise_ijt )
//
// where o_ij is a fixed per-layer offset, E_i, G_i are fixed random unit
// embeddings drawn per model (so the
// models live in unrelated coordinate systems), a_ij / b_ij are the model's
// class / token specialization times a Gaussian bump over layers, and
// frames aligned to no token (silence) carry no token term. With
// complementarity > 0 each model encodes only its own share of the labels
// at full strength.

#ifndef FUSEBENCH_SYNTH_H_
#define FUSEBENCH_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fusebench/kvconfig.h"
#include "fusebench/stackio.h"

namespace fusebench {

struct SyntheticTaskSpec {
  size_t model_count = 2;
  size_t layer_count = 13;
  size_t dim = 16;
  size_t class_count = 20;
  size_t vocab_size = 12;  // blank (0) included
  size_t utterance_count = 400;
  size_t min_frames = 20;
  size_t max_frames = 40;
  // Per model, each in [0, 1].
  std::vector<double> class_specialization = {0.3, 0.3};
  std::vector<double> token_specialization = {1.0, 1.0};
  // Bump centres as a fraction of the layer range, per model.
  std::vector<double> class_peak = {0.85, 0.4};
  std::vector<double> token_peak = {0.6, 0.5};
  double peak_width = 3.0;  // in layers
  // Overall magnitude of each model's hidden states.
  std::vector<double> model_scale = {1.0, 1.5};
  // Norm of a fixed random offset added to every frame of each layer, per
  // model (upstream features are not zero-mean).
  std::vector<double> model_offset = {0.0, 0.0};
  double noise_std = 0.5;            // per frame, per layer
  double utterance_noise_std = 0.0;  // per utterance, shared over frames
  // Fraction of frame-noise variance shared by all layers of a model.
  double layer_noise_correlation = 0.0;
  // Labels are dealt round-robin to the models (label k belongs to model
  // k mod m; token k to model (k-1) mod m). A model encodes labels it does
  // not own with strength scaled by 1 - complementarity.
  double complementarity = 0.7;
  uint64_t seed = 1;

  // ConfigError when any invariant fails.
  void validate() const;
  // Keys mirror the field names; absent keys keep their defaults.
  static SyntheticTaskSpec from_config(const KeyValues& kv);
};

struct SyntheticCorpus {
  Manifest classification;   // "sid.jsonl"
  Manifest transcription;    // "asr.jsonl"
  std::filesystem::path classification_path;
  std::filesystem::path transcription_path;
};

// Deterministic in the spec: the same spec writes byte-identical files.
// Stacks go to out_dir/stacks/, one per (utterance, model); both manifests
// reference the same stacks.
SyntheticCorpus generate_corpus(const SyntheticTaskSpec& spec,
                                const std::filesystem::path& out_dir);

// Signal strengths for one model: a_ij (class) and b_ij (token) over j.
std::vector<double> class_profile(const SyntheticTaskSpec& spec, size_t model);
std::vector<double> token_profile(const SyntheticTaskSpec& spec, size_t model);

}  // namespace fusebench

#endif  // FUSEBENCH_SYNTH_H_
