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

#include "fusebench/synth.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

std::vector<double> UnitVector(size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> Bump(const SyntheticTaskSpec& spec, double strength, double peak) {
  std::vector<double> out(spec.layer_count);
  const double centre = peak * static_cast<double>(spec.layer_count - 1);
  for (size_t j = 0; j < out.size(); ++j) {
    const double z = (static_cast<double>(j) - centre) / spec.peak_width;
    out[j] = strength * std::exp(-0.5 * z * z);
  }
  return out;
}

// Frame-level token ids (0 = silence) and the transcript they spell.
struct Alignment {
  std::vector<int> frame_tokens;
  std::vector<int> transcript;
};

Alignment DrawAlignment(size_t frames, size_t vocab, Rng& rng) {
  Alignment a;
  const size_t count = 1 + rng.below(std::max<size_t>(frames / 4, 1));
  for (size_t u = 0; u < count; ++u) {
    a.transcript.push_back(1 + static_cast<int>(rng.below(vocab - 1)));
  }
  // Segments: gap_0, tok_1, gap_1, ..., tok_n, gap_n. Tokens need one
  // frame; a gap between equal tokens needs one frame.
  std::vector<size_t> length(2 * count + 1, 0);
  size_t used = 0;
  for (size_t u = 0; u < count; ++u) {
    length[2 * u + 1] = 1;
    ++used;
    if (u > 0 && a.transcript[u] == a.transcript[u - 1]) {
      length[2 * u] = 1;
      ++used;
    }
  }
  for (; used < frames; ++used) ++length[rng.below(length.size())];
  for (size_t s = 0; s < length.size(); ++s) {
    const int tok = s % 2 == 1 ? a.transcript[s / 2] : 0;
    a.frame_tokens.insert(a.frame_tokens.end(), length[s], tok);
  }
  return a;
}

void CheckPerModel(const std::vector<double>& v, size_t m, const char* name,
                   bool unit_interval) {
  if (v.size() != m) {
    throw ConfigError(std::string(name) + " needs one value per model");
  }
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0 || (unit_interval && x > 1.0)) {
      throw ConfigError(std::string(name) + (unit_interval ? " values must lie in [0, 1]"
                                                           : " values must be >= 0"));
    }
  }
}

}  // namespace

void SyntheticTaskSpec::validate() const {
  if (model_count == 0 || layer_count == 0 || dim == 0 || utterance_count == 0) {
    throw ConfigError("model_count, layer_count, dim and utterance_count must be >= 1");
  }
  if (class_count < 2) throw ConfigError("class_count must be >= 2");
  if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2 (blank plus a token)");
  if (min_frames == 0 || max_frames < min_frames) {
    throw ConfigError("frame range must satisfy 1 <= min_frames <= max_frames");
  }
  CheckPerModel(class_specialization, model_count, "class_specialization", true);
  CheckPerModel(token_specialization, model_count, "token_specialization", true);
  CheckPerModel(class_peak, model_count, "class_peak", true);
  CheckPerModel(token_peak, model_count, "token_peak", true);
  CheckPerModel(model_scale, model_count, "model_scale", false);
  CheckPerModel(model_offset, model_count, "model_offset", false);
  if (!(peak_width > 0.0)) throw ConfigError("peak_width must be > 0");
  if (!(noise_std >= 0.0) || !(utterance_noise_std >= 0.0)) {
    throw ConfigError("noise levels must be >= 0");
  }
  if (!(layer_noise_correlation >= 0.0 && layer_noise_correlation <= 1.0)) {
    throw ConfigError("layer_noise_correlation must lie in [0, 1]");
  }
  if (!(complementarity >= 0.0 && complementarity <= 1.0)) {
    throw ConfigError("complementarity must lie in [0, 1]");
  }
}

SyntheticTaskSpec SyntheticTaskSpec::from_config(const KeyValues& kv) {
  kv.reject_unknown({"model_count", "layer_count", "dim", "class_count", "vocab_size",
                     "utterance_count", "min_frames", "max_frames",
                     "class_specialization", "token_specialization", "class_peak",
                     "token_peak", "peak_width", "model_scale", "model_offset", "noise_std",
                     "utterance_noise_std", "layer_noise_correlation", "complementarity",
                     "seed"});
  SyntheticTaskSpec s;
  const auto size_key = [&](const char* key, size_t& field) {
    if (kv.has(key)) field = kv.integer(key);
  };
  const auto real_key = [&](const char* key, double& field) {
    if (kv.has(key)) field = kv.real(key);
  };
  const auto list_key = [&](const char* key, std::vector<double>& field) {
    if (kv.has(key)) field = kv.reals(key);
  };
  size_key("model_count", s.model_count);
  size_key("layer_count", s.layer_count);
  size_key("dim", s.dim);
  size_key("class_count", s.class_count);
  size_key("vocab_size", s.vocab_size);
  size_key("utterance_count", s.utterance_count);
  size_key("min_frames", s.min_frames);
  size_key("max_frames", s.max_frames);
  list_key("class_specialization", s.class_specialization);
  list_key("token_specialization", s.token_specialization);
  list_key("class_peak", s.class_peak);
  list_key("token_peak", s.token_peak);
  list_key("model_scale", s.model_scale);
  list_key("model_offset", s.model_offset);
  real_key("peak_width", s.peak_width);
  real_key("noise_std", s.noise_std);
  real_key("utterance_noise_std", s.utterance_noise_std);
  real_key("layer_noise_correlation", s.layer_noise_correlation);
  real_key("complementarity", s.complementarity);
  if (kv.has("seed")) s.seed = kv.integer("seed");
  s.validate();
  return s;
}

std::vector<double> class_profile(const SyntheticTaskSpec& spec, size_t model) {
  return Bump(spec, spec.class_specialization.at(model), spec.class_peak.at(model));
}

std::vector<double> token_profile(const SyntheticTaskSpec& spec, size_t model) {
  return Bump(spec, spec.token_specialization.at(model), spec.token_peak.at(model));
}

SyntheticCorpus generate_corpus(const SyntheticTaskSpec& spec,
                                const std::filesystem::path& out_dir) {
  spec.validate();
  const size_t m = spec.model_count;
  const size_t layers = spec.layer_count;
  const size_t dim = spec.dim;
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "stacks", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "stacks").string() + ": " + ec.message());

  Rng rng(spec.seed);
  std::vector<std::vector<std::vector<double>>> class_emb(m), token_emb(m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t c = 0; c < spec.class_count; ++c) class_emb[i].push_back(UnitVector(dim, rng));
    token_emb[i].emplace_back(dim, 0.0);  // blank / silence
    for (size_t k = 1; k < spec.vocab_size; ++k) token_emb[i].push_back(UnitVector(dim, rng));
  }
  std::vector<std::vector<std::vector<double>>> offset(m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < layers; ++j) {
      auto o = UnitVector(dim, rng);
      for (double& x : o) x *= spec.model_offset[i];
      offset[i].push_back(std::move(o));
    }
  }
  std::vector<std::vector<double>> a(m), b(m);
  for (size_t i = 0; i < m; ++i) {
    a[i] = class_profile(spec, i);
    b[i] = token_profile(spec, i);
  }
  const double shared = std::sqrt(spec.layer_noise_correlation);
  const double fresh = std::sqrt(1.0 - spec.layer_noise_correlation);

  SyntheticCorpus corpus;
  corpus.classification.task_kind = TaskKind::kUtteranceClassification;
  corpus.classification.label_space = spec.class_count;
  corpus.transcription.task_kind = TaskKind::kSequenceTranscription;
  corpus.transcription.label_space = spec.vocab_size;

  for (size_t u = 0; u < spec.utterance_count; ++u) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05zu", u);
    const int cls = static_cast<int>(rng.below(spec.class_count));
    const size_t frames = spec.min_frames + rng.below(spec.max_frames - spec.min_frames + 1);
    const Alignment align = DrawAlignment(frames, spec.vocab_size, rng);

    UtteranceRecord sid{id, cls, std::nullopt, {}};
    UtteranceRecord asr{id, std::nullopt, align.transcript, {}};
    for (size_t i = 0; i < m; ++i) {
      std::vector<double> utt_noise(dim);
      for (double& x : utt_noise) x = spec.utterance_noise_std * rng.normal();
      const double weak = 1.0 - spec.complementarity;
      const double class_gain = static_cast<size_t>(cls) % m == i ? 1.0 : weak;
      LayerStack stack(layers, frames, dim);
      for (size_t t = 0; t < frames; ++t) {
        std::vector<double> common(dim);
        for (double& x : common) x = rng.normal();
        const int tok_id = align.frame_tokens[t];
        const auto& tok = token_emb[i][tok_id];
        const double tok_gain =
            tok_id == 0 || static_cast<size_t>(tok_id - 1) % m == i ? 1.0 : weak;
        for (size_t j = 0; j < layers; ++j) {
          for (size_t k = 0; k < dim; ++k) {
            const double noise = spec.noise_std * (shared * common[k] + fresh * rng.normal());
            stack.values(j, t, k) = spec.model_scale[i] *
                (offset[i][j][k] + class_gain * a[i][j] * class_emb[i][cls][k] +
                 tok_gain * b[i][j] * tok[k] + utt_noise[k] + noise);
          }
        }
      }
      char name[48];
      std::snprintf(name, sizeof(name), "%s_m%zu.lsk", id, i);
      const auto path = out_dir / "stacks" / name;
      save_stack(stack, path);
      sid.stack_paths.push_back(path);
      asr.stack_paths.push_back(path);
    }
    corpus.classification.records.push_back(std::move(sid));
    corpus.transcription.records.push_back(std::move(asr));
  }
  corpus.classification_path = out_dir / "sid.jsonl";
  corpus.transcription_path = out_dir / "asr.jsonl";
  save_manifest(corpus.classification, corpus.classification_path);
  save_manifest(corpus.transcription, corpus.transcription_path);
  return corpus;
}

}  // namespace fusebench
