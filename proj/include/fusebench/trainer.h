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

// Deterministic training of fusion weights and heads over frozen stacks.
//
// Only the fusion logits, the optional model logits and the head
// parameters are updated; stacks are read once and never written. Given a
// seed the whole run is bit-reproducible: initialization and shuffling draw
// from one seeded engine, per-record gradients are reduced in record order
// whatever the thread count, and every reduction is sequential.

#ifndef FUSEBENCH_TRAINER_H_
#define FUSEBENCH_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusebench/evalreport.h"
#include "fusebench/kvconfig.h"
#include "fusebench/system.h"

namespace fusebench {

enum class OptimizerKind { kSgd, kAdam };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  FusionMode mode = FusionMode::kStructured;
  TaskKind task = TaskKind::kUtteranceClassification;
  uint64_t steps = 2000;
  uint64_t batch_size = 8;
  double lr_head = 0.1;
  double lr_fusion = 0.1;
  bool p_learnable = false;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 0;
  uint64_t eval_every = 200;
  // Manifest model indices to fuse, in order; empty means all.
  std::vector<uint64_t> models;

  // 0.1 / 0.1 for sid, 1e-4 / 1e-4 for asr; everything else as above.
  static TrainConfig defaults(TaskKind task);
  // ConfigError on zero steps/batch, negative or non-finite rates, bad betas.
  void validate() const;
  // Overrides the fields named in kv. Keys: mode, task, steps, batch_size,
  // lr_head, lr_fusion, p_learnable, optimizer, beta1, beta2, epsilon, seed,
  // eval_every, models. Unknown keys are a ConfigError.
  void apply(const KeyValues& kv);

  bool operator==(const TrainConfig&) const = default;
};

// Examples in manifest order; the last fifth is held out.
struct Corpus {
  TaskKind task = TaskKind::kUtteranceClassification;
  size_t label_space = 0;
  std::vector<StackShape> shapes;  // per selected model
  std::vector<Example> examples;
  size_t train_count = 0;

  std::span<const Example> train() const {
    return std::span<const Example>(examples).first(train_count);
  }
  std::span<const Example> heldout() const {
    return std::span<const Example>(examples).subspan(train_count);
  }
};

// Validates the manifest's stacks and loads the selected models (all when
// models is empty).
Corpus load_corpus(const Manifest& manifest, std::span<const uint64_t> models = {});

struct OptimizerState {
  uint64_t updates = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  bool operator==(const OptimizerState&) const = default;
};

struct TrainState {
  TrainConfig config;
  size_t label_space = 0;
  std::vector<StackShape> shapes;
  FusionSystem system;
  OptimizerState optimizer;
  uint64_t step = 0;
  Rng rng{0};
  std::vector<uint64_t> order;  // current shuffled pass over training indices
  uint64_t cursor = 0;
};

struct MetricRow {
  uint64_t step = 0;
  double loss = 0.0;  // mean held-out loss
  std::string metric_name;
  double metric_value = 0.0;
};

// ConfigError / DimError before any step when the corpus cannot be trained
// in the configured mode.
TrainState init_training(const TrainConfig& config, const Corpus& corpus);

// Next batch of training indices; reshuffles when a pass is exhausted.
std::vector<uint64_t> next_batch(TrainState& state, size_t train_count);

// Mean-over-batch loss, one optimizer update. TrainingError on a
// non-finite loss, naming the step and the batch's record ids.
double train_step(TrainState& state, const Corpus& corpus,
                  std::span<const uint64_t> batch);

// Applies one optimizer update with the given gradient.
void apply_update(TrainState& state, const FusionSystem& grad);

// Mean-over-batch loss and gradient, reduced in record order.
double batch_gradient(const FusionSystem& system, const Corpus& corpus,
                      std::span<const uint64_t> batch, FusionSystem& grad);

// Runs `steps` more steps. Evaluates on the held-out split whenever the
// step counter hits a multiple of eval_every, and after the last step.
std::vector<MetricRow> run_training(TrainState& state, const Corpus& corpus,
                                    uint64_t steps);

struct TrainResult {
  TrainState state;
  std::vector<MetricRow> trace;
};

TrainResult train(const TrainConfig& config, const Corpus& corpus);

// Continues a restored run until `total_steps` steps have been taken.
std::vector<MetricRow> resume_training(TrainState& state, const Corpus& corpus,
                                       uint64_t total_steps);

// Checkpoint "FCK1": magic, uint32 version, uint64 payload length, then the
// canonical little-endian serialization of every TrainState field.
std::string serialize_checkpoint(const TrainState& state);
TrainState deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

// Trace CSV: step,loss,metric_name,metric_value.
void write_trace_csv(std::span<const MetricRow> rows, const std::filesystem::path& path);

// FUSEBENCH_THREADS, default 1.
size_t worker_threads();

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Larger groups are checked on a seeded random subsample.
  size_t max_per_group = 200;
  uint64_t seed = 0;
  // Multiplies the analytic gradient; != 1 only to prove the check bites.
  double fault_scale = 1.0;
};

struct GroupCheck {
  std::string name;
  size_t checked = 0;
  double max_rel_error = 0.0;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;
  double max_rel_error = 0.0;
  bool passed = true;
};

// |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double analytic, double numeric);

// Central differences of the single-record loss against
// loss_and_gradient, for every parameter group.
GradCheckReport grad_check(const FusionSystem& system,
                           std::span<const LayerStack> stacks,
                           const Target& target, const GradCheckOptions& options);

}  // namespace fusebench

#endif  // FUSEBENCH_TRAINER_H_
