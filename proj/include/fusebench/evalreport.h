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

// Accuracy / WER metrics, corpus evaluation and layer-weight reports.

#ifndef FUSEBENCH_EVALREPORT_H_
#define FUSEBENCH_EVALREPORT_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fusebench/system.h"

namespace fusebench {

double accuracy(std::span<const int> predictions, std::span<const int> references);

// Levenshtein distance with unit costs.
size_t edit_distance(std::span<const int> hypothesis, std::span<const int> reference);
// edit_distance / |reference|; may exceed 1.
double wer(std::span<const int> hypothesis, std::span<const int> reference);
// Total edits over total reference tokens.
double corpus_wer(std::span<const std::vector<int>> hypotheses,
                  std::span<const std::vector<int>> references);

// One utterance with its frozen stacks loaded.
struct Example {
  std::string id;
  std::vector<LayerStack> stacks;
  Target target;
};

struct RecordMetric {
  std::string record_id;
  std::string metric;
  double value = 0.0;
};

struct EvalResult {
  double mean_loss = 0.0;
  std::string metric_name;  // "accuracy" or "wer"
  double metric_value = 0.0;
  std::vector<RecordMetric> per_record;
};

EvalResult evaluate(const FusionSystem& system, std::span<const Example> examples);

// metrics.csv: record_id,metric,value. Per-record rows followed by corpus
// rows with record_id "corpus".
void write_metrics_csv(const EvalResult& result, const std::filesystem::path& path);

struct WeightRow {
  size_t model = 0;
  size_t layer = 0;
  double weight = 0.0;
};

struct WeightReport {
  FusionMode mode = FusionMode::kStructured;
  TaskKind task = TaskKind::kUtteranceClassification;
  std::vector<WeightRow> rows;  // model-major, every (i, j)
  std::vector<double> mixture;  // p_i; empty for naive and last-layer
};

WeightReport weight_report(const FusionSystem& system);

// weights.csv: model,layer,weight. Mixture entries follow with layer "p".
void write_weights_csv(const WeightReport& report, std::ostream& out);
void write_weights_csv(const WeightReport& report, const std::filesystem::path& path);

}  // namespace fusebench

#endif  // FUSEBENCH_EVALREPORT_H_
