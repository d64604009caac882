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

#include "fusebench/evalreport.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void WriteText(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

int Argmax(std::span<const double> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

double accuracy(std::span<const int> predictions, std::span<const int> references) {
  if (predictions.empty()) throw DomainError("accuracy: no predictions");
  if (predictions.size() != references.size()) {
    throw ShapeError("accuracy: prediction and reference counts differ");
  }
  size_t hits = 0;
  for (size_t k = 0; k < predictions.size(); ++k) {
    hits += predictions[k] == references[k] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

size_t edit_distance(std::span<const int> hypothesis, std::span<const int> reference) {
  // Single-row DP over the hypothesis.
  std::vector<size_t> row(hypothesis.size() + 1);
  for (size_t h = 0; h <= hypothesis.size(); ++h) row[h] = h;
  for (size_t r = 1; r <= reference.size(); ++r) {
    size_t diag = row[0];
    row[0] = r;
    for (size_t h = 1; h <= hypothesis.size(); ++h) {
      const size_t up = row[h];
      const size_t sub = diag + (hypothesis[h - 1] == reference[r - 1] ? 0 : 1);
      row[h] = std::min({sub, up + 1, row[h - 1] + 1});
      diag = up;
    }
  }
  return row.back();
}

double wer(std::span<const int> hypothesis, std::span<const int> reference) {
  if (reference.empty()) throw DomainError("wer: empty reference");
  return static_cast<double>(edit_distance(hypothesis, reference)) /
         static_cast<double>(reference.size());
}

double corpus_wer(std::span<const std::vector<int>> hypotheses,
                  std::span<const std::vector<int>> references) {
  if (hypotheses.size() != references.size()) {
    throw ShapeError("corpus_wer: hypothesis and reference counts differ");
  }
  size_t edits = 0;
  size_t tokens = 0;
  for (size_t k = 0; k < references.size(); ++k) {
    edits += edit_distance(hypotheses[k], references[k]);
    tokens += references[k].size();
  }
  if (tokens == 0) throw DomainError("corpus_wer: no reference tokens");
  return static_cast<double>(edits) / static_cast<double>(tokens);
}

EvalResult evaluate(const FusionSystem& system, std::span<const Example> examples) {
  if (examples.empty()) throw DomainError("evaluate: no examples");
  EvalResult result;
  double loss_sum = 0.0;
  if (system.task == TaskKind::kUtteranceClassification) {
    std::vector<int> predictions;
    std::vector<int> references;
    for (const auto& ex : examples) {
      const DenseArray post = system_posterior(system, ex.stacks);
      loss_sum += target_loss(post, system.task, ex.target);
      predictions.push_back(Argmax(post.row(0)));
      references.push_back(ex.target.class_id);
      result.per_record.push_back(
          {ex.id, "correct", predictions.back() == references.back() ? 1.0 : 0.0});
    }
    result.metric_name = "accuracy";
    result.metric_value = accuracy(predictions, references);
  } else {
    std::vector<std::vector<int>> hypotheses;
    std::vector<std::vector<int>> references;
    for (const auto& ex : examples) {
      const DenseArray post = system_posterior(system, ex.stacks);
      loss_sum += target_loss(post, system.task, ex.target);
      hypotheses.push_back(ctc_greedy_decode(post));
      references.push_back(ex.target.transcript);
      result.per_record.push_back(
          {ex.id, "edits",
           static_cast<double>(edit_distance(hypotheses.back(), references.back()))});
      result.per_record.push_back(
          {ex.id, "ref_tokens", static_cast<double>(references.back().size())});
    }
    result.metric_name = "wer";
    result.metric_value = corpus_wer(hypotheses, references);
  }
  result.mean_loss = loss_sum / static_cast<double>(examples.size());
  return result;
}

void write_metrics_csv(const EvalResult& result, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "record_id,metric,value\n";
  for (const auto& row : result.per_record) {
    os << row.record_id << ',' << row.metric << ',' << FormatDouble(row.value) << '\n';
  }
  os << "corpus,loss," << FormatDouble(result.mean_loss) << '\n';
  os << "corpus," << result.metric_name << ',' << FormatDouble(result.metric_value)
     << '\n';
  WriteText(os.str(), path);
}

WeightReport weight_report(const FusionSystem& system) {
  WeightReport report;
  report.mode = system.fusion.mode;
  report.task = system.task;
  const auto w = system.fusion.layer_weights();
  for (size_t i = 0; i < w.size(); ++i) {
    for (size_t j = 0; j < w[i].size(); ++j) report.rows.push_back({i, j, w[i][j]});
  }
  if (!has_global_constraint(system.fusion.mode)) {
    report.mixture = system.fusion.mixture();
  }
  return report;
}

void write_weights_csv(const WeightReport& report, std::ostream& out) {
  out << "model,layer,weight\n";
  for (const auto& row : report.rows) {
    out << row.model << ',' << row.layer << ',' << FormatDouble(row.weight) << '\n';
  }
  for (size_t i = 0; i < report.mixture.size(); ++i) {
    out << i << ",p," << FormatDouble(report.mixture[i]) << '\n';
  }
}

void write_weights_csv(const WeightReport& report, const std::filesystem::path& path) {
  std::ostringstream os;
  write_weights_csv(report, os);
  WriteText(os.str(), path);
}

}  // namespace fusebench
