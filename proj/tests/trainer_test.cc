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

#include "fusebench/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "fusebench/errors.h"
#include "fusebench/synth.h"
#include "support.h"

namespace fusebench {
namespace {

using testing::flatten;
using testing::random_stack;
using testing::TempDir;

// In-memory corpus of random stacks; transcripts always fit their frames.
Corpus RandomCorpus(uint64_t seed, TaskKind task, std::vector<StackShape> shapes,
                    size_t records = 10, size_t label_space = 4) {
  Rng rng(seed);
  Corpus corpus;
  corpus.task = task;
  corpus.label_space = label_space;
  corpus.shapes = shapes;
  for (size_t r = 0; r < records; ++r) {
    Example ex;
    ex.id = "r" + std::to_string(r);
    const size_t frames = 4 + rng.below(4);
    for (const auto& s : shapes) ex.stacks.push_back(random_stack(rng, s.layers, frames, s.dim));
    if (task == TaskKind::kUtteranceClassification) {
      ex.target.class_id = static_cast<int>(rng.below(label_space));
    } else {
      for (size_t u = 0; u < 1 + rng.below(2); ++u) {
        ex.target.transcript.push_back(1 + static_cast<int>(rng.below(label_space - 1)));
      }
    }
    corpus.examples.push_back(std::move(ex));
  }
  corpus.train_count = records - records / 5;
  return corpus;
}

TrainConfig SmallConfig(TaskKind task, FusionMode mode, uint64_t steps = 12) {
  TrainConfig c = TrainConfig::defaults(task);
  c.mode = mode;
  c.steps = steps;
  c.batch_size = 3;
  c.eval_every = 4;
  c.seed = 7;
  c.lr_head = 0.05;
  c.lr_fusion = 0.05;
  return c;
}

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) { ::setenv("FUSEBENCH_THREADS", value, 1); }
  ~ThreadsEnv() { ::unsetenv("FUSEBENCH_THREADS"); }
};

const std::vector<StackShape> kTwoModels = {{3, 4}, {4, 4}};

TEST(System, AnalyticGradientMatchesFiniteDifferences) {
  Rng rng(1);
  for (TaskKind task : {TaskKind::kUtteranceClassification, TaskKind::kSequenceTranscription}) {
    for (FusionMode mode : kAllModes) {
      for (bool learn_p : {false, true}) {
        const Corpus corpus = RandomCorpus(2, task, kTwoModels, 2);
        const Example& ex = corpus.examples[0];
        const FusionSystem system =
            testing::random_system(rng, task, mode, kTwoModels, 4, learn_p);
        FusionSystem grad = zeros_like(system);
        loss_and_gradient(system, ex.stacks, ex.target, grad);
        const auto analytic = flatten(grad);
        const auto numeric = testing::numeric_gradient(system, ex.stacks, ex.target);
        ASSERT_EQ(analytic.size(), numeric.size());
        for (size_t k = 0; k < analytic.size(); ++k) {
          EXPECT_LT(testing::rel_err(analytic[k], numeric[k]), 1e-4)
              << task_name(task) << " " << mode_name(mode) << " p=" << learn_p << " #" << k << " " << analytic[k] << " vs " << numeric[k];
        }
      }
    }
  }
}

TEST(System, SharedHeadGradientSumsIdenticalBranches) {
  Rng rng(3);
  const Corpus one = RandomCorpus(4, TaskKind::kUtteranceClassification, {{3, 4}}, 1);
  const Example& ex = one.examples[0];
  FusionSystem single = testing::random_system(rng, TaskKind::kUtteranceClassification,
                                               FusionMode::kProbShared, one.shapes, 4, false);
  const std::vector<StackShape> twice = {{3, 4}, {3, 4}};
  FusionSystem shared = make_system(TaskKind::kUtteranceClassification, FusionMode::kProbShared,
                                    twice, 4, false, rng);
  shared.heads = single.heads;
  shared.fusion.layer_logits = {single.fusion.layer_logits[0], single.fusion.layer_logits[0]};
  const std::vector<LayerStack> stacks = {ex.stacks[0], ex.stacks[0]};

  FusionSystem g1 = zeros_like(single);
  FusionSystem g2 = zeros_like(shared);
  const double l1 = loss_and_gradient(single, ex.stacks, ex.target, g1);
  const double l2 = loss_and_gradient(shared, stacks, ex.target, g2);
  EXPECT_NEAR(l1, l2, 1e-14);
  // Each branch contributes p_i = 1/2 of the single-branch gradient.
  for (size_t k = 0; k < g1.heads[0].weight.size(); ++k) {
    EXPECT_NEAR(g2.heads[0].weight.data()[k], g1.heads[0].weight.data()[k], 1e-14);
  }
}

TEST(System, DimPolicyAndParameterGroups) {
  Rng rng(5);
  const std::vector<StackShape> mixed = {{3, 8}, {3, 12}};
  for (FusionMode mode : kAllModes) {
    if (mode == FusionMode::kProbIndividual) {
      const FusionSystem s = make_system(TaskKind::kUtteranceClassification, mode, mixed, 5,
                                         false, rng);
      ASSERT_EQ(s.heads.size(), 2u);
      EXPECT_EQ(s.heads[0].input_dim(), 8u);
      EXPECT_EQ(s.heads[1].input_dim(), 12u);
    } else {
      EXPECT_THROW(make_system(TaskKind::kUtteranceClassification, mode, mixed, 5, false, rng),
                   DimError)
          << mode_name(mode);
    }
  }
  FusionSystem s = make_system(TaskKind::kSequenceTranscription, FusionMode::kProbIndividual,
                               kTwoModels, 6, true, rng);
  std::vector<std::string> names;
  for (const auto& g : parameter_groups(s)) names.push_back(g.name);
  EXPECT_EQ(names, (std::vector<std::string>{"fusion.layer_logits[0]", "fusion.layer_logits[1]",
                                             "fusion.model_logits", "head[0].weight",
                                             "head[0].bias", "head[1].weight", "head[1].bias"}));
  EXPECT_EQ(parameter_count(s), 3 + 4 + 2 + 2 * (6 * 4 + 6));
  for (double v : s.fusion.layer_logits[1]) EXPECT_EQ(v, 0.0);
}

TEST(Trainer, ZeroLearningRateLeavesParameters) {
  for (OptimizerKind opt : {OptimizerKind::kAdam, OptimizerKind::kSgd}) {
    const Corpus corpus = RandomCorpus(6, TaskKind::kUtteranceClassification, kTwoModels);
    TrainConfig c = SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kStructured, 25);
    c.optimizer = opt;
    c.lr_head = 0.0;
    c.lr_fusion = 0.0;
    c.p_learnable = true;
    TrainState before = init_training(c, corpus);
    TrainResult after = train(c, corpus);
    EXPECT_EQ(after.state.system, before.system);
    EXPECT_EQ(after.state.step, 25u);
  }
}

TEST(Trainer, SgdStepIsExact) {
  const Corpus corpus = RandomCorpus(7, TaskKind::kSequenceTranscription, kTwoModels);
  TrainConfig c = SmallConfig(TaskKind::kSequenceTranscription, FusionMode::kProbIndividual);
  c.optimizer = OptimizerKind::kSgd;
  c.lr_head = 0.3;
  c.lr_fusion = 0.7;
  TrainState state = init_training(c, corpus);
  TrainState probe = state;
  const auto batch = next_batch(probe, corpus.train_count);
  FusionSystem grad;
  batch_gradient(state.system, corpus, batch, grad);
  FusionSystem expected = state.system;
  auto p = parameter_groups(expected);
  auto g = parameter_groups(grad);
  for (size_t k = 0; k < p.size(); ++k) {
    const double lr = p[k].is_head ? 0.3 : 0.7;
    for (size_t n = 0; n < p[k].values.size(); ++n) p[k].values[n] -= lr * g[k].values[n];
  }
  train_step(state, corpus, batch);
  EXPECT_EQ(state.system, expected);
}

// f(theta) = (theta - 3)^2 on one head bias, the gradient of every other
// parameter held at zero.
TEST(Trainer, AdamTwoStepsMatchHandRecursion) {
  const Corpus corpus = RandomCorpus(8, TaskKind::kUtteranceClassification, kTwoModels);
  TrainConfig c = SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kStructured);
  c.lr_head = 0.01;
  TrainState state = init_training(c, corpus);
  const TrainState initial = state;
  state.system.heads[0].bias[1] = 0.5;

  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double theta = 0.5, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    const double g = 2.0 * (theta - 3.0);
    FusionSystem grad = zeros_like(state.system);
    grad.heads[0].bias[1] = 2.0 * (state.system.heads[0].bias[1] - 3.0);
    apply_update(state, grad);

    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double m_hat = m / (1 - std::pow(b1, t));
    const double v_hat = v / (1 - std::pow(b2, t));
    theta -= lr * m_hat / (std::sqrt(v_hat) + eps);
    EXPECT_NEAR(state.system.heads[0].bias[1], theta, 1e-15) << "step " << t;
  }
  // Closed form: g1 = -5 moves theta by lr * 5 / (5 + eps); then g2 = -4.98,
  // m2 = -0.948, v2 = 0.001 * (0.999 * 25 + 4.98^2).
  const double theta1 = 0.5 + lr * 5.0 / (5.0 + eps);
  const double m2_hat = 0.948 / (1 - b1 * b1);
  const double v2_hat = 0.001 * (0.999 * 25.0 + 4.98 * 4.98) / (1 - b2 * b2);
  EXPECT_NEAR(theta, theta1 + lr * m2_hat / (std::sqrt(v2_hat) + eps), 1e-12);
  state.system.heads[0].bias[1] = initial.system.heads[0].bias[1];
  EXPECT_EQ(state.system.fusion, initial.system.fusion);
  EXPECT_EQ(state.system.heads[0].weight, initial.system.heads[0].weight);
}

TEST(Trainer, IdenticalRecordsGiveSingleRecordGradient) {
  const Corpus corpus = RandomCorpus(9, TaskKind::kSequenceTranscription, kTwoModels);
  const TrainState state =
      init_training(SmallConfig(TaskKind::kSequenceTranscription, FusionMode::kNaive), corpus);
  FusionSystem single;
  FusionSystem repeated;
  const std::vector<uint64_t> one = {2};
  const std::vector<uint64_t> many = {2, 2, 2, 2};
  const double l1 = batch_gradient(state.system, corpus, one, single);
  const double l4 = batch_gradient(state.system, corpus, many, repeated);
  EXPECT_NEAR(l1, l4, 1e-15 * std::abs(l1));
  const auto a = flatten(single);
  const auto b = flatten(repeated);
  for (size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-15 * std::max(1.0, std::abs(a[k])));
}

TEST(Trainer, DeterministicAcrossRunsAndThreadCounts) {
  for (FusionMode mode : kAllModes) {
    const Corpus corpus = RandomCorpus(10, TaskKind::kSequenceTranscription, kTwoModels);
    const TrainConfig c = SmallConfig(TaskKind::kSequenceTranscription, mode);
    const TrainResult a = train(c, corpus);
    const TrainResult b = train(c, corpus);
    std::string threaded;
    {
      ThreadsEnv env("3");
      ASSERT_EQ(worker_threads(), 3u);
      threaded = serialize_checkpoint(train(c, corpus).state);
    }
    EXPECT_EQ(serialize_checkpoint(a.state), serialize_checkpoint(b.state));
    EXPECT_EQ(serialize_checkpoint(a.state), threaded) << mode_name(mode);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (size_t k = 0; k < a.trace.size(); ++k) {
      EXPECT_EQ(a.trace[k].loss, b.trace[k].loss);
      EXPECT_EQ(a.trace[k].metric_value, b.trace[k].metric_value);
    }
  }
}

TEST(Trainer, ResumeIsBitExact) {
  TempDir dir;
  for (bool p : {false, true}) {
    const Corpus corpus = RandomCorpus(11, TaskKind::kUtteranceClassification, kTwoModels);
    TrainConfig c = SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kProbShared, 20);
    c.p_learnable = p;
    const TrainResult full = train(c, corpus);

    TrainConfig first = c;
    first.steps = 8;
    const TrainResult part = train(first, corpus);
    save_checkpoint(part.state, dir / "part.fck");
    TrainState restored = load_checkpoint(dir / "part.fck");
    const auto rest = resume_training(restored, corpus, 20);
    EXPECT_EQ(serialize_checkpoint(restored), serialize_checkpoint(full.state));

    std::vector<MetricRow> joined = part.trace;
    joined.insert(joined.end(), rest.begin(), rest.end());
    ASSERT_EQ(joined.size(), full.trace.size());
    for (size_t k = 0; k < joined.size(); ++k) {
      EXPECT_EQ(joined[k].step, full.trace[k].step);
      EXPECT_EQ(joined[k].loss, full.trace[k].loss);
    }
  }
}

TEST(Trainer, NaiveAndStructuredAgreeForOneModel) {
  for (TaskKind task : {TaskKind::kUtteranceClassification, TaskKind::kSequenceTranscription}) {
    const Corpus corpus = RandomCorpus(12, task, {{5, 4}});
    const TrainResult naive = train(SmallConfig(task, FusionMode::kNaive, 30), corpus);
    const TrainResult structured = train(SmallConfig(task, FusionMode::kStructured, 30), corpus);
    EXPECT_EQ(naive.state.system.fusion.layer_logits, structured.state.system.fusion.layer_logits);
    EXPECT_EQ(naive.state.system.heads, structured.state.system.heads);
    ASSERT_EQ(naive.trace.size(), structured.trace.size());
    for (size_t k = 0; k < naive.trace.size(); ++k) {
      EXPECT_EQ(naive.trace[k].loss, structured.trace[k].loss);
    }
  }
}

TEST(Trainer, StacksAreNeverWritten) {
  TempDir dir;
  SyntheticTaskSpec spec;
  spec.utterance_count = 20;
  const SyntheticCorpus synth = generate_corpus(spec, dir.path());
  const uint64_t before = testing::tree_checksum(dir / "stacks");
  const Corpus corpus = load_corpus(synth.transcription);
  TrainConfig c = SmallConfig(TaskKind::kSequenceTranscription, FusionMode::kStructured, 5);
  train(c, corpus);
  EXPECT_EQ(testing::tree_checksum(dir / "stacks"), before);
}

TEST(Trainer, OnlyTrainableParametersChange) {
  const Corpus corpus = RandomCorpus(13, TaskKind::kUtteranceClassification, kTwoModels);
  const Corpus copy = corpus;
  TrainConfig c = SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kStructured);
  const TrainResult r = train(c, corpus);
  for (size_t k = 0; k < corpus.examples.size(); ++k) {
    EXPECT_EQ(corpus.examples[k].stacks, copy.examples[k].stacks);
  }
  EXPECT_EQ(r.state.system.fusion.fixed_p, (std::vector<double>{0.5, 0.5}));
  EXPECT_TRUE(r.state.system.fusion.model_logits.empty());
}

TEST(Trainer, NonFiniteLossNamesStepAndRecords) {
  Corpus corpus = RandomCorpus(14, TaskKind::kUtteranceClassification, kTwoModels);
  for (auto& ex : corpus.examples) ex.stacks[0].values(0, 0, 0) = std::numeric_limits<double>::infinity();
  TrainConfig c = SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kNaive);
  try {
    train(c, corpus);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("records: r"), std::string::npos) << msg;
  }
}

TEST(Trainer, InitErrors) {
  const Corpus sid = RandomCorpus(15, TaskKind::kUtteranceClassification, kTwoModels);
  EXPECT_THROW(init_training(SmallConfig(TaskKind::kSequenceTranscription, FusionMode::kNaive), sid),
               ConfigError);
  const Corpus mixed = RandomCorpus(15, TaskKind::kUtteranceClassification, {{3, 8}, {3, 12}});
  EXPECT_THROW(init_training(SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kStructured),
                             mixed),
               DimError);
  EXPECT_NO_THROW(init_training(
      SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kProbIndividual), mixed));
  Corpus asr = RandomCorpus(15, TaskKind::kSequenceTranscription, kTwoModels);
  asr.examples[3].target.transcript = std::vector<int>(40, 1);
  EXPECT_THROW(init_training(SmallConfig(TaskKind::kSequenceTranscription, FusionMode::kNaive), asr),
               AlignmentError);
  TrainConfig zero = SmallConfig(TaskKind::kUtteranceClassification, FusionMode::kNaive);
  zero.steps = 0;
  EXPECT_THROW(init_training(zero, sid), ConfigError);
}

TEST(Trainer, ConfigFromKeyValues) {
  TrainConfig c = TrainConfig::defaults(TaskKind::kSequenceTranscription);
  EXPECT_EQ(c.lr_head, 1e-4);
  EXPECT_EQ(c.lr_fusion, 1e-4);
  EXPECT_EQ(TrainConfig::defaults(TaskKind::kUtteranceClassification).lr_head, 0.1);
  EXPECT_EQ(c.steps, 2000u);
  EXPECT_EQ(c.batch_size, 8u);
  c.apply(KeyValues::parse("mode = prob_shared\nsteps = 9\noptimizer = sgd\nmodels = 1\n"
                           "p_learnable = true\nlr_head = 0.25\n"));
  EXPECT_EQ(c.mode, FusionMode::kProbShared);
  EXPECT_EQ(c.steps, 9u);
  EXPECT_EQ(c.optimizer, OptimizerKind::kSgd);
  EXPECT_EQ(c.models, std::vector<uint64_t>{1});
  EXPECT_TRUE(c.p_learnable);
  EXPECT_EQ(c.lr_head, 0.25);
  EXPECT_THROW(c.apply(KeyValues::parse("learning_rate = 1\n")), ConfigError);
  EXPECT_THROW(c.apply(KeyValues::parse("optimizer = rmsprop\n")), ConfigError);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  TempDir dir;
  const Corpus corpus = RandomCorpus(16, TaskKind::kSequenceTranscription, kTwoModels);
  TrainConfig c = SmallConfig(TaskKind::kSequenceTranscription, FusionMode::kProbIndividual, 6);
  c.p_learnable = true;
  c.models = {0, 1};
  const TrainResult r = train(c, corpus);
  save_checkpoint(r.state, dir / "a.fck");
  const std::string bytes = testing::read_bytes(dir / "a.fck");
  EXPECT_EQ(bytes.substr(0, 4), "FCK1");
  const TrainState back = load_checkpoint(dir / "a.fck");
  EXPECT_EQ(back.config, r.state.config);
  EXPECT_EQ(back.system, r.state.system);
  EXPECT_EQ(back.optimizer, r.state.optimizer);
  EXPECT_EQ(back.step, 6u);
  EXPECT_EQ(back.order, r.state.order);
  EXPECT_EQ(back.cursor, r.state.cursor);
  EXPECT_EQ(serialize_checkpoint(back), bytes);

  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad), FormatError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  std::string version = bytes;
  version[4] = 9;
  EXPECT_THROW(deserialize_checkpoint(version), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.fck"), IoError);
}

TEST(Checkpoint, TraceCsv) {
  TempDir dir;
  const std::vector<MetricRow> rows = {{4, 0.5, "wer", 0.25}, {8, 0.125, "wer", 0.0}};
  write_trace_csv(rows, dir / "t.csv");
  EXPECT_EQ(testing::read_bytes(dir / "t.csv"),
            "step,loss,metric_name,metric_value\n4,0.5,wer,0.25\n8,0.125,wer,0\n");
}

TEST(GradCheck, PassesAndReportsEveryGroup) {
  Rng rng(17);
  const Corpus corpus = RandomCorpus(18, TaskKind::kSequenceTranscription, kTwoModels, 1, 5);
  const Example& ex = corpus.examples[0];
  const FusionSystem s = testing::random_system(rng, TaskKind::kSequenceTranscription,
                                                FusionMode::kStructured, kTwoModels, 5, true);
  const GradCheckReport r = grad_check(s, ex.stacks, ex.target, {});
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_rel_error, 1e-4);
  ASSERT_EQ(r.groups.size(), 5u);
  EXPECT_EQ(r.groups[2].name, "fusion.model_logits");
  EXPECT_EQ(r.groups[3].name, "head[0].weight");
  EXPECT_EQ(r.groups[3].checked, 20u);
}

TEST(GradCheck, FaultInjectionIsCaught) {
  Rng rng(19);
  const Corpus corpus = RandomCorpus(20, TaskKind::kUtteranceClassification, kTwoModels, 1);
  const Example& ex = corpus.examples[0];
  for (FusionMode mode : kAllModes) {
    const FusionSystem s = testing::random_system(rng, TaskKind::kUtteranceClassification, mode,
                                                  kTwoModels, 4, false);
    GradCheckOptions faulty;
    faulty.fault_scale = 1.01;
    const GradCheckReport r = grad_check(s, ex.stacks, ex.target, faulty);
    EXPECT_FALSE(r.passed) << mode_name(mode);
    EXPECT_GT(r.max_rel_error, 1e-3);
  }
}

TEST(GradCheck, DegenerateZeroSystemIsWellDefined) {
  Rng rng(21);
  LayerStack sym(3, 4, 2);
  for (size_t j = 0; j < 3; ++j) {
    for (size_t t = 0; t < 4; ++t) {
      sym.values(j, t, 0) = t % 2 == 0 ? 1.0 : -1.0;
      sym.values(j, t, 1) = t % 2 == 0 ? -1.0 : 1.0;
    }
  }
  const std::vector<LayerStack> stacks = {sym, sym};
  FusionSystem s = make_system(TaskKind::kUtteranceClassification, FusionMode::kStructured,
                               std::vector<StackShape>{{3, 2}, {3, 2}}, 3, false, rng);
  for (auto& g : parameter_groups(s)) {
    for (double& v : g.values) v = 0.0;
  }
  Target target;
  target.class_id = 1;
  const GradCheckReport r = grad_check(s, stacks, target, {});
  EXPECT_TRUE(r.passed);
  for (const auto& g : r.groups) {
    EXPECT_TRUE(std::isfinite(g.max_rel_error));
    if (g.name.rfind("fusion", 0) == 0) {
      EXPECT_NEAR(g.analytic, 0.0, 1e-12);
      EXPECT_NEAR(g.numeric, 0.0, 1e-9);
    }
  }
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_NEAR(relative_error(1e-10, 0.0), 1e-2, 1e-17);
}

TEST(Threads, EnvironmentParsing) {
  {
    ThreadsEnv env("4");
    EXPECT_EQ(worker_threads(), 4u);
  }
  {
    ThreadsEnv env("zero");
    EXPECT_EQ(worker_threads(), 1u);
  }
  EXPECT_EQ(worker_threads(), 1u);
}

}  // namespace
}  // namespace fusebench
