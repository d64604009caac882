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

// fusebench: synth -> train -> eval -> analyze -> gradcheck.
//
// Exit codes: 0 success, 1 failed check (or a diverged training run),
// 2 usage or configuration error, 3 I/O, format or corpus data error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fusebench/errors.h"
#include "fusebench/evalreport.h"
#include "fusebench/kvconfig.h"
#include "fusebench/synth.h"
#include "fusebench/trainer.h"

namespace fs = std::filesystem;
using namespace fusebench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct SynthArgs {
  std::string spec;
  std::string out;
};

struct TrainArgs {
  std::string manifest;
  std::string mode;
  std::string task;
  std::string config;
  uint64_t steps = 0;
  uint64_t seed = 0;
  uint64_t batch_size = 0;
  uint64_t eval_every = 0;
  double lr_head = 0.0;
  double lr_fusion = 0.0;
  bool p_learnable = false;
  std::string optimizer;
  std::vector<uint64_t> models;
  std::string out;
  std::string trace;
};

struct EvalArgs {
  std::string manifest;
  std::string ckpt;
  std::string split = "heldout";
  std::string out = "metrics.csv";
};

struct AnalyzeArgs {
  std::string ckpt;
  std::string out = "weights.csv";
};

struct GradCheckArgs {
  std::string manifest;
  std::string mode = "structured";
  std::string task;
  double tolerance = 1e-4;
  uint64_t seed = 0;
  uint64_t record = 0;
  bool p_learnable = false;
};

int RunSynth(const SynthArgs& args) {
  const SyntheticTaskSpec spec = SyntheticTaskSpec::from_config(KeyValues::parse_file(args.spec));
  const SyntheticCorpus corpus = generate_corpus(spec, args.out);
  std::cout << corpus.classification_path.string() << '\n'
            << corpus.transcription_path.string() << '\n';
  return kExitOk;
}

int RunTrain(const TrainArgs& args, const CLI::App& cmd) {
  const Manifest manifest = load_manifest(args.manifest);
  std::optional<KeyValues> file;
  if (!args.config.empty()) file = KeyValues::parse_file(args.config);

  TaskKind task = manifest.task_kind;
  if (!args.task.empty()) {
    task = parse_task(args.task);
  } else if (file && file->has("task")) {
    task = parse_task(file->text("task"));
  }
  // defaults, then the config file, then explicit flags
  TrainConfig config = TrainConfig::defaults(task);
  if (file) config.apply(*file);
  config.task = task;
  if (!args.mode.empty()) config.mode = parse_mode(args.mode);
  const auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--steps")) config.steps = args.steps;
  if (given("--seed")) config.seed = args.seed;
  if (given("--batch-size")) config.batch_size = args.batch_size;
  if (given("--eval-every")) config.eval_every = args.eval_every;
  if (given("--lr-head")) config.lr_head = args.lr_head;
  if (given("--lr-fusion")) config.lr_fusion = args.lr_fusion;
  if (given("--p-learnable")) config.p_learnable = true;
  if (given("--optimizer")) config.optimizer = parse_optimizer(args.optimizer);
  if (given("--models")) config.models = args.models;
  config.validate();

  const Corpus corpus = load_corpus(manifest, config.models);
  const TrainResult result = train(config, corpus);
  save_checkpoint(result.state, args.out);
  const fs::path trace = args.trace.empty() ? fs::path(args.out + ".trace.csv") : fs::path(args.trace);
  write_trace_csv(result.trace, trace);
  if (!result.trace.empty()) {
    const MetricRow& last = result.trace.back();
    std::cout << "step " << last.step << " heldout loss " << last.loss << ' '
              << last.metric_name << ' ' << last.metric_value << '\n';
  }
  return kExitOk;
}

int RunEval(const EvalArgs& args) {
  const TrainState state = load_checkpoint(args.ckpt);
  const Manifest manifest = load_manifest(args.manifest);
  const Corpus corpus = load_corpus(manifest, state.config.models);
  if (corpus.task != state.config.task) {
    throw ConfigError("manifest task '" + std::string(task_name(corpus.task)) +
                      "' does not match checkpoint task '" +
                      std::string(task_name(state.config.task)) + "'");
  }
  if (corpus.shapes != state.shapes) {
    throw DimError("manifest stack shapes do not match the checkpoint");
  }
  std::span<const Example> examples = corpus.examples;
  if (args.split == "train") {
    examples = corpus.train();
  } else if (args.split == "heldout") {
    examples = corpus.heldout();
  }
  if (examples.empty()) throw ConfigError("split '" + args.split + "' is empty");
  const EvalResult result = evaluate(state.system, examples);
  write_metrics_csv(result, args.out);
  std::cout << args.split << " loss " << result.mean_loss << ' ' << result.metric_name << ' '
            << result.metric_value << '\n';
  return kExitOk;
}

int RunAnalyze(const AnalyzeArgs& args) {
  const TrainState state = load_checkpoint(args.ckpt);
  const WeightReport report = weight_report(state.system);
  if (args.out == "-") {
    write_weights_csv(report, std::cout);
  } else {
    write_weights_csv(report, fs::path(args.out));
  }
  return kExitOk;
}

int RunGradCheck(const GradCheckArgs& args) {
  const FusionMode mode = parse_mode(args.mode);
  const Manifest manifest = load_manifest(args.manifest);
  const TaskKind task = args.task.empty() ? manifest.task_kind : parse_task(args.task);
  if (task != manifest.task_kind) {
    throw ConfigError("--task " + args.task + " does not match manifest task '" +
                      std::string(task_name(manifest.task_kind)) + "'");
  }
  if (args.record >= manifest.records.size()) {
    throw ConfigError("record index " + std::to_string(args.record) + " out of range");
  }
  const CorpusReport report = validate_corpus(manifest);
  const UtteranceRecord& rec = manifest.records[args.record];
  std::vector<LayerStack> stacks;
  for (const auto& path : rec.stack_paths) stacks.push_back(load_stack(path));
  Target target;
  if (rec.class_id) target.class_id = *rec.class_id;
  if (rec.transcript) target.transcript = *rec.transcript;

  Rng rng(args.seed);
  FusionSystem system = make_system(task, mode, report.model_shapes, manifest.label_space,
                                    args.p_learnable, rng);
  // zero logits sit on a symmetric point; move off it
  for (auto& group : parameter_groups(system)) {
    if (group.is_head) continue;
    for (double& v : group.values) v = 0.5 * rng.normal();
  }

  GradCheckOptions options;
  options.tolerance = args.tolerance;
  options.seed = args.seed;
  const GradCheckReport result = grad_check(system, stacks, target, options);
  for (const auto& g : result.groups) {
    std::cout << (g.passed ? "PASS " : "FAIL ") << g.name << " checked=" << g.checked
              << " max_rel_error=" << g.max_rel_error << " at=" << g.worst_index
              << " analytic=" << g.analytic << " numeric=" << g.numeric << '\n';
  }
  std::cout << (result.passed ? "PASS" : "FAIL") << " max_rel_error=" << result.max_rel_error
            << " tolerance=" << args.tolerance << '\n';
  return result.passed ? kExitOk : kExitCheckFailed;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const TrainingError*>(&e)) return kExitCheckFailed;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
    return kExitUsage;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-weight fusion of frozen upstream models: synthesize corpora, "
               "train, evaluate, analyze weights, check gradients."};
  app.require_subcommand(1);
  app.footer("Environment: FUSEBENCH_THREADS caps per-batch worker threads (default 1).\n"
             "Exit codes: 0 ok, 1 check failed, 2 usage/config, 3 I/O/format/data.");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus (sid.jsonl, asr.jsonl)");
  synth_cmd->add_option("--spec", synth.spec, "Key-value spec file (SyntheticTaskSpec keys)")
      ->required();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train fusion weights and heads");
  train_cmd->add_option("--manifest", tr.manifest, "Manifest (JSON lines)")->required();
  train_cmd->add_option("--mode", tr.mode,
                        "naive|structured|prob-shared|prob-individual|last-layer "
                        "(default structured)");
  train_cmd->add_option("--task", tr.task, "sid|asr (default: the manifest's task)");
  train_cmd->add_option("--config", tr.config,
                        "Key-value file with TrainConfig keys; flags override it");
  train_cmd->add_option("--steps", tr.steps, "Optimizer steps (default 2000)");
  train_cmd->add_option("--seed", tr.seed, "Seed for init and shuffling (default 0)");
  train_cmd->add_option("--batch-size", tr.batch_size, "Records per step (default 8)");
  train_cmd->add_option("--eval-every", tr.eval_every, "Held-out eval period (default 200)");
  train_cmd->add_option("--lr-head", tr.lr_head, "Head learning rate (sid 0.1, asr 1e-4)");
  train_cmd->add_option("--lr-fusion", tr.lr_fusion,
                        "Fusion logit learning rate (sid 0.1, asr 1e-4)");
  train_cmd->add_flag("--p-learnable", tr.p_learnable,
                      "Learn the model mixture p (default fixed uniform)");
  train_cmd->add_option("--optimizer", tr.optimizer, "adam|sgd (default adam)");
  train_cmd->add_option("--models", tr.models, "Manifest model indices to fuse (default all)")
      ->delimiter(',');
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_option("--trace", tr.trace, "Metric trace CSV (default <out>.trace.csv)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint, write metrics.csv");
  eval_cmd->add_option("--manifest", ev.manifest, "Manifest (JSON lines)")->required();
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint path")->required();
  eval_cmd->add_option("--split", ev.split, "train|heldout|all (default heldout)")
      ->check(CLI::IsMember({"train", "heldout", "all"}));
  eval_cmd->add_option("--out", ev.out, "Metrics CSV (default metrics.csv)");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Write normalized layer weights");
  analyze_cmd->add_option("--ckpt", an.ckpt, "Checkpoint path")->required();
  analyze_cmd->add_option("--out", an.out, "Weights CSV, '-' for stdout (default weights.csv)");

  GradCheckArgs gc;
  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "Finite-difference check of analytic gradients");
  gradcheck_cmd->add_option("--manifest", gc.manifest, "Manifest (JSON lines)")->required();
  gradcheck_cmd->add_option("--mode", gc.mode, "Fusion mode (default structured)");
  gradcheck_cmd->add_option("--task", gc.task, "sid|asr (default: the manifest's task)");
  gradcheck_cmd->add_option("--tolerance", gc.tolerance, "Max relative error (default 1e-4)");
  gradcheck_cmd->add_option("--seed", gc.seed, "Seed for parameters and subsampling");
  gradcheck_cmd->add_option("--record", gc.record, "Manifest record index (default 0)");
  gradcheck_cmd->add_flag("--p-learnable", gc.p_learnable, "Include learnable model logits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return RunSynth(synth);
    if (*train_cmd) return RunTrain(tr, *train_cmd);
    if (*eval_cmd) return RunEval(ev);
    if (*analyze_cmd) return RunAnalyze(an);
    if (*gradcheck_cmd) return RunGradCheck(gc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e);
  }
  return kExitUsage;
}
