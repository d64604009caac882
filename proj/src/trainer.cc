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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <thread>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

constexpr char kCheckpointMagic[4] = {'F', 'C', 'K', '1'};
constexpr uint32_t kCheckpointVersion = 1;

class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<char>((v >> s) & 0xFFu));
  }
  void u64(uint64_t v) {
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<char>((v >> s) & 0xFFu));
  }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  void f64s(std::span<const double> v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void u64s(std::span<const uint64_t> v) {
    u64(v.size());
    for (uint64_t x : v) u64(x);
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(const std::string& in, size_t offset) : in_(in), pos_(offset) {}

  uint8_t u8() { return static_cast<uint8_t>(take(1)[0]); }
  uint32_t u32() {
    const char* p = take(4);
    uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
    return v;
  }
  uint64_t u64() {
    const char* p = take(8);
    uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const uint64_t n = count(1);
    return std::string(take(n), n);
  }
  std::vector<double> f64s() {
    std::vector<double> v(count(8));
    for (double& x : v) x = f64();
    return v;
  }
  std::vector<uint64_t> u64s() {
    std::vector<uint64_t> v(count(8));
    for (uint64_t& x : v) x = u64();
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  // Element count whose payload must fit in the remaining bytes.
  uint64_t count(size_t element_bytes) {
    const uint64_t n = u64();
    if (n > (in_.size() - pos_) / element_bytes) {
      throw FormatError("checkpoint: length prefix exceeds payload");
    }
    return n;
  }
  const char* take(size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint: truncated payload");
    const char* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }

  const std::string& in_;
  size_t pos_;
};

void Shuffle(std::vector<uint64_t>& order, Rng& rng) {
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
}

void ResetOrder(TrainState& state, size_t train_count) {
  state.order.resize(train_count);
  for (size_t k = 0; k < train_count; ++k) state.order[k] = k;
  Shuffle(state.order, state.rng);
  state.cursor = 0;
}

void AddInto(FusionSystem& dst, FusionSystem& src, double alpha) {
  auto d = parameter_groups(dst);
  auto s = parameter_groups(src);
  for (size_t g = 0; g < d.size(); ++g) axpy(alpha, s[g].values, d[g].values);
}

void WriteConfig(ByteWriter& w, const TrainConfig& c) {
  w.u32(static_cast<uint32_t>(c.mode));
  w.u32(static_cast<uint32_t>(c.task));
  w.u64(c.steps);
  w.u64(c.batch_size);
  w.f64(c.lr_head);
  w.f64(c.lr_fusion);
  w.u8(c.p_learnable ? 1 : 0);
  w.u32(static_cast<uint32_t>(c.optimizer));
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
  w.u64(c.seed);
  w.u64(c.eval_every);
  w.u64s(c.models);
}

template <typename Enum>
Enum ReadEnum(ByteReader& r, uint32_t limit, const char* what) {
  const uint32_t v = r.u32();
  if (v >= limit) throw FormatError(std::string("checkpoint: bad ") + what);
  return static_cast<Enum>(v);
}

TrainConfig ReadConfig(ByteReader& r) {
  TrainConfig c;
  c.mode = ReadEnum<FusionMode>(r, 5, "fusion mode");
  c.task = ReadEnum<TaskKind>(r, 2, "task kind");
  c.steps = r.u64();
  c.batch_size = r.u64();
  c.lr_head = r.f64();
  c.lr_fusion = r.f64();
  c.p_learnable = r.u8() != 0;
  c.optimizer = ReadEnum<OptimizerKind>(r, 2, "optimizer");
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.epsilon = r.f64();
  c.seed = r.u64();
  c.eval_every = r.u64();
  c.models = r.u64s();
  return c;
}

}  // namespace

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (valid: sgd, adam)");
}

TrainConfig TrainConfig::defaults(TaskKind task) {
  TrainConfig c;
  c.task = task;
  const double lr = task == TaskKind::kUtteranceClassification ? 0.1 : 1e-4;
  c.lr_head = lr;
  c.lr_fusion = lr;
  return c;
}

void TrainConfig::validate() const {
  if (steps == 0) throw ConfigError("steps must be >= 1");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (eval_every == 0) throw ConfigError("eval_every must be >= 1");
  for (double lr : {lr_head, lr_fusion}) {
    if (!std::isfinite(lr) || lr < 0.0) {
      throw ConfigError("learning rates must be finite and non-negative");
    }
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(epsilon > 0.0)) {
    throw ConfigError("Adam needs 0 <= beta < 1 and epsilon > 0");
  }
}

void TrainConfig::apply(const KeyValues& kv) {
  kv.reject_unknown({"mode", "task", "steps", "batch_size", "lr_head", "lr_fusion",
                     "p_learnable", "optimizer", "beta1", "beta2", "epsilon", "seed",
                     "eval_every", "models"});
  if (kv.has("mode")) mode = parse_mode(kv.text("mode"));
  if (kv.has("task")) task = parse_task(kv.text("task"));
  if (kv.has("steps")) steps = kv.integer("steps");
  if (kv.has("batch_size")) batch_size = kv.integer("batch_size");
  if (kv.has("lr_head")) lr_head = kv.real("lr_head");
  if (kv.has("lr_fusion")) lr_fusion = kv.real("lr_fusion");
  if (kv.has("p_learnable")) p_learnable = kv.flag("p_learnable");
  if (kv.has("optimizer")) optimizer = parse_optimizer(kv.text("optimizer"));
  if (kv.has("beta1")) beta1 = kv.real("beta1");
  if (kv.has("beta2")) beta2 = kv.real("beta2");
  if (kv.has("epsilon")) epsilon = kv.real("epsilon");
  if (kv.has("seed")) seed = kv.integer("seed");
  if (kv.has("eval_every")) eval_every = kv.integer("eval_every");
  if (kv.has("models")) models = kv.integers("models");
}

Corpus load_corpus(const Manifest& manifest, std::span<const uint64_t> models) {
  const CorpusReport report = validate_corpus(manifest);
  std::vector<uint64_t> selected(models.begin(), models.end());
  if (selected.empty()) {
    for (size_t i = 0; i < manifest.model_count(); ++i) selected.push_back(i);
  }
  Corpus corpus;
  corpus.task = manifest.task_kind;
  corpus.label_space = manifest.label_space;
  for (uint64_t i : selected) {
    if (i >= manifest.model_count()) {
      throw ConfigError("model index " + std::to_string(i) + " out of range; manifest has " +
                        std::to_string(manifest.model_count()) + " models");
    }
    corpus.shapes.push_back(report.model_shapes[i]);
  }
  for (const auto& rec : manifest.records) {
    Example ex;
    ex.id = rec.id;
    for (uint64_t i : selected) ex.stacks.push_back(load_stack(rec.stack_paths[i]));
    if (rec.class_id) ex.target.class_id = *rec.class_id;
    if (rec.transcript) ex.target.transcript = *rec.transcript;
    corpus.examples.push_back(std::move(ex));
  }
  const size_t n = corpus.examples.size();
  corpus.train_count = n - n / 5;
  return corpus;
}

TrainState init_training(const TrainConfig& config, const Corpus& corpus) {
  config.validate();
  if (config.task != corpus.task) {
    throw ConfigError("config task '" + std::string(task_name(config.task)) +
                      "' does not match manifest task '" +
                      std::string(task_name(corpus.task)) + "'");
  }
  if (corpus.train_count == 0) throw ConfigError("corpus has no training records");
  if (config.task == TaskKind::kSequenceTranscription) {
    for (const auto& ex : corpus.examples) {
      const size_t frames = ex.stacks.front().frame_count();
      if (ctc_min_frames(ex.target.transcript) > frames) {
        throw AlignmentError("record " + ex.id + ": transcript cannot be aligned to " +
                             std::to_string(frames) + " frames");
      }
    }
  }
  TrainState state;
  state.config = config;
  state.label_space = corpus.label_space;
  state.shapes = corpus.shapes;
  state.rng = Rng(config.seed);
  state.system = make_system(config.task, config.mode, corpus.shapes,
                             corpus.label_space, config.p_learnable, state.rng);
  const size_t n = parameter_count(state.system);
  state.optimizer.first_moment.assign(n, 0.0);
  state.optimizer.second_moment.assign(n, 0.0);
  ResetOrder(state, corpus.train_count);
  return state;
}

std::vector<uint64_t> next_batch(TrainState& state, size_t train_count) {
  if (state.order.size() != train_count) ResetOrder(state, train_count);
  std::vector<uint64_t> batch;
  batch.reserve(state.config.batch_size);
  for (uint64_t b = 0; b < state.config.batch_size; ++b) {
    if (state.cursor == state.order.size()) ResetOrder(state, train_count);
    batch.push_back(state.order[state.cursor++]);
  }
  return batch;
}

size_t worker_threads() {
  const char* env = std::getenv("FUSEBENCH_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<size_t>(v);
}

double batch_gradient(const FusionSystem& system, const Corpus& corpus,
                      std::span<const uint64_t> batch, FusionSystem& grad) {
  const size_t count = batch.size();
  std::vector<FusionSystem> per_record(count, zeros_like(system));
  std::vector<double> losses(count, 0.0);
  const auto work = [&](size_t k) {
    const Example& ex = corpus.examples.at(batch[k]);
    losses[k] = loss_and_gradient(system, ex.stacks, ex.target, per_record[k]);
  };
  const size_t threads = std::min(worker_threads(), count);
  if (threads <= 1) {
    for (size_t k = 0; k < count; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (size_t k = w; k < count; k += threads) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  grad = zeros_like(system);
  double loss = 0.0;
  for (size_t k = 0; k < count; ++k) {
    AddInto(grad, per_record[k], 1.0);
    loss += losses[k];
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (auto& g : parameter_groups(grad)) {
    for (double& v : g.values) v *= inv;
  }
  return loss * inv;
}

void apply_update(TrainState& state, const FusionSystem& grad) {
  const TrainConfig& c = state.config;
  auto params = parameter_groups(state.system);
  auto grads = parameter_groups(const_cast<FusionSystem&>(grad));
  auto& opt = state.optimizer;
  ++opt.updates;
  const double t = static_cast<double>(opt.updates);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  size_t flat = 0;
  for (size_t g = 0; g < params.size(); ++g) {
    const double lr = params[g].is_head ? c.lr_head : c.lr_fusion;
    auto theta = params[g].values;
    const auto dtheta = grads[g].values;
    for (size_t k = 0; k < theta.size(); ++k, ++flat) {
      if (c.optimizer == OptimizerKind::kSgd) {
        theta[k] -= lr * dtheta[k];
        continue;
      }
      double& m = opt.first_moment[flat];
      double& v = opt.second_moment[flat];
      m = c.beta1 * m + (1.0 - c.beta1) * dtheta[k];
      v = c.beta2 * v + (1.0 - c.beta2) * dtheta[k] * dtheta[k];
      theta[k] -= lr * (m / bc1) / (std::sqrt(v / bc2) + c.epsilon);
    }
  }
}

double train_step(TrainState& state, const Corpus& corpus,
                  std::span<const uint64_t> batch) {
  FusionSystem grad;
  const double loss = batch_gradient(state.system, corpus, batch, grad);
  if (!std::isfinite(loss)) {
    std::string ids;
    for (uint64_t k : batch) ids += (ids.empty() ? "" : ", ") + corpus.examples[k].id;
    throw TrainingError("non-finite loss at step " + std::to_string(state.step + 1) +
                        " (records: " + ids + ")");
  }
  apply_update(state, grad);
  ++state.step;
  return loss;
}

std::vector<MetricRow> run_training(TrainState& state, const Corpus& corpus,
                                    uint64_t steps) {
  std::vector<MetricRow> trace;
  for (uint64_t s = 0; s < steps; ++s) {
    const auto batch = next_batch(state, corpus.train_count);
    train_step(state, corpus, batch);
    const bool last = s + 1 == steps;
    if ((state.step % state.config.eval_every == 0 || last) && !corpus.heldout().empty()) {
      const EvalResult r = evaluate(state.system, corpus.heldout());
      trace.push_back({state.step, r.mean_loss, r.metric_name, r.metric_value});
    }
  }
  return trace;
}

TrainResult train(const TrainConfig& config, const Corpus& corpus) {
  TrainResult result{init_training(config, corpus), {}};
  result.trace = run_training(result.state, corpus, config.steps);
  return result;
}

std::vector<MetricRow> resume_training(TrainState& state, const Corpus& corpus,
                                       uint64_t total_steps) {
  if (total_steps < state.step) {
    throw ConfigError("checkpoint is already at step " + std::to_string(state.step));
  }
  if (corpus.task != state.config.task || corpus.shapes != state.shapes ||
      corpus.label_space != state.label_space) {
    throw ConfigError("corpus does not match the checkpoint");
  }
  state.config.steps = total_steps;
  return run_training(state, corpus, total_steps - state.step);
}

std::string serialize_checkpoint(const TrainState& state) {
  ByteWriter w;
  WriteConfig(w, state.config);
  w.u64(state.label_space);
  w.u64(state.shapes.size());
  for (const auto& s : state.shapes) {
    w.u64(s.layers);
    w.u64(s.dim);
  }
  const auto& f = state.system.fusion;
  w.u32(static_cast<uint32_t>(state.system.task));
  w.u32(static_cast<uint32_t>(f.mode));
  w.u64s(std::vector<uint64_t>(f.layer_counts.begin(), f.layer_counts.end()));
  w.u64(f.layer_logits.size());
  for (const auto& v : f.layer_logits) w.f64s(v);
  w.u8(f.p_learnable ? 1 : 0);
  w.f64s(f.model_logits);
  w.f64s(f.fixed_p);
  w.u64(state.system.heads.size());
  for (const auto& h : state.system.heads) {
    w.u32(static_cast<uint32_t>(h.kind));
    w.u64(h.output_dim());
    w.u64(h.input_dim());
    w.f64s(h.weight.data());
    w.f64s(h.bias);
  }
  w.u64(state.optimizer.updates);
  w.f64s(state.optimizer.first_moment);
  w.f64s(state.optimizer.second_moment);
  w.u64(state.step);
  w.str(state.rng.serialize());
  w.u64s(state.order);
  w.u64(state.cursor);

  ByteWriter header;
  header.u32(kCheckpointVersion);
  header.u64(w.bytes().size());
  return std::string(kCheckpointMagic, 4) + header.bytes() + w.bytes();
}

TrainState deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("not an FCK1 checkpoint (bad magic)");
  }
  ByteReader head(bytes, 4);
  if (head.u32() != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
  if (head.u64() != bytes.size() - 16) throw FormatError("checkpoint payload length mismatch");

  ByteReader r(bytes, 16);
  TrainState state;
  state.config = ReadConfig(r);
  state.label_space = r.u64();
  const uint64_t shape_count = r.u64();
  if (shape_count > bytes.size()) throw FormatError("checkpoint: bad shape count");
  for (uint64_t k = 0; k < shape_count; ++k) {
    StackShape s;
    s.layers = r.u64();
    s.dim = r.u64();
    state.shapes.push_back(s);
  }
  auto& f = state.system.fusion;
  state.system.task = ReadEnum<TaskKind>(r, 2, "task kind");
  f.mode = ReadEnum<FusionMode>(r, 5, "fusion mode");
  for (uint64_t c : r.u64s()) f.layer_counts.push_back(c);
  const uint64_t logit_vectors = r.u64();
  if (logit_vectors > bytes.size()) throw FormatError("checkpoint: bad logit count");
  for (uint64_t k = 0; k < logit_vectors; ++k) f.layer_logits.push_back(r.f64s());
  f.p_learnable = r.u8() != 0;
  f.model_logits = r.f64s();
  f.fixed_p = r.f64s();
  const uint64_t head_count = r.u64();
  if (head_count > bytes.size()) throw FormatError("checkpoint: bad head count");
  for (uint64_t k = 0; k < head_count; ++k) {
    DownstreamHead h;
    h.kind = ReadEnum<HeadKind>(r, 2, "head kind");
    const uint64_t rows = r.u64();
    const uint64_t cols = r.u64();
    auto weights = r.f64s();
    if (weights.size() != rows * cols) throw FormatError("checkpoint: head weight size mismatch");
    h.weight = DenseArray({rows, cols}, std::move(weights));
    h.bias = r.f64s();
    if (h.bias.size() != rows) throw FormatError("checkpoint: head bias size mismatch");
    state.system.heads.push_back(std::move(h));
  }
  state.optimizer.updates = r.u64();
  state.optimizer.first_moment = r.f64s();
  state.optimizer.second_moment = r.f64s();
  state.step = r.u64();
  state.rng = Rng::deserialize(r.str());
  state.order = r.u64s();
  state.cursor = r.u64();
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  try {
    f.check();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  const size_t n = parameter_count(state.system);
  if (state.optimizer.first_moment.size() != n || state.optimizer.second_moment.size() != n ||
      state.cursor > state.order.size()) {
    throw FormatError("checkpoint: optimizer state does not match parameters");
  }
  return state;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::span<const MetricRow> rows, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "step,loss,metric_name,metric_value\n" << std::setprecision(17);
  for (const auto& row : rows) {
    os << row.step << ',' << row.loss << ',' << row.metric_name << ',' << row.metric_value
       << '\n';
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << os.str();
  if (!out) throw IoError("write failed for " + path.string());
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const FusionSystem& system,
                           std::span<const LayerStack> stacks,
                           const Target& target, const GradCheckOptions& options) {
  FusionSystem probe = system;
  FusionSystem analytic = zeros_like(system);
  loss_and_gradient(system, stacks, target, analytic);
  const auto loss_at = [&]() {
    return target_loss(system_posterior(probe, stacks), probe.task, target);
  };

  GradCheckReport report;
  auto params = parameter_groups(probe);
  const auto grads = parameter_groups(analytic);
  for (size_t g = 0; g < params.size(); ++g) {
    auto values = params[g].values;
    std::vector<uint64_t> indices(values.size());
    for (size_t k = 0; k < indices.size(); ++k) indices[k] = k;
    if (indices.size() > options.max_per_group) {
      Rng rng(options.seed + g);
      for (size_t k = 0; k < options.max_per_group; ++k) {
        std::swap(indices[k], indices[k + rng.below(indices.size() - k)]);
      }
      indices.resize(options.max_per_group);
    }
    GroupCheck check;
    check.name = params[g].name;
    check.checked = indices.size();
    bool first = true;
    for (uint64_t k : indices) {
      const double saved = values[k];
      values[k] = saved + options.step;
      const double up = loss_at();
      values[k] = saved - options.step;
      const double down = loss_at();
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = grads[g].values[k] * options.fault_scale;
      const double err = relative_error(a, numeric);
      if (first || err > check.max_rel_error) {
        first = false;
        check.max_rel_error = err;
        check.worst_index = k;
        check.analytic = a;
        check.numeric = numeric;
      }
    }
    check.passed = check.max_rel_error < options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.passed = report.passed && check.passed;
    report.groups.push_back(std::move(check));
  }
  return report;
}

}  // namespace fusebench
