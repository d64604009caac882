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

#include "fusebench/stackio.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fusebench/errors.h"
#include "json.hpp"

namespace fusebench {
namespace {

constexpr std::array<char, 4> kStackMagic = {'L', 'S', 'K', '1'};
constexpr size_t kHeaderBytes = 16;

void PutU32(std::string& out, uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

uint32_t GetU32(const std::string& in, size_t offset) {
  uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[offset + b]))
         << (8 * b);
  }
  return v;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

LayerStack::LayerStack(DenseArray v) : values(std::move(v)) {
  if (values.rank() != 3) throw ShapeError("LayerStack: expected [L, T, d]");
}

void save_stack(const LayerStack& stack, const std::filesystem::path& path) {
  std::string bytes(kStackMagic.begin(), kStackMagic.end());
  bytes.reserve(kHeaderBytes + 4 * stack.values.size());
  PutU32(bytes, static_cast<uint32_t>(stack.layer_count()));
  PutU32(bytes, static_cast<uint32_t>(stack.frame_count()));
  PutU32(bytes, static_cast<uint32_t>(stack.dim()));
  for (double v : stack.values.data()) {
    PutU32(bytes, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

LayerStack load_stack(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  if (bytes.size() < kHeaderBytes ||
      std::memcmp(bytes.data(), kStackMagic.data(), 4) != 0) {
    throw FormatError(path.string() + ": not an LSK1 stack (bad magic)");
  }
  const size_t layers = GetU32(bytes, 4);
  const size_t frames = GetU32(bytes, 8);
  const size_t dim = GetU32(bytes, 12);
  if (layers == 0 || frames == 0 || dim == 0) {
    throw FormatError(path.string() + ": zero extent in header");
  }
  const size_t count = layers * frames * dim;
  const size_t expected = kHeaderBytes + 4 * count;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": payload size mismatch, expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  std::vector<double> values(count);
  for (size_t k = 0; k < count; ++k) {
    const float f = std::bit_cast<float>(GetU32(bytes, kHeaderBytes + 4 * k));
    if (!std::isfinite(f)) {
      throw DataError(path.string() + ": non-finite value at flat index " +
                      std::to_string(k));
    }
    values[k] = f;
  }
  return LayerStack(DenseArray({layers, frames, dim}, std::move(values)));
}

std::string_view task_name(TaskKind kind) {
  return kind == TaskKind::kUtteranceClassification ? "sid" : "asr";
}

TaskKind parse_task(std::string_view name) {
  if (name == "sid") return TaskKind::kUtteranceClassification;
  if (name == "asr") return TaskKind::kSequenceTranscription;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (valid: sid, asr)");
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();

  Manifest manifest;
  std::optional<TaskKind> kind;
  std::optional<size_t> declared;
  size_t max_label = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ManifestError(where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("stacks") ||
        !obj["stacks"].is_array()) {
      throw ManifestError(where + ": record needs 'id' and 'stacks'");
    }
    UtteranceRecord rec;
    rec.id = obj["id"].is_string() ? obj["id"].get<std::string>()
                                   : obj["id"].dump();
    const bool has_label = obj.contains("label");
    const bool has_transcript = obj.contains("transcript");
    if (has_label == has_transcript) {
      throw ManifestError(where +
                          ": exactly one of 'label' / 'transcript' required");
    }
    const TaskKind rec_kind = has_label ? TaskKind::kUtteranceClassification
                                        : TaskKind::kSequenceTranscription;
    if (kind && *kind != rec_kind) {
      throw ManifestError(where + ": mixed task kinds in one manifest");
    }
    kind = rec_kind;
    try {
      if (has_label) {
        rec.class_id = obj["label"].get<int>();
        if (*rec.class_id < 0) throw ManifestError(where + ": negative label");
        max_label = std::max(max_label, static_cast<size_t>(*rec.class_id));
      } else {
        rec.transcript = obj["transcript"].get<std::vector<int>>();
        for (int tok : *rec.transcript) {
          if (tok < 1) {
            throw ManifestError(where + ": token ids must be >= 1 (0 is blank)");
          }
          max_label = std::max(max_label, static_cast<size_t>(tok));
        }
      }
      for (const auto& p : obj["stacks"]) {
        std::filesystem::path sp(p.get<std::string>());
        rec.stack_paths.push_back(sp.is_absolute() ? sp : base / sp);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ManifestError(where + ": " + e.what());
    }
    const char* space_key = has_label ? "class_count" : "vocab_size";
    if (obj.contains(space_key)) {
      const size_t n = obj[space_key].get<size_t>();
      if (declared && *declared != n) {
        throw ManifestError(where + ": conflicting " + space_key);
      }
      declared = n;
    }
    if (!manifest.records.empty() &&
        manifest.records.front().stack_paths.size() != rec.stack_paths.size()) {
      throw ManifestError(where + ": record has " +
                          std::to_string(rec.stack_paths.size()) +
                          " stacks, earlier records have " +
                          std::to_string(manifest.model_count()));
    }
    manifest.records.push_back(std::move(rec));
  }

  manifest.task_kind = kind.value_or(TaskKind::kUtteranceClassification);
  if (manifest.records.empty()) return manifest;
  const size_t inferred = std::max<size_t>(max_label + 1, 2);
  if (declared) {
    if (*declared <= max_label) {
      throw ManifestError(path.string() + ": label id " +
                          std::to_string(max_label) +
                          " outside declared label space " +
                          std::to_string(*declared));
    }
    manifest.label_space = *declared;
  } else {
    manifest.label_space = inferred;
  }
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  const auto base = path.parent_path();
  std::ostringstream os;
  for (const auto& rec : manifest.records) {
    nlohmann::ordered_json obj;
    obj["id"] = rec.id;
    if (manifest.task_kind == TaskKind::kUtteranceClassification) {
      obj["label"] = rec.class_id.value();
      obj["class_count"] = manifest.label_space;
    } else {
      obj["transcript"] = rec.transcript.value();
      obj["vocab_size"] = manifest.label_space;
    }
    auto stacks = nlohmann::ordered_json::array();
    for (const auto& sp : rec.stack_paths) {
      const auto rel = sp.lexically_relative(base);
      const bool inside = !rel.empty() && *rel.begin() != "..";
      stacks.push_back((inside ? rel : sp).generic_string());
    }
    obj["stacks"] = std::move(stacks);
    os << obj.dump() << '\n';
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << os.str();
  if (!out) throw IoError("write failed for " + path.string());
}

CorpusReport validate_corpus(
    const Manifest& manifest,
    const std::optional<std::vector<StackShape>>& expected) {
  CorpusReport report;
  const size_t m = manifest.model_count();
  if (expected && expected->size() != m) {
    report.errors.push_back("expected shapes for " +
                            std::to_string(expected->size()) +
                            " models, manifest has " + std::to_string(m));
  }
  for (const auto& rec : manifest.records) {
    std::vector<size_t> frames;
    for (size_t i = 0; i < rec.stack_paths.size(); ++i) {
      const LayerStack stack = load_stack(rec.stack_paths[i]);
      const StackShape shape{stack.layer_count(), stack.dim()};
      if (report.model_shapes.size() <= i) {
        report.model_shapes.push_back(shape);
      } else if (report.model_shapes[i] != shape) {
        report.errors.push_back(
            "record " + rec.id + ": model " + std::to_string(i) + " has (L=" +
            std::to_string(shape.layers) + ", d=" + std::to_string(shape.dim) +
            "), earlier records have (L=" +
            std::to_string(report.model_shapes[i].layers) + ", d=" +
            std::to_string(report.model_shapes[i].dim) + ")");
      }
      if (expected && i < expected->size() && (*expected)[i] != shape) {
        report.errors.push_back("record " + rec.id + ": model " +
                                std::to_string(i) +
                                " shape differs from the expected shape");
      }
      frames.push_back(stack.frame_count());
    }
    bool frames_agree = true;
    for (size_t f : frames) frames_agree = frames_agree && f == frames.front();
    if (!frames_agree) {
      std::string detail;
      for (size_t f : frames) detail += (detail.empty() ? "" : ", ") + std::to_string(f);
      report.errors.push_back("record " + rec.id +
                              ": models disagree on frame count (" + detail +
                              ")");
    }
    report.frame_counts.push_back(frames.empty() ? 0 : frames.front());
  }
  for (const auto& s : report.model_shapes) {
    if (s.dim != report.model_shapes.front().dim) {
      report.feature_fusion_available = false;
    }
  }
  if (!report.errors.empty()) {
    std::string msg = "corpus validation failed:";
    for (const auto& e : report.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return report;
}

}  // namespace fusebench
