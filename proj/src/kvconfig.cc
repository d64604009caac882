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

#include "fusebench/kvconfig.h"

#include <fstream>
#include <sstream>

#include "fusebench/errors.h"

namespace fusebench {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  return out;
}

}  // namespace

KeyValues KeyValues::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty() || kv.values_.count(key) != 0) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty or repeated key");
    }
    kv.values_[key] = Trim(line.substr(eq + 1));
  }
  return kv;
}

std::string KeyValues::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  return it->second;
}

uint64_t KeyValues::integer(const std::string& key) const {
  const std::string v = text(key);
  try {
    size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<uint64_t>(n);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' needs a non-negative integer, got '" +
                      v + "'");
  }
}

double KeyValues::real(const std::string& key) const {
  const std::string v = text(key);
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' needs a number, got '" + v + "'");
  }
}

bool KeyValues::flag(const std::string& key) const {
  const std::string v = text(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(origin_ + ": key '" + key + "' needs true/false, got '" + v + "'");
}

std::vector<double> KeyValues::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : SplitList(text(key))) {
    out.push_back(KeyValues::parse(key + "=" + item, origin_).real(key));
  }
  return out;
}

std::vector<uint64_t> KeyValues::integers(const std::string& key) const {
  std::vector<uint64_t> out;
  for (const auto& item : SplitList(text(key))) {
    out.push_back(KeyValues::parse(key + "=" + item, origin_).integer(key));
  }
  return out;
}

void KeyValues::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (known.count(key) == 0) throw ConfigError(origin_ + ": unknown key '" + key + "'");
  }
}

}  // namespace fusebench
