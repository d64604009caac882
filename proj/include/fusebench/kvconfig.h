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

// Flat "key = value" configuration files. '#' starts a comment; list
// values are comma-separated.

#ifndef FUSEBENCH_KVCONFIG_H_
#define FUSEBENCH_KVCONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fusebench {

class KeyValues {
 public:
  // ConfigError when the file is missing or a line is malformed.
  static KeyValues parse_file(const std::filesystem::path& path);
  static KeyValues parse(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string text(const std::string& key) const;
  uint64_t integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<uint64_t> integers(const std::string& key) const;

  // ConfigError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
};

}  // namespace fusebench

#endif  // FUSEBENCH_KVCONFIG_H_
