// Copyright 2026 The TeachPro Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace teachpro {

// Flat `key = value` configuration. Every recognised key has a built-in
// default; unknown keys are rejected so typos surface early. Lines starting
// with '#' are comments.
class Config {
 public:
  // Built-in defaults.
  Config();

  // Throws ConfigError on unknown keys or malformed lines.
  static Config parse(std::string_view text);
  static Config from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  // "key=value".
  void apply_override(std::string_view assignment);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  // Sorted `key = value` lines.
  std::string to_text() const;
  // Digest of the keys that determine model structure and forward behaviour.
  uint64_t model_hash() const;
  std::string model_text() const;

  static bool is_known_key(std::string_view key);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace teachpro
