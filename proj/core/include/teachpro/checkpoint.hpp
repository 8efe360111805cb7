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

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "teachpro/config.hpp"
#include "teachpro/model.hpp"
#include "teachpro/params.hpp"

namespace teachpro {

// Single-file archive of named tensors plus the configuration they were
// trained under.
//
//   "TPCK" | u32 version | u64 model hash | u64 len, config text |
//   u64 count | { u64 len, name | u64 rows | u64 cols | doubles } |
//   u64 FNV-1a of everything before it
//
// Integers and doubles are little-endian.
struct Checkpoint {
  uint64_t config_hash = 0;
  std::string config_text;
  std::vector<std::pair<std::string, Matrix>> tensors;
};

inline constexpr uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const ParamStore& params, const Config& config);
void save_checkpoint(const ParamStore& params, const Config& config,
                     const std::filesystem::path& path);

// Throws CorruptCheckpoint on bad magic, truncation or checksum failure.
Checkpoint decode_checkpoint(const std::string& bytes);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies the stored tensors into `params`. Throws ConfigMismatch when the
// stored hash differs from `expected_hash` or does not match the stored
// config text, and CorruptCheckpoint when names or shapes disagree.
void restore_parameters(const Checkpoint& checkpoint, ParamStore& params, uint64_t expected_hash);

struct LoadedModel {
  Config config;
  std::unique_ptr<TeachProModel> model;
};

// Rebuilds the model from the stored config (providers included) and loads
// its tensors.
LoadedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace teachpro
