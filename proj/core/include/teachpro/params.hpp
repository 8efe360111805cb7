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
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "teachpro/autograd.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

// Named trainable tensors in registration order. Names follow the
// checkpoint naming scheme ("syn.W.0", "head.WC", ...).
class ParamStore {
 public:
  ag::Var add(std::string name, Matrix init);
  const ag::Var& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<std::pair<std::string, ag::Var>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, ag::Var>>& entries() { return entries_; }

  // Sum of tensor sizes, counted by enumerating the registered tensors.
  size_t parameter_count() const;
  size_t parameter_count(std::string_view prefix) const;
  void zero_grad();
  uint64_t checksum() const;

 private:
  std::vector<std::pair<std::string, ag::Var>> entries_;
  std::unordered_map<std::string, size_t> index_;
};

// Per-forward state. Dropout is active only when training is true.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
};

// Inverted dropout: surviving entries are scaled by 1 / (1 - rate).
ag::Var dropout(const ag::Var& x, double rate, ForwardContext& ctx);

// Glorot-uniform fan_in x fan_out matrix.
Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

}  // namespace teachpro
