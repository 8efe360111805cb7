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

#include "teachpro/params.hpp"

#include <cmath>

#include "teachpro/encoder_frontend.hpp"
#include "teachpro/error.hpp"

namespace teachpro {

ag::Var ParamStore::add(std::string name, Matrix init) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter " + name);
  auto var = ag::Var::parameter(std::move(init));
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), var);
  return var;
}

const ag::Var& ParamStore::get(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown parameter " + std::string(name));
  return entries_[it->second].second;
}

bool ParamStore::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

size_t ParamStore::parameter_count() const { return parameter_count(""); }

size_t ParamStore::parameter_count(std::string_view prefix) const {
  size_t total = 0;
  for (const auto& [name, var] : entries_) {
    if (name.starts_with(prefix)) total += static_cast<size_t>(var.value().size());
  }
  return total;
}

void ParamStore::zero_grad() {
  for (auto& [name, var] : entries_) var.zero_grad();
}

uint64_t ParamStore::checksum() const {
  uint64_t h = 0;
  for (const auto& [name, var] : entries_) h = matrix_checksum(var.value(), mix64(h, fnv1a(name)));
  return h;
}

ag::Var dropout(const ag::Var& x, double rate, ForwardContext& ctx) {
  if (!ctx.training || rate <= 0.0) return x;
  if (ctx.rng == nullptr) throw ConfigError("training forward needs a dropout stream");
  const double keep = 1.0 - rate;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < mask.cols(); ++j)
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      mask(i, j) = ctx.rng->uniform() < keep ? 1.0 / keep : 0.0;
  return ag::apply_mask(x, mask);
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * rng.normal();
  return m;
}

}  // namespace teachpro
