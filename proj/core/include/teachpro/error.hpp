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

#include <stdexcept>
#include <string>

namespace teachpro {

// Base of every error thrown by the library. The CLI maps any Error to exit
// status 1 with a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define TEACHPRO_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// data
TEACHPRO_DEFINE_ERROR(MalformedRow);
TEACHPRO_DEFINE_ERROR(EmptyDataset);
TEACHPRO_DEFINE_ERROR(BadRatios);
TEACHPRO_DEFINE_ERROR(EmptyText);
TEACHPRO_DEFINE_ERROR(SpanNotFound);
TEACHPRO_DEFINE_ERROR(DegenerateColumn);

// encoder_frontend
TEACHPRO_DEFINE_ERROR(ProviderUnavailable);
TEACHPRO_DEFINE_ERROR(ParseFileMismatch);

// graph_synergy / evidence_encoder / prediction_head
TEACHPRO_DEFINE_ERROR(ZeroDegree);
TEACHPRO_DEFINE_ERROR(EmptySnippet);
TEACHPRO_DEFINE_ERROR(NonPositiveAlpha);
TEACHPRO_DEFINE_ERROR(InvalidWeights);
TEACHPRO_DEFINE_ERROR(ShapeMismatch);

// training
TEACHPRO_DEFINE_ERROR(NonFiniteLoss);
TEACHPRO_DEFINE_ERROR(EmptySplit);
TEACHPRO_DEFINE_ERROR(ConfigMismatch);
TEACHPRO_DEFINE_ERROR(CorruptCheckpoint);
TEACHPRO_DEFINE_ERROR(ConfigError);

// metrics
TEACHPRO_DEFINE_ERROR(LengthMismatch);
TEACHPRO_DEFINE_ERROR(NonDistribution);
TEACHPRO_DEFINE_ERROR(EmptyGold);

#undef TEACHPRO_DEFINE_ERROR

}  // namespace teachpro
