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

#include <gtest/gtest.h>

#include <cmath>

#include "suites.hpp"

namespace testing_support {
namespace {

TEST(Suites, FormulaOracles) {
  const SuiteResult r = formula_oracle_suite(100, 1);
  EXPECT_TRUE(r.pass) << r.summary();
  EXPECT_GE(r.checks, 100);
}

TEST(Suites, Gradients) {
  const SuiteResult r = gradient_suite(2);
  EXPECT_TRUE(r.pass) << r.summary();
}

TEST(Suites, ProbabilityRows) {
  const SuiteResult r = probability_suite(200, 3);
  EXPECT_TRUE(r.pass) << r.summary();
}

TEST(Suites, MetricOracles) {
  const SuiteResult r = metric_oracle_suite(100, 4);
  EXPECT_TRUE(r.pass) << r.summary();
}

TEST(Suites, DetectInjectedErrors) {
  SuiteResult r;
  r.record("x", 1e-7, 1e-6);
  EXPECT_TRUE(r.pass);
  r.record("x", 2e-6, 1e-6);
  EXPECT_FALSE(r.pass);
  SuiteResult nan;
  nan.record("y", std::nan(""), 1.0);
  EXPECT_FALSE(nan.pass);
}

}  // namespace
}  // namespace testing_support
