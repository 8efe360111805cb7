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

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teachpro/tokenizer.hpp"

namespace teachpro {

inline constexpr int kNumDimensions = 5;
inline constexpr int kNumClasses = 3;

// Field prefixes of the dataset schema, in dimension order.
inline constexpr std::array<std::string_view, kNumDimensions> kDimensionNames = {
    "Professionalism", "Occupational", "Effectiveness", "Quality", "Other"};

// One student comment. Scores: 0 = negative, 1 = neutral / not mentioned,
// 2 = positive. A non-empty reason is a verbatim substring of text.
struct CommentRecord {
  std::string professor_name;
  std::string text;
  std::array<int, kNumDimensions> scores{};
  std::array<std::string, kNumDimensions> reasons;

  bool operator==(const CommentRecord&) const = default;
};

// Throws MalformedRow describing the first violated invariant.
void validate_record(const CommentRecord& record);

enum class DataFormat { kJsonl, kCsv };

DataFormat parse_data_format(std::string_view name);
// Picks the format from the file extension (.csv -> CSV, otherwise JSONL).
DataFormat format_from_path(const std::filesystem::path& path);

// Reads and validates every row. Throws MalformedRow (with the line number)
// on the first bad row and EmptyDataset when no rows are present.
std::vector<CommentRecord> load_dataset(const std::filesystem::path& path, DataFormat format);
std::vector<CommentRecord> read_jsonl(std::istream& in);
std::vector<CommentRecord> read_csv(std::istream& in);

void write_jsonl(std::span<const CommentRecord> records, std::ostream& out);
void write_csv(std::span<const CommentRecord> records, std::ostream& out);
void save_dataset(std::span<const CommentRecord> records, const std::filesystem::path& path,
                  DataFormat format);

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct DatasetSplit {
  std::vector<CommentRecord> train;
  std::vector<CommentRecord> validation;
  std::vector<CommentRecord> test;
  uint64_t seed = 0;
};

// Shuffles with the seed, then takes floor(train * n) for training,
// round(validation * n) for validation and the remainder for test.
// Throws BadRatios unless the ratios are non-negative and sum to 1 within 1e-9.
DatasetSplit split_dataset(std::span<const CommentRecord> records, SplitRatios ratios,
                           uint64_t seed);

// Sorted indices of tokens overlapping the first occurrence of the reason
// for `dim` in the record text. Empty when the reason is empty or when every
// overlapping token was truncated away. Throws SpanNotFound when the reason
// is not a substring of the text.
std::vector<int> rationale_token_set(const CommentRecord& record, int dim,
                                     const TokenSequence& tokens);

struct SyntheticOptions {
  size_t n_records = 200;
  // Number of distinct filler words mixed between evidence phrases.
  size_t vocab_size = 50;
  uint64_t seed = 0;
  // Per-dimension label prior for scores 0, 1, 2.
  std::array<double, kNumClasses> prior = {0.3, 0.4, 0.3};
  // Filler words placed before each phrase: uniform in [0, max_filler].
  int max_filler = 3;
  // Emit the five dimension sentences in random order instead of schema order.
  bool shuffle_dimensions = false;
};

// Template-phrase corpus. The phrase picked for dimension i fixes score i and
// is stored verbatim as reason i. Lexicons of different (dimension, score)
// cells share no words, so labels are linearly separable from the text.
std::vector<CommentRecord> generate_synthetic(const SyntheticOptions& options);
std::vector<CommentRecord> generate_synthetic(size_t n_records, size_t vocab_size,
                                              uint64_t seed);

// Phrase lexicon of one (dimension, score) cell.
std::span<const std::string_view> synthetic_phrases(int dim, int score);

// Pearson correlation of the five score columns (5 x 5). Throws
// EmptyDataset for fewer than two records and DegenerateColumn when a
// column has zero variance.
Eigen::MatrixXd label_correlation(std::span<const CommentRecord> records);

}  // namespace teachpro
