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

#include "teachpro/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "teachpro/error.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

namespace {

std::string score_key(int dim) { return std::string(kDimensionNames[dim]) + "_score"; }
std::string reason_key(int dim) { return std::string(kDimensionNames[dim]) + "_reason"; }

std::string at_line(size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

void validate_record(const CommentRecord& record) {
  if (record.text.empty()) throw MalformedRow("empty comments field");
  for (int d = 0; d < kNumDimensions; ++d) {
    const int s = record.scores[d];
    if (s < 0 || s > 2) {
      throw MalformedRow(score_key(d) + " = " + std::to_string(s) + " outside 0..2");
    }
    const std::string& reason = record.reasons[d];
    if (!reason.empty() && record.text.find(reason) == std::string::npos) {
      throw MalformedRow(reason_key(d) + " is not a substring of comments");
    }
  }
}

DataFormat parse_data_format(std::string_view name) {
  if (name == "jsonl") return DataFormat::kJsonl;
  if (name == "csv") return DataFormat::kCsv;
  throw ConfigError("unknown data format '" + std::string(name) + "'");
}

DataFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DataFormat::kCsv : DataFormat::kJsonl;
}

// --- JSONL ------------------------------------------------------------------

namespace {

std::string json_string(const nlohmann::json& row, const std::string& key, bool allow_null) {
  const auto it = row.find(key);
  if (it == row.end()) throw MalformedRow("missing field " + key);
  if (it->is_null() && allow_null) return {};
  if (!it->is_string()) throw MalformedRow("field " + key + " is not a string");
  return it->get<std::string>();
}

int json_score(const nlohmann::json& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end()) throw MalformedRow("missing field " + key);
  if (it->is_number_integer()) return it->get<int>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (v == std::floor(v)) return static_cast<int>(v);
  }
  throw MalformedRow("field " + key + " is not an integer");
}

}  // namespace

std::vector<CommentRecord> read_jsonl(std::istream& in) {
  std::vector<CommentRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json row;
      try {
        row = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRow(std::string("invalid JSON (") + e.what() + ")");
      }
      if (!row.is_object()) throw MalformedRow("row is not a JSON object");
      CommentRecord r;
      r.professor_name = json_string(row, "professor_name", true);
      r.text = json_string(row, "comments", false);
      for (int d = 0; d < kNumDimensions; ++d) {
        r.scores[d] = json_score(row, score_key(d));
        r.reasons[d] = json_string(row, reason_key(d), true);
      }
      validate_record(r);
      records.push_back(std::move(r));
    } catch (const MalformedRow& e) {
      throw MalformedRow(at_line(line_no) + e.what());
    }
  }
  if (records.empty()) throw EmptyDataset("no rows");
  return records;
}

void write_jsonl(std::span<const CommentRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["professor_name"] = r.professor_name;
    row["comments"] = r.text;
    for (int d = 0; d < kNumDimensions; ++d) {
      row[score_key(d)] = r.scores[d];
      row[reason_key(d)] = r.reasons[d];
    }
    out << row.dump() << '\n';
  }
}

// --- CSV (RFC 4180) ----------------------------------------------------------

namespace {

// Reads one record; quoted fields may span lines. Returns false at EOF.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (in_quotes) throw MalformedRow("unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

int parse_score(const std::string& s, const std::string& key) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw MalformedRow("field " + key + " is not an integer");
  }
  if (used != s.size()) throw MalformedRow("field " + key + " is not an integer");
  return v;
}

}  // namespace

std::vector<CommentRecord> read_csv(std::istream& in) {
  std::vector<std::string> fields;
  size_t line_no = 0;
  if (!read_csv_record(in, fields, line_no)) throw EmptyDataset("no header");
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
  auto column = [&](const std::string& key) {
    const auto it = col.find(key);
    if (it == col.end()) throw MalformedRow("header lacks column " + key);
    return it->second;
  };
  const size_t name_col = column("professor_name");
  const size_t text_col = column("comments");
  std::array<size_t, kNumDimensions> score_cols{}, reason_cols{};
  for (int d = 0; d < kNumDimensions; ++d) {
    score_cols[d] = column(score_key(d));
    reason_cols[d] = column(reason_key(d));
  }

  std::vector<CommentRecord> records;
  while (true) {
    const size_t row_line = line_no + 1;
    if (!read_csv_record(in, fields, line_no)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;
    try {
      if (fields.size() != col.size()) {
        throw MalformedRow("expected " + std::to_string(col.size()) + " fields, got " +
                           std::to_string(fields.size()));
      }
      CommentRecord r;
      r.professor_name = fields[name_col];
      r.text = fields[text_col];
      for (int d = 0; d < kNumDimensions; ++d) {
        r.scores[d] = parse_score(fields[score_cols[d]], score_key(d));
        r.reasons[d] = fields[reason_cols[d]];
      }
      validate_record(r);
      records.push_back(std::move(r));
    } catch (const MalformedRow& e) {
      throw MalformedRow(at_line(row_line) + e.what());
    }
  }
  if (records.empty()) throw EmptyDataset("no rows");
  return records;
}

void write_csv(std::span<const CommentRecord> records, std::ostream& out) {
  out << "professor_name,comments";
  for (int d = 0; d < kNumDimensions; ++d) out << ',' << score_key(d) << ',' << reason_key(d);
  out << '\n';
  for (const auto& r : records) {
    out << csv_quote(r.professor_name) << ',' << csv_quote(r.text);
    for (int d = 0; d < kNumDimensions; ++d) {
      out << ',' << r.scores[d] << ',' << csv_quote(r.reasons[d]);
    }
    out << '\n';
  }
}

std::vector<CommentRecord> load_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmptyDataset("cannot open " + path.string());
  return format == DataFormat::kCsv ? read_csv(in) : read_jsonl(in);
}

void save_dataset(std::span<const CommentRecord> records, const std::filesystem::path& path,
                  DataFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  if (format == DataFormat::kCsv) {
    write_csv(records, out);
  } else {
    write_jsonl(records, out);
  }
}

// --- Split ------------------------------------------------------------------

DatasetSplit split_dataset(std::span<const CommentRecord> records, SplitRatios ratios,
                           uint64_t seed) {
  const double total = ratios.train + ratios.validation + ratios.test;
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0 ||
      std::abs(total - 1.0) > 1e-9) {
    throw BadRatios("ratios must be non-negative and sum to 1");
  }
  if (records.empty()) throw EmptyDataset("nothing to split");

  const size_t n = records.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix64(seed));
  rng.shuffle(order);

  // The small epsilon keeps products such as 0.7 * 10 = 6.9999... on the
  // intended side of the floor.
  const auto n_train = std::min(n, static_cast<size_t>(std::floor(ratios.train * n + 1e-9)));
  const auto n_val = std::min(n - n_train, static_cast<size_t>(std::floor(ratios.validation * n + 0.5)));

  DatasetSplit split;
  split.seed = seed;
  for (size_t i = 0; i < n; ++i) {
    const CommentRecord& r = records[order[i]];
    if (i < n_train) {
      split.train.push_back(r);
    } else if (i < n_train + n_val) {
      split.validation.push_back(r);
    } else {
      split.test.push_back(r);
    }
  }
  return split;
}

// --- Rationale spans ----------------------------------------------------------

std::vector<int> rationale_token_set(const CommentRecord& record, int dim,
                                     const TokenSequence& tokens) {
  const std::string& reason = record.reasons.at(static_cast<size_t>(dim));
  if (reason.empty()) return {};
  const size_t begin = record.text.find(reason);
  if (begin == std::string::npos) {
    throw SpanNotFound(std::string(kDimensionNames[dim]) + " reason not found in comment");
  }
  const size_t end = begin + reason.size();
  std::vector<int> out;
  for (size_t i = 0; i < tokens.spans.size(); ++i) {
    const CharSpan s = tokens.spans[i];
    if (s.begin < end && begin < s.end) out.push_back(static_cast<int>(i));
  }
  return out;
}

// --- Synthetic corpus -----------------------------------------------------------

namespace {

using Lexicon = std::array<std::string_view, 3>;

// [dimension][score]
constexpr std::array<std::array<Lexicon, kNumClasses>, kNumDimensions> kPhrases = {{
    {{
        {"clueless regarding chemistry", "misstates basic facts", "shaky subject grasp"},
        {"covers required syllabus", "reads from slides", "adequate background knowledge"},
        {"brilliant domain expert", "deep theoretical mastery", "knows physics inside out"},
    }},
    {{
        {"rude during visits", "unfair harsh grader", "ignores emails"},
        {"keeps usual schedule", "neutral demeanor", "follows department policy"},
        {"genuinely cares about pupils", "fair honest evaluator", "always responsive"},
    }},
    {{
        {"nobody retained anything", "exam averages plummeted", "left us confused"},
        {"grades seemed average", "moderate workload", "picked up basics"},
        {"learned tremendously much", "scores improved dramatically", "skills grew quickly"},
    }},
    {{
        {"boring dreary lectures", "chaotic noisy room", "sleepy dull sessions"},
        {"ordinary meetings", "typical lecture format", "regular periods"},
        {"engaging lively discussions", "fun energetic atmosphere", "vibrant interactive classes"},
    }},
    {{
        {"overpriced useless textbook", "parking nightmare", "website constantly broken"},
        {"mentions readings occasionally", "uses online portal", "hosts optional reviews"},
        {"free extra tutoring", "generous bonus opportunities", "amazing museum trips"},
    }},
}};

constexpr std::array<std::string_view, 60> kFiller = {
    "the",      "class",    "professor", "semester", "this",     "was",   "and",
    "i",        "took",     "course",    "overall",  "really",   "also",  "but",
    "we",       "had",      "he",        "she",      "they",     "it",    "very",
    "quite",    "some",     "in",        "on",       "for",      "with",  "of",
    "to",       "a",        "my",        "our",      "year",     "last",  "midterm",
    "final",    "homework", "week",      "day",      "time",     "notes", "lab",
    "group",    "project",  "topic",     "student",  "book",     "because", "so",
    "then",     "while",    "though",    "still",    "just",     "maybe", "every",
    "again",    "honestly", "anyway",    "lately"};

std::string filler_word(size_t i) {
  if (i < kFiller.size()) return std::string(kFiller[i]);
  return "w" + std::to_string(i);
}

int sample_label(Rng& rng, const std::array<double, kNumClasses>& prior) {
  const double total = prior[0] + prior[1] + prior[2];
  double u = rng.uniform() * total;
  for (int c = 0; c < kNumClasses - 1; ++c) {
    if (u < prior[c]) return c;
    u -= prior[c];
  }
  return kNumClasses - 1;
}

}  // namespace

std::span<const std::string_view> synthetic_phrases(int dim, int score) {
  return kPhrases.at(static_cast<size_t>(dim)).at(static_cast<size_t>(score));
}

std::vector<CommentRecord> generate_synthetic(const SyntheticOptions& options) {
  Rng rng(mix64(options.seed, 0x73796e7468ULL));
  const size_t vocab = std::max<size_t>(options.vocab_size, 1);
  std::vector<CommentRecord> out;
  out.reserve(options.n_records);
  for (size_t r = 0; r < options.n_records; ++r) {
    CommentRecord rec;
    rec.professor_name = "prof_" + std::to_string(rng.index(std::max<size_t>(options.n_records / 4, 1)));
    std::array<int, kNumDimensions> order = {0, 1, 2, 3, 4};
    if (options.shuffle_dimensions) {
      for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    }
    for (int d = 0; d < kNumDimensions; ++d) {
      rec.scores[d] = sample_label(rng, options.prior);
      const auto lex = synthetic_phrases(d, rec.scores[d]);
      rec.reasons[d] = std::string(lex[rng.index(lex.size())]);
    }
    for (int d : order) {
      if (!rec.text.empty()) rec.text += ' ';
      const auto n_fill = rng.index(static_cast<uint64_t>(options.max_filler) + 1);
      for (uint64_t f = 0; f < n_fill; ++f) {
        rec.text += filler_word(rng.index(vocab));
        rec.text += ' ';
      }
      rec.text += rec.reasons[d];
      rec.text += '.';
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CommentRecord> generate_synthetic(size_t n_records, size_t vocab_size,
                                              uint64_t seed) {
  SyntheticOptions opts;
  opts.n_records = n_records;
  opts.vocab_size = vocab_size;
  opts.seed = seed;
  return generate_synthetic(opts);
}

// --- Label correlation ------------------------------------------------------------

Eigen::MatrixXd label_correlation(std::span<const CommentRecord> records) {
  if (records.size() < 2) throw EmptyDataset("correlation needs at least two records");
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd x(n, kNumDimensions);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < kNumDimensions; ++d) x(i, d) = records[static_cast<size_t>(i)].scores[d];
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm().transpose();
  for (int d = 0; d < kNumDimensions; ++d) {
    if (norms(d) == 0.0) {
      throw DegenerateColumn(std::string(kDimensionNames[d]) + "_score has zero variance");
    }
  }
  Eigen::MatrixXd corr = centered.transpose() * centered;
  for (int i = 0; i < kNumDimensions; ++i) {
    for (int j = 0; j < kNumDimensions; ++j) {
      corr(i, j) = i == j ? 1.0 : std::clamp(corr(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
    }
  }
  return corr;
}

}  // namespace teachpro
