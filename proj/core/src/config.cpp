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

#include "teachpro/config.hpp"

#include <fstream>
#include <sstream>

#include "teachpro/error.hpp"
#include "teachpro/rng.hpp"

namespace teachpro {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"seed", "0"},
      {"data.path", ""},
      {"data.format", "jsonl"},
      {"data.max_len", "128"},
      {"data.split", "0.70,0.15,0.15"},
      {"encoder.provider", "stub"},
      {"encoder.dim", "768"},
      {"encoder.file", ""},
      {"encoder.seed", "0"},
      {"encoder.position_scale", "0.1"},
      {"parser.provider", "stub"},
      {"parser.file", ""},
      {"parser.stub_score", "0.9"},
      {"model.mode", "full"},
      {"synergy.layers", "3"},
      {"synergy.tau", "1.0"},
      {"synergy.eta", "0.3"},
      {"synergy.dropout", "0.1"},
      {"synergy.fuse_init_gain", "20"},
      {"loss.diff_reg_weight", "0"},
      {"dims.words", "Professionalism,Occupational,Effectiveness,Quality,Other"},
      {"dims.trainable_queries", "false"},
      {"refine.enabled", "true"},
      {"refine.eval_snippets", "uniform"},
      {"dyt.alpha_init", "0.5"},
      {"head.mode", "shared"},
      {"head.class_weights", "1,1,1"},
      {"head.dropout", "0.1"},
      {"train.batch_size", "64"},
      {"train.epochs", "10"},
      {"train.lr_init", "0.002"},
      {"train.lr_min", "0.0005"},
      {"train.t_max", "10"},
      {"train.grad_clip", "5.0"},
      {"train.weight_decay", "0"},
      {"train.adam_beta1", "0.9"},
      {"train.adam_beta2", "0.999"},
      {"train.adam_eps", "1e-8"},
      {"train.runs", "5"},
      {"train.eval_train", "true"},
      {"eval.ece_bins", "10"},
      {"eval.top_frac", "0.2"},
      {"synth.n", "200"},
      {"synth.vocab", "50"},
  };
  return d;
}

bool is_model_key(const std::string& key) {
  for (const char* prefix : {"encoder.", "parser.", "model.", "synergy.", "dims.", "refine.",
                             "dyt.", "head.", "loss."}) {
    if (key.starts_with(prefix)) return true;
  }
  return key == "data.max_len";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config::Config() : values_(defaults()) {}

bool Config::is_known_key(std::string_view key) { return defaults().contains(std::string(key)); }

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

Config Config::parse(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.find('=') == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      cfg.apply_override(t);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

int Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " = '" + v + "' is not an integer");
}

uint64_t Config::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const uint64_t out = std::stoull(v, &used);
    if (used == v.size() && v.front() != '-') return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " = '" + v + "' is not a non-negative integer");
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " = '" + v + "' is not a number");
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + " = '" + v + "' is not a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  return split_list(get(key));
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string Config::model_text() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (is_model_key(k)) out += k + " = " + v + "\n";
  }
  return out;
}

uint64_t Config::model_hash() const { return fnv1a(model_text()); }

}  // namespace teachpro
