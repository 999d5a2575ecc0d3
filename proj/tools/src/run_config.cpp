/*
 * Copyright 2026 The ListFold Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "listfold/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

namespace listfold::cli {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    auto item = trim(std::string_view(text).substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key, "not a valid number: '" + text + "'");
  }
  return value;
}

}  // namespace

const std::vector<KeyInfo>& RunConfig::known_keys() {
  static const std::vector<KeyInfo> keys = {
      {"panel", "panel CSV path"},
      {"out", "output directory (default listfold_out)"},
      {"missing_threshold", "drop stocks with at least this missing fraction"},
      {"train_weeks", "training window length in weeks (default 300)"},
      {"test_weeks", "test window length in weeks (default 16)"},
      {"strategies", "comma list of strategy names, or all"},
      {"loss", "loss for train: listfold-exp, listfold-sgm, listmle-exp, naivept-exp, mse"},
      {"reverse_labels", "train against reversed labels (train only)"},
      {"k", "stocks per leg (default 8)"},
      {"heatmap_k_max", "largest k of the cutoff heatmap (default N/2)"},
      {"batch_sizes", "comma list of batch sizes for the batch grid"},
      {"batch_size", "weeks per mini-batch (default 32)"},
      {"total_batches", "mini-batches per training run (default 1000)"},
      {"learning_rate", "optimizer step size (default 0.001)"},
      {"optimizer", "adam or sgd"},
      {"patience", "early stopping patience in batches, 0 = off"},
      {"seed", "base random seed"},
      {"cost_bps", "transaction cost per unit traded, bps (default 30)"},
      {"rf", "annual risk-free rate (default 0.03)"},
      {"leg_notional", "capital per leg (default 0.5)"},
      {"label_levels", "relevance levels for NDCG (default 10)"},
      {"ndcg_k", "NDCG cutoff (default 8)"},
      {"threads", "worker threads (default 1)"},
      {"window", "rolling window index for train and score (default 0)"},
      {"checkpoint", "checkpoint path for score (default <out>/model.ckpt)"},
      {"week", "date to score (YYYY-MM-DD)"},
      {"trials", "random score sets per n for the minimizer checks"},
      {"sizes", "list lengths for verify (even, <= 8)"},
      {"budget", "counterexample samples per size and distribution"},
      {"distribution", "uniform, normal, clustered, near-tie or all"},
      {"model", "sampler model: vase or plank"},
      {"weights", "comma list of positive sampler weights"},
      {"draws", "sampler draws"},
      {"weeks", "synthetic weeks"},
      {"stocks", "synthetic stocks"},
      {"factors", "synthetic factors"},
      {"signal", "synthetic signal strength"},
      {"noise", "synthetic noise scale"},
      {"signal_factors", "synthetic factors carrying signal"},
  };
  return keys;
}

bool RunConfig::is_known(std::string_view key) {
  const auto& keys = known_keys();
  return std::any_of(keys.begin(), keys.end(),
                     [&](const KeyInfo& k) { return k.key == key; });
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source_name) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(text, source_name + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    }
    config.set(trim(std::string_view(text).substr(0, eq)),
               trim(std::string_view(text).substr(eq + 1)));
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse(in, path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!is_known(key)) throw ConfigError(key, "unknown key");
  values_[key] = value;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw ConfigError(key, "required");
  return it->second;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  return has(key) ? parse_number<std::size_t>(key, values_.at(key)) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_number<std::uint64_t>(key, values_.at(key)) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_number<double>(key, values_.at(key)) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = values_.at(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key, "not a boolean: '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  return has(key) ? split_commas(values_.at(key)) : fallback;
}

std::vector<std::size_t> RunConfig::get_size_list(
    const std::string& key, const std::vector<std::size_t>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : split_commas(values_.at(key))) {
    out.push_back(parse_number<std::size_t>(key, item));
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split_commas(values_.at(key))) {
    out.push_back(parse_number<double>(key, item));
  }
  return out;
}

}  // namespace listfold::cli
