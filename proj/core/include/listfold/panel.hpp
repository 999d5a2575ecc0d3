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

#ifndef LISTFOLD_PANEL_HPP_
#define LISTFOLD_PANEL_HPP_

// Factor panels: ingestion, cleaning, normalization, rank labels and
// rolling train/test windows.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace listfold {

// A date x stock x factor tensor plus one-period-ahead simple returns.
// Missing cells are stored as quiet NaN.
struct FactorPanel {
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  std::vector<std::string> stocks;
  std::vector<std::string> factor_names;
  std::vector<double> factors;     // row-major [date][stock][factor]
  std::vector<double> fwd_return;  // row-major [date][stock]

  std::size_t num_dates() const { return dates.size(); }
  std::size_t num_stocks() const { return stocks.size(); }
  std::size_t num_factors() const { return factor_names.size(); }

  double factor(std::size_t d, std::size_t s, std::size_t f) const {
    return factors[(d * num_stocks() + s) * num_factors() + f];
  }
  double& factor(std::size_t d, std::size_t s, std::size_t f) {
    return factors[(d * num_stocks() + s) * num_factors() + f];
  }
  double ret(std::size_t d, std::size_t s) const {
    return fwd_return[d * num_stocks() + s];
  }
  double& ret(std::size_t d, std::size_t s) {
    return fwd_return[d * num_stocks() + s];
  }
  std::span<const double> cell(std::size_t d, std::size_t s) const {
    return {factors.data() + (d * num_stocks() + s) * num_factors(),
            num_factors()};
  }
  std::span<const double> week_returns(std::size_t d) const {
    return {fwd_return.data() + d * num_stocks(), num_stocks()};
  }

  // stocks x factors matrix for one week.
  Eigen::MatrixXd week_features(std::size_t d) const;

  std::optional<std::size_t> find_date(std::string_view date) const;

  // Allocates storage for the given axes with every cell missing.
  static FactorPanel empty(std::vector<std::string> dates,
                           std::vector<std::string> stocks,
                           std::vector<std::string> factor_names);

  // Throws InvalidArgument when dates are unordered or storage sizes disagree.
  void validate() const;
};

// Maps CSV header names onto panel fields. An empty factor list means every
// column other than date/stock/return is a factor; otherwise columns not
// named anywhere are ignored.
struct CsvSchema {
  std::string date_column = "date";
  std::string stock_column = "stock";
  std::string return_column = "fwd_ret";
  std::vector<std::string> factor_columns;
};

FactorPanel load_panel(const std::filesystem::path& path,
                       const CsvSchema& schema = {});
FactorPanel read_panel(std::istream& in, const std::string& source_name,
                       const CsvSchema& schema = {});

// Writes the canonical schema `date,stock,fwd_ret,<factors...>` using the
// shortest round-trip decimal form, so save/load is bit-exact.
void save_panel(const FactorPanel& panel, const std::filesystem::path& path);
void write_panel(const FactorPanel& panel, std::ostream& out);

// Fraction of missing cells (factors and return) for one stock.
double missing_fraction(const FactorPanel& panel, std::size_t stock);

// Keeps stocks whose missing fraction is strictly below `threshold`, then
// forward-fills surviving gaps per stock and zero-fills leading gaps.
FactorPanel filter_by_missing(const FactorPanel& panel, double threshold);

// Half-open range of week indices.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct MinMax {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const MinMax&, const MinMax&) = default;
};

struct WindowPlan {
  IndexRange train;
  IndexRange test;
  std::vector<MinMax> norm_params;  // per factor, fitted on `train` only
};

// Windows advance by test_len; each train range is the train_len weeks right
// before its test range. Yields floor((total - train_len) / test_len) plans.
std::vector<WindowPlan> rolling_windows(std::size_t total_weeks,
                                        std::size_t train_len,
                                        std::size_t test_len);

std::vector<MinMax> compute_norm_params(const FactorPanel& panel,
                                        IndexRange train);

// Fills plan.norm_params from the plan's training weeks.
void fit_normalization(WindowPlan& plan, const FactorPanel& panel);

// Maps every factor to (x - min) / (max - min) with the plan's training
// statistics. Applied to all weeks; constant factors map to 0.5 and test
// values may fall outside [0, 1].
FactorPanel minmax_normalize(const FactorPanel& panel, const WindowPlan& plan);

// Relevance labels in 1..levels: the top 1/levels of returns get `levels`.
// When the length does not divide evenly, upper buckets take one extra item
// each. Ties keep input order.
std::vector<int> decile_labels(std::span<const double> returns,
                               int levels = 10);

// Indices that sort `values` descending; ties keep input order.
std::vector<std::size_t> descending_order(std::span<const double> values);

// One cross-section ordered by realized return.
struct RankedBatch {
  Eigen::MatrixXd features;             // list_length x factor_count
  std::vector<std::size_t> truth_order;  // position -> row, best first
  std::vector<double> returns;           // aligned to rows
  std::vector<int> labels;               // aligned to rows
};

// Builds the ranked list for one week. Label levels are capped at the list
// length.
RankedBatch make_ranked_batch(const FactorPanel& panel, std::size_t week,
                              int levels = 10);

struct SyntheticOptions {
  std::uint64_t seed = 0;
  std::size_t weeks = 631;
  std::size_t stocks = 80;
  std::size_t factors = 68;
  double signal_strength = 1.0;
  double noise = 1.0;              // standard deviation of the return shock
  std::size_t signal_factors = 8;  // leading factors that drive returns
  double persistence = 0.9;        // AR(1) coefficient of each factor
  double return_scale = 0.02;
  std::string start_date = "2006-12-29";
};

// Factors follow independent stationary AR(1) processes with unit variance;
// returns are return_scale * (signal_strength * planted_score + noise * eps).
FactorPanel generate_synthetic_panel(const SyntheticOptions& options);

// The planted linear combination for one week, aligned to panel.stocks.
std::vector<double> planted_score(const FactorPanel& panel, std::size_t week,
                                  std::size_t signal_factors);

// ISO date `days` after `iso_date`.
std::string add_days(const std::string& iso_date, int days);

}  // namespace listfold

#endif  // LISTFOLD_PANEL_HPP_
