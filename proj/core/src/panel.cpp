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

#include "listfold/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "listfold/error.hpp"

namespace listfold {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Empty cell -> missing; anything else must parse completely.
std::optional<double> parse_cell(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return kMissing;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::chrono::year_month_day> parse_iso_date(
    std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto digits = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc() && ptr == s.data() + pos + len;
  };
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::string format_iso_date(std::chrono::year_month_day ymd) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

void append_number(std::string& out, double value) {
  if (std::isnan(value)) return;
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

Eigen::MatrixXd FactorPanel::week_features(std::size_t d) const {
  const std::size_t n = num_stocks();
  const std::size_t f = num_factors();
  Eigen::MatrixXd out(n, f);
  for (std::size_t s = 0; s < n; ++s) {
    const auto row = cell(d, s);
    for (std::size_t j = 0; j < f; ++j) out(s, j) = row[j];
  }
  return out;
}

std::optional<std::size_t> FactorPanel::find_date(std::string_view date) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

FactorPanel FactorPanel::empty(std::vector<std::string> dates,
                               std::vector<std::string> stocks,
                               std::vector<std::string> factor_names) {
  FactorPanel p;
  p.dates = std::move(dates);
  p.stocks = std::move(stocks);
  p.factor_names = std::move(factor_names);
  p.factors.assign(p.num_dates() * p.num_stocks() * p.num_factors(), kMissing);
  p.fwd_return.assign(p.num_dates() * p.num_stocks(), kMissing);
  return p;
}

void FactorPanel::validate() const {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw InvalidArgument("panel dates not strictly increasing at " +
                            dates[i]);
    }
  }
  if (factors.size() != num_dates() * num_stocks() * num_factors() ||
      fwd_return.size() != num_dates() * num_stocks()) {
    throw InvalidArgument("panel storage does not match its axes");
  }
}

FactorPanel read_panel(std::istream& in, const std::string& source_name,
                       const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(source_name + ": empty file");
  }
  const auto header = split_csv_line(line);
  std::vector<std::string> names;
  for (auto h : header) names.emplace_back(trim(h));

  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  };
  const auto date_col = column_of(schema.date_column);
  const auto stock_col = column_of(schema.stock_column);
  const auto ret_col = column_of(schema.return_column);
  if (!date_col || !stock_col || !ret_col) {
    throw DataError(source_name + ": header must contain '" +
                    schema.date_column + "', '" + schema.stock_column +
                    "' and '" + schema.return_column + "'");
  }

  std::vector<std::string> factor_names;
  std::vector<std::size_t> factor_cols;
  if (schema.factor_columns.empty()) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c == *date_col || c == *stock_col || c == *ret_col) continue;
      factor_names.push_back(names[c]);
      factor_cols.push_back(c);
    }
  } else {
    for (const auto& f : schema.factor_columns) {
      const auto c = column_of(f);
      if (!c) throw DataError(source_name + ": missing factor column '" + f + "'");
      factor_names.push_back(f);
      factor_cols.push_back(*c);
    }
  }
  if (factor_names.empty()) {
    throw DataError(source_name + ": no factor columns");
  }

  struct Row {
    std::size_t line;
    std::string date;
    std::size_t stock;
    double ret;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::vector<std::string> stocks;
  std::unordered_map<std::string, std::size_t> stock_index;
  std::map<std::string, std::size_t> date_set;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != names.size()) {
      throw ParseError(source_name, line_no,
                       "expected " + std::to_string(names.size()) +
                           " columns, found " + std::to_string(cells.size()));
    }
    const std::string date(trim(cells[*date_col]));
    if (!parse_iso_date(date)) {
      throw ParseError(source_name, line_no, "bad date '" + date + "'");
    }
    const std::string stock(trim(cells[*stock_col]));
    if (stock.empty()) throw ParseError(source_name, line_no, "empty stock id");
    const auto ret = parse_cell(cells[*ret_col]);
    if (!ret) {
      throw ParseError(source_name, line_no,
                       "non-numeric return '" + std::string(cells[*ret_col]) + "'");
    }
    Row row{line_no, date, 0, *ret, {}};
    row.values.reserve(factor_cols.size());
    for (std::size_t j = 0; j < factor_cols.size(); ++j) {
      const auto v = parse_cell(cells[factor_cols[j]]);
      if (!v) {
        throw ParseError(source_name, line_no,
                         "non-numeric value '" +
                             std::string(cells[factor_cols[j]]) +
                             "' in column " + factor_names[j]);
      }
      row.values.push_back(*v);
    }
    auto [it, inserted] = stock_index.try_emplace(stock, stocks.size());
    if (inserted) stocks.push_back(stock);
    row.stock = it->second;
    date_set.emplace(date, 0);
    rows.push_back(std::move(row));
  }

  std::vector<std::string> dates;
  for (auto& [d, idx] : date_set) {
    idx = dates.size();
    dates.push_back(d);
  }

  FactorPanel panel = FactorPanel::empty(std::move(dates), std::move(stocks),
                                         std::move(factor_names));
  std::vector<std::size_t> seen(panel.num_dates() * panel.num_stocks(), 0);
  for (const auto& row : rows) {
    const std::size_t d = date_set.at(row.date);
    std::size_t& first = seen[d * panel.num_stocks() + row.stock];
    if (first != 0) {
      throw ParseError(source_name, row.line,
                       "duplicate (date, stock) = (" + row.date + ", " +
                           panel.stocks[row.stock] + "), first seen on line " +
                           std::to_string(first));
    }
    first = row.line;
    panel.ret(d, row.stock) = row.ret;
    for (std::size_t j = 0; j < row.values.size(); ++j) {
      panel.factor(d, row.stock, j) = row.values[j];
    }
  }
  return panel;
}

FactorPanel load_panel(const std::filesystem::path& path,
                       const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file " + path.string());
  return read_panel(in, path.string(), schema);
}

void write_panel(const FactorPanel& panel, std::ostream& out) {
  std::string buf = "date,stock,fwd_ret";
  for (const auto& f : panel.factor_names) {
    buf += ',';
    buf += f;
  }
  buf += '\n';
  out << buf;
  for (std::size_t d = 0; d < panel.num_dates(); ++d) {
    for (std::size_t s = 0; s < panel.num_stocks(); ++s) {
      buf.clear();
      buf += panel.dates[d];
      buf += ',';
      buf += panel.stocks[s];
      buf += ',';
      append_number(buf, panel.ret(d, s));
      for (double v : panel.cell(d, s)) {
        buf += ',';
        append_number(buf, v);
      }
      buf += '\n';
      out << buf;
    }
  }
}

void save_panel(const FactorPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write panel file " + path.string());
  write_panel(panel, out);
  if (!out) throw DataError("write failed for " + path.string());
}

double missing_fraction(const FactorPanel& panel, std::size_t stock) {
  std::size_t missing = 0;
  for (std::size_t d = 0; d < panel.num_dates(); ++d) {
    if (std::isnan(panel.ret(d, stock))) ++missing;
    for (double v : panel.cell(d, stock)) {
      if (std::isnan(v)) ++missing;
    }
  }
  const double cells =
      static_cast<double>(panel.num_dates() * (panel.num_factors() + 1));
  return cells == 0.0 ? 1.0 : static_cast<double>(missing) / cells;
}

FactorPanel filter_by_missing(const FactorPanel& panel, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidArgument("missing-value threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> keep;
  for (std::size_t s = 0; s < panel.num_stocks(); ++s) {
    if (missing_fraction(panel, s) < threshold) keep.push_back(s);
  }
  if (keep.empty()) {
    throw DataError("empty universe: no stock has a missing fraction below " +
                    std::to_string(threshold));
  }

  std::vector<std::string> stocks;
  for (std::size_t s : keep) stocks.push_back(panel.stocks[s]);
  FactorPanel out =
      FactorPanel::empty(panel.dates, std::move(stocks), panel.factor_names);

  const std::size_t nf = panel.num_factors();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t s = keep[i];
    std::vector<double> last(nf, 0.0);
    for (std::size_t d = 0; d < panel.num_dates(); ++d) {
      const double r = panel.ret(d, s);
      out.ret(d, i) = std::isnan(r) ? 0.0 : r;
      for (std::size_t f = 0; f < nf; ++f) {
        const double v = panel.factor(d, s, f);
        if (!std::isnan(v)) last[f] = v;
        out.factor(d, i, f) = last[f];
      }
    }
  }
  return out;
}

std::vector<WindowPlan> rolling_windows(std::size_t total_weeks,
                                        std::size_t train_len,
                                        std::size_t test_len) {
  if (train_len == 0 || test_len == 0) {
    throw InvalidArgument("window lengths must be positive");
  }
  if (total_weeks < train_len + test_len) {
    throw DataError("insufficient data: " + std::to_string(total_weeks) +
                    " weeks < train " + std::to_string(train_len) +
                    " + test " + std::to_string(test_len));
  }
  const std::size_t count = (total_weeks - train_len) / test_len;
  std::vector<WindowPlan> plans(count);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t test_begin = train_len + w * test_len;
    plans[w].train = {test_begin - train_len, test_begin};
    plans[w].test = {test_begin, test_begin + test_len};
  }
  return plans;
}

std::vector<MinMax> compute_norm_params(const FactorPanel& panel,
                                        IndexRange train) {
  const std::size_t nf = panel.num_factors();
  std::vector<MinMax> params(nf);
  std::vector<bool> any(nf, false);
  for (std::size_t d = train.begin; d < train.end; ++d) {
    for (std::size_t s = 0; s < panel.num_stocks(); ++s) {
      const auto row = panel.cell(d, s);
      for (std::size_t f = 0; f < nf; ++f) {
        const double v = row[f];
        if (std::isnan(v)) continue;
        if (!any[f]) {
          params[f] = {v, v};
          any[f] = true;
        } else {
          params[f].min = std::min(params[f].min, v);
          params[f].max = std::max(params[f].max, v);
        }
      }
    }
  }
  return params;
}

void fit_normalization(WindowPlan& plan, const FactorPanel& panel) {
  if (plan.train.empty() || plan.train.end > panel.num_dates()) {
    throw InvalidArgument("training range outside the panel");
  }
  plan.norm_params = compute_norm_params(panel, plan.train);
}

FactorPanel minmax_normalize(const FactorPanel& panel, const WindowPlan& plan) {
  if (plan.norm_params.size() != panel.num_factors()) {
    throw InvalidArgument("normalization parameters not fitted for this panel");
  }
  FactorPanel out = panel;
  const std::size_t nf = panel.num_factors();
  for (std::size_t i = 0; i < out.factors.size(); ++i) {
    const MinMax& p = plan.norm_params[i % nf];
    double& v = out.factors[i];
    if (std::isnan(v)) continue;
    v = p.max > p.min ? (v - p.min) / (p.max - p.min) : 0.5;
  }
  return out;
}

std::vector<std::size_t> descending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  return order;
}

std::vector<int> decile_labels(std::span<const double> returns, int levels) {
  if (returns.empty()) throw InvalidArgument("decile_labels: empty input");
  if (levels < 2) throw InvalidArgument("decile_labels: levels must be >= 2");
  const std::size_t n = returns.size();
  const auto lv = static_cast<std::size_t>(levels);
  if (n < lv) {
    throw InvalidArgument("decile_labels: list shorter than the label levels");
  }
  const auto order = descending_order(returns);
  const std::size_t base = n / lv;
  const std::size_t extra = n % lv;
  std::vector<int> labels(n);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < lv; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      labels[order[pos++]] = levels - static_cast<int>(b);
    }
  }
  return labels;
}

RankedBatch make_ranked_batch(const FactorPanel& panel, std::size_t week,
                              int levels) {
  if (week >= panel.num_dates()) {
    throw InvalidArgument("week index out of range");
  }
  RankedBatch batch;
  batch.features = panel.week_features(week);
  const auto r = panel.week_returns(week);
  batch.returns.assign(r.begin(), r.end());
  for (double v : batch.returns) {
    if (!std::isfinite(v)) {
      throw DataError("non-finite return in week " + panel.dates[week]);
    }
  }
  batch.truth_order = descending_order(batch.returns);
  const int n = static_cast<int>(batch.returns.size());
  if (n >= 2) {
    batch.labels = decile_labels(batch.returns, std::min(levels, n));
  } else {
    batch.labels.assign(batch.returns.size(), 1);
  }
  return batch;
}

std::string add_days(const std::string& iso_date, int days) {
  const auto ymd = parse_iso_date(iso_date);
  if (!ymd) throw InvalidArgument("bad ISO date '" + iso_date + "'");
  const std::chrono::sys_days shifted =
      std::chrono::sys_days{*ymd} + std::chrono::days{days};
  return format_iso_date(std::chrono::year_month_day{shifted});
}

namespace {

double planted_coefficient(std::size_t j, std::size_t k) {
  const double mag = 1.0 / std::sqrt(static_cast<double>(k));
  return (j % 2 == 0) ? mag : -mag;
}

}  // namespace

std::vector<double> planted_score(const FactorPanel& panel, std::size_t week,
                                  std::size_t signal_factors) {
  const std::size_t k = std::min(signal_factors, panel.num_factors());
  std::vector<double> score(panel.num_stocks(), 0.0);
  if (k == 0) return score;
  for (std::size_t s = 0; s < panel.num_stocks(); ++s) {
    const auto row = panel.cell(week, s);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += planted_coefficient(j, k) * row[j];
    score[s] = acc;
  }
  return score;
}

FactorPanel generate_synthetic_panel(const SyntheticOptions& o) {
  if (o.weeks == 0 || o.stocks == 0 || o.factors == 0) {
    throw InvalidArgument("synthetic panel dimensions must be >= 1");
  }
  if (!(o.persistence >= 0.0 && o.persistence < 1.0)) {
    throw InvalidArgument("persistence must lie in [0, 1)");
  }
  std::vector<std::string> dates(o.weeks);
  for (std::size_t d = 0; d < o.weeks; ++d) {
    dates[d] = add_days(o.start_date, static_cast<int>(7 * d));
  }
  std::vector<std::string> stocks(o.stocks);
  for (std::size_t s = 0; s < o.stocks; ++s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%04zu", s + 1);
    stocks[s] = buf;
  }
  std::vector<std::string> names(o.factors);
  for (std::size_t f = 0; f < o.factors; ++f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "f%02zu", f + 1);
    names[f] = buf;
  }
  FactorPanel panel =
      FactorPanel::empty(std::move(dates), std::move(stocks), std::move(names));

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double phi = o.persistence;
  const double innovation = std::sqrt(1.0 - phi * phi);
  for (std::size_t d = 0; d < o.weeks; ++d) {
    for (std::size_t s = 0; s < o.stocks; ++s) {
      for (std::size_t f = 0; f < o.factors; ++f) {
        const double eps = gauss(rng);
        panel.factor(d, s, f) =
            d == 0 ? eps : phi * panel.factor(d - 1, s, f) + innovation * eps;
      }
    }
    const auto score = planted_score(panel, d, o.signal_factors);
    for (std::size_t s = 0; s < o.stocks; ++s) {
      const double eps = gauss(rng);
      panel.ret(d, s) =
          o.return_scale * (o.signal_strength * score[s] + o.noise * eps);
    }
  }
  return panel;
}

}  // namespace listfold
