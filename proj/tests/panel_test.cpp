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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "listfold/error.hpp"
#include "listfold/metrics.hpp"
#include "listfold/panel.hpp"

namespace listfold {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TEST(LoadPanel, ThreeRowsOneFactorOneDate) {
  std::istringstream csv(
      "date,stock,fwd_ret,value\n"
      "2020-01-03,AAA,0.01,1.5\n"
      "2020-01-03,BBB,-0.02,2.5\n"
      "2020-01-03,CCC,0.00,\n");
  const FactorPanel p = read_panel(csv, "mem");
  ASSERT_EQ(p.num_dates(), 1u);
  ASSERT_EQ(p.num_stocks(), 3u);
  ASSERT_EQ(p.num_factors(), 1u);
  EXPECT_EQ(p.stocks[1], "BBB");
  EXPECT_DOUBLE_EQ(p.factor(0, 1, 0), 2.5);
  EXPECT_DOUBLE_EQ(p.ret(0, 1), -0.02);
  EXPECT_TRUE(std::isnan(p.factor(0, 2, 0)));
}

TEST(LoadPanel, DuplicateCellNamesTheRow) {
  std::istringstream csv(
      "date,stock,fwd_ret,value\n"
      "2020-01-03,AAA,0.01,1\n"
      "2020-01-03,AAA,0.02,2\n");
  try {
    read_panel(csv, "dup.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("AAA"), std::string::npos);
  }
}

TEST(LoadPanel, NonNumericFactorNamesTheRow) {
  std::istringstream csv(
      "date,stock,fwd_ret,value\n"
      "2020-01-03,AAA,0.01,abc\n");
  try {
    read_panel(csv, "bad.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(LoadPanel, UnknownColumnsIgnoredWithExplicitSchema) {
  std::istringstream csv(
      "stock,date,junk,fwd_ret,a,b\n"
      "X,2020-01-10,zz,0.5,1,2\n"
      "X,2020-01-03,zz,0.1,3,4\n");
  CsvSchema schema;
  schema.factor_columns = {"b"};
  const FactorPanel p = read_panel(csv, "mem", schema);
  ASSERT_EQ(p.num_factors(), 1u);
  ASSERT_EQ(p.num_dates(), 2u);
  EXPECT_EQ(p.dates[0], "2020-01-03");
  EXPECT_DOUBLE_EQ(p.factor(0, 0, 0), 4.0);
}

TEST(LoadPanel, MissingFileIsDataError) {
  EXPECT_THROW(load_panel("/nonexistent/panel.csv"), DataError);
}

TEST(LoadPanel, SyntheticRoundTripIsBitExact) {
  SyntheticOptions o;
  o.seed = 11;
  const FactorPanel p = generate_synthetic_panel(o);
  ASSERT_EQ(p.num_dates(), 631u);
  ASSERT_EQ(p.num_stocks(), 80u);
  ASSERT_EQ(p.num_factors(), 68u);
  std::stringstream buf;
  write_panel(p, buf);
  const FactorPanel q = read_panel(buf, "mem");
  EXPECT_EQ(p.dates, q.dates);
  EXPECT_EQ(p.stocks, q.stocks);
  EXPECT_EQ(p.factor_names, q.factor_names);
  EXPECT_EQ(p.factors, q.factors);
  EXPECT_EQ(p.fwd_return, q.fwd_return);
}

FactorPanel panel_with_missing(std::size_t weeks, std::size_t factors,
                               const std::vector<std::size_t>& missing_cells) {
  std::vector<std::string> dates;
  for (std::size_t d = 0; d < weeks; ++d) dates.push_back(add_days("2010-01-01", 7 * static_cast<int>(d)));
  std::vector<std::string> stocks, names;
  for (std::size_t s = 0; s < missing_cells.size(); ++s) stocks.push_back("S" + std::to_string(s));
  for (std::size_t f = 0; f < factors; ++f) names.push_back("f" + std::to_string(f));
  FactorPanel p = FactorPanel::empty(dates, stocks, names);
  for (std::size_t d = 0; d < weeks; ++d) {
    for (std::size_t s = 0; s < stocks.size(); ++s) {
      p.ret(d, s) = 0.01;
      for (std::size_t f = 0; f < factors; ++f) p.factor(d, s, f) = static_cast<double>(d + f);
    }
  }
  for (std::size_t s = 0; s < missing_cells.size(); ++s) {
    for (std::size_t c = 0; c < missing_cells[s]; ++c) {
      const std::size_t d = (c * 7 + 1) % weeks;
      const std::size_t f = (c / weeks) % factors;
      p.factor(d, s, f) = kNaN;
    }
  }
  return p;
}

TEST(FilterByMissing, PlantedRatesKeepFirstTwo) {
  // 100 weeks x 19 factors + 1 return = 2000 cells per stock.
  const FactorPanel p = panel_with_missing(100, 19, {0, 1, 100});
  EXPECT_DOUBLE_EQ(missing_fraction(p, 0), 0.0);
  EXPECT_DOUBLE_EQ(missing_fraction(p, 1), 0.0005);
  EXPECT_DOUBLE_EQ(missing_fraction(p, 2), 0.05);
  const FactorPanel q = filter_by_missing(p, 0.001);
  ASSERT_EQ(q.num_stocks(), 2u);
  EXPECT_EQ(q.stocks[0], "S0");
  EXPECT_EQ(q.stocks[1], "S1");
  for (double v : q.factors) EXPECT_FALSE(std::isnan(v));
}

TEST(FilterByMissing, ForwardFillThenZeroFill) {
  FactorPanel p = panel_with_missing(4, 1, {0});
  p.factor(0, 0, 0) = kNaN;  // leading gap
  p.factor(2, 0, 0) = kNaN;  // interior gap
  const FactorPanel q = filter_by_missing(p, 1.0);
  EXPECT_DOUBLE_EQ(q.factor(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(q.factor(1, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(q.factor(2, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(q.factor(3, 0, 0), 3.0);
}

TEST(FilterByMissing, EmptyUniverse) {
  const FactorPanel p = panel_with_missing(10, 1, {5, 5});
  EXPECT_THROW(filter_by_missing(p, 0.001), DataError);
}

TEST(MinMaxNormalize, TrainStatisticsOnly) {
  std::vector<std::string> dates = {"2020-01-03", "2020-01-10", "2020-01-17", "2020-01-24"};
  FactorPanel p = FactorPanel::empty(dates, {"A"}, {"x", "c"});
  const double xs[] = {0, 5, 10, 12};
  for (std::size_t d = 0; d < 4; ++d) {
    p.factor(d, 0, 0) = xs[d];
    p.factor(d, 0, 1) = 3.0;
    p.ret(d, 0) = 0.0;
  }
  WindowPlan plan{{0, 3}, {3, 4}, {}};
  fit_normalization(plan, p);
  EXPECT_EQ(plan.norm_params, compute_norm_params(p, plan.train));
  const FactorPanel q = minmax_normalize(p, plan);
  EXPECT_DOUBLE_EQ(q.factor(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(q.factor(1, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(q.factor(2, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(q.factor(3, 0, 0), 1.2);
  for (std::size_t d = 0; d < 4; ++d) EXPECT_DOUBLE_EQ(q.factor(d, 0, 1), 0.5);
}

TEST(DecileLabels, TenDistinct) {
  const std::vector<double> r = {10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  EXPECT_EQ(decile_labels(r), (std::vector<int>{10, 9, 8, 7, 6, 5, 4, 3, 2, 1}));
}

TEST(DecileLabels, TwentyEachTwice) {
  std::vector<double> r(20);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sin(static_cast<double>(i) * 1.3);
  const auto labels = decile_labels(r);
  for (int l = 1; l <= 10; ++l) EXPECT_EQ(std::count(labels.begin(), labels.end(), l), 2);
}

TEST(DecileLabels, RemainderGoesToTopBuckets) {
  std::vector<double> r(23);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 100.0 - static_cast<double>(i);
  const auto labels = decile_labels(r);
  const int expected[] = {0, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3};
  for (int l = 1; l <= 10; ++l) EXPECT_EQ(std::count(labels.begin(), labels.end(), l), expected[l]);
}

TEST(DecileLabels, NonIncreasingInTruthOrder) {
  std::vector<double> r(37);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::cos(static_cast<double>(i * i));
  const auto labels = decile_labels(r);
  const auto order = descending_order(r);
  for (std::size_t i = 1; i < order.size(); ++i) EXPECT_GE(labels[order[i - 1]], labels[order[i]]);
}

TEST(DecileLabels, Errors) {
  EXPECT_THROW(decile_labels(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(decile_labels(std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST(RollingWindows, Counts) {
  const auto w = rolling_windows(631, 300, 16);
  ASSERT_EQ(w.size(), 20u);
  std::size_t test_weeks = 0;
  for (const auto& p : w) test_weeks += p.test.size();
  EXPECT_EQ(test_weeks, 320u);
  EXPECT_EQ(rolling_windows(316, 300, 16).size(), 1u);
  const auto w632 = rolling_windows(632, 300, 16);
  ASSERT_EQ(w632.size(), 20u);
  EXPECT_EQ(w632.back().test.end, 620u);
  EXPECT_THROW(rolling_windows(315, 300, 16), DataError);
}

TEST(RollingWindows, ContiguousAndDisjoint) {
  const auto w = rolling_windows(631, 300, 16);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(w[i].train.size(), 300u);
    EXPECT_EQ(w[i].train.end, w[i].test.begin);
    if (i > 0) EXPECT_EQ(w[i - 1].test.end, w[i].test.begin);
  }
}

TEST(RankedBatch, TruthOrderSortsReturns) {
  SyntheticOptions o;
  o.weeks = 3;
  o.stocks = 15;
  o.factors = 4;
  o.seed = 5;
  const FactorPanel p = generate_synthetic_panel(o);
  const RankedBatch b = make_ranked_batch(p, 1);
  ASSERT_EQ(b.truth_order.size(), 15u);
  EXPECT_EQ(b.features.rows(), 15);
  EXPECT_EQ(b.features.cols(), 4);
  std::vector<std::size_t> sorted = b.truth_order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  for (std::size_t i = 1; i < 15; ++i) {
    EXPECT_GE(b.returns[b.truth_order[i - 1]], b.returns[b.truth_order[i]]);
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticOptions o;
  o.weeks = 20;
  o.seed = 42;
  const FactorPanel a = generate_synthetic_panel(o);
  const FactorPanel b = generate_synthetic_panel(o);
  EXPECT_EQ(a.factors, b.factors);
  EXPECT_EQ(a.fwd_return, b.fwd_return);
  o.seed = 43;
  EXPECT_NE(generate_synthetic_panel(o).fwd_return, a.fwd_return);
}

TEST(Synthetic, ZeroSignalHasNoFactorCorrelation) {
  SyntheticOptions o;
  o.weeks = 300;
  o.factors = 10;
  o.signal_strength = 0.0;
  o.seed = 9;
  const FactorPanel p = generate_synthetic_panel(o);
  for (std::size_t f = 0; f < p.num_factors(); ++f) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(p.num_dates() * p.num_stocks());
    for (std::size_t d = 0; d < p.num_dates(); ++d) {
      for (std::size_t s = 0; s < p.num_stocks(); ++s) {
        const double x = p.factor(d, s, f), y = p.ret(d, s);
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
      }
    }
    const double cov = sxy / n - sx / n * sy / n;
    const double rho = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    EXPECT_LT(std::abs(rho), 0.1) << "factor " << f;
  }
}

TEST(Synthetic, NoiselessPlantedScoreIsPerfectlyRanked) {
  SyntheticOptions o;
  o.weeks = 30;
  o.noise = 0.0;
  o.seed = 3;
  const FactorPanel p = generate_synthetic_panel(o);
  for (std::size_t d = 0; d < p.num_dates(); ++d) {
    const auto score = planted_score(p, d, o.signal_factors);
    EXPECT_NEAR(spearman_ic(score, p.week_returns(d)).value, 1.0, 1e-12);
  }
}

TEST(AddDays, CrossesMonthAndYear) {
  EXPECT_EQ(add_days("2006-12-29", 7), "2007-01-05");
  EXPECT_EQ(add_days("2020-02-26", 7), "2020-03-04");
  EXPECT_THROW(add_days("2020-13-01", 1), InvalidArgument);
}

}  // namespace
}  // namespace listfold
