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

#ifndef LISTFOLD_BACKTEST_HPP_
#define LISTFOLD_BACKTEST_HPP_

// Rolling-window strategy evaluation: portfolios from predicted ranks, pnl
// with transaction costs, summary statistics, rank metrics, the cutoff
// heatmap and the batch-size grid.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "listfold/losses.hpp"
#include "listfold/panel.hpp"
#include "listfold/training.hpp"

namespace listfold {

enum class PortfolioMode { kLongShort, kShortAverage, kList2MLE };
std::string to_string(PortfolioMode mode);
PortfolioMode parse_portfolio_mode(std::string_view name);

// Weights are positive per leg; a stock can appear in both legs only in
// List2MLE mode.
struct Portfolio {
  std::string date;
  PortfolioMode mode = PortfolioMode::kLongShort;
  std::vector<std::pair<std::size_t, double>> longs;   // stock -> weight
  std::vector<std::pair<std::size_t, double>> shorts;  // stock -> weight
  std::size_t overlap = 0;  // stocks held in both legs

  double long_notional() const;
  double short_notional() const;
  // long weight - short weight per stock of a universe of the given size.
  std::vector<double> signed_weights(std::size_t universe) const;
};

// Top-k long and bottom-k short at leg_notional / k each. Score ties go to
// the lower stock index.
Portfolio build_long_short(std::span<const double> scores, std::size_t k,
                           double leg_notional = 0.5);
// Top-k long at leg_notional / k, every stock short at leg_notional / N.
Portfolio build_short_average(std::span<const double> scores, std::size_t k,
                              double leg_notional = 0.5);
// Longs: top-k of the forward model. Shorts: top-k of the model trained on
// reversed labels. Stocks picked by both stay in both legs.
Portfolio build_list2mle(std::span<const double> forward_scores,
                         std::span<const double> reverse_scores, std::size_t k,
                         double leg_notional = 0.5);

struct WeekPnl {
  double long_leg = 0.0;   // sum of long weight * return
  double short_leg = 0.0;  // sum of short weight * return
  double gross = 0.0;      // long_leg - short_leg
  double traded = 0.0;     // L1 change of signed weights
  double cost = 0.0;
  double net = 0.0;
  double turnover = 0.0;   // per-leg share of new names, averaged over legs
};

// Previous = nullptr means starting from a flat book.
WeekPnl week_pnl(const Portfolio& current, const Portfolio* previous,
                 std::span<const double> realized_returns, double cost_bps);

struct PnlSeries {
  std::vector<std::string> dates;
  std::vector<double> gross;
  std::vector<double> cost;
  std::vector<double> weekly_returns;  // net of cost
  std::vector<double> cumulative;      // running sum, fixed nominal
  std::vector<double> turnover;

  void append(const std::string& date, const WeekPnl& week);
  std::size_t size() const { return weekly_returns.size(); }
};

struct StrategyStats {
  double mu_excess = 0.0;  // mean * periods - rf
  double sigma = 0.0;      // sample std * sqrt(periods)
  double sharpe = 0.0;
  bool sharpe_defined = true;  // false when sigma == 0
  double mdd = 0.0;
  double trv = 0.0;
};

// Largest peak-to-trough fall of a cumulative pnl path that starts from 0.
double max_drawdown(std::span<const double> cumulative);

StrategyStats compute_stats(const PnlSeries& pnl, double rf_annual,
                            int periods_per_year = 52);

// A trained model family. Reverse-label models rank the worst return first,
// so their raw scores are negated to obtain a best-first ranking.
struct ModelSpec {
  std::string name;
  LossSpec loss;
  bool reverse_labels = false;
};

struct StrategySpec {
  std::string name;
  PortfolioMode mode = PortfolioMode::kLongShort;
  std::string model;          // model whose ranking drives the longs
  std::string reverse_model;  // List2MLE only: supplies the shorts
  std::size_t k = 8;
};

struct BacktestConfig {
  std::vector<ModelSpec> models;
  std::vector<StrategySpec> strategies;
  TrainConfig train;  // loss / reverse / final_relu are set per model
  std::size_t train_weeks = 300;
  std::size_t test_weeks = 16;
  double cost_bps = 30.0;
  double rf_annual = 0.03;
  double leg_notional = 0.5;
  int label_levels = 10;
  std::size_t ndcg_k = 8;
  int periods_per_year = 52;
  std::size_t threads = 1;

  // ListFold-exp, ListFold-sgm, ListMLE, ListMLE-rvs and MLP models with
  // long-short and short-average strategies plus List2MLE.
  static BacktestConfig standard(std::size_t k = 8);
  // Long-short strategies only, one per ranking model plus List2MLE; used
  // for the batch-size grid.
  static BacktestConfig batch_grid(std::size_t k = 8);
};

// Ranking-oriented (best first) out-of-sample scores per model and week.
struct ScoreBook {
  std::vector<std::size_t> weeks;              // panel week indices
  std::vector<std::string> dates;
  std::vector<std::vector<double>> returns;    // [week][stock]
  std::vector<std::string> models;
  std::vector<std::vector<std::vector<double>>> scores;  // [model][week][stock]

  const std::vector<std::vector<double>>& model_scores(const std::string& name) const;
};

struct StrategyResult {
  std::string name;
  PortfolioMode mode = PortfolioMode::kLongShort;
  PnlSeries pnl;
  StrategyStats stats;
  double mean_overlap = 0.0;
};

struct RankMetricsRow {
  std::string model;
  std::size_t weeks = 0;
  double ic = 0.0;       // mean weekly Spearman IC
  double ic_std = 0.0;
  double ic_t = 0.0;     // mean / (std / sqrt(weeks))
  std::size_t degenerate_weeks = 0;
  double ndcg = 0.0;     // full-list NDCG
  double ndcg_k = 0.0;
  double ndcg_minus_k = 0.0;
  double ndcg_pm_k = 0.0;
};

struct BacktestResult {
  std::vector<StrategyResult> strategies;
  std::vector<RankMetricsRow> rank_metrics;
  ScoreBook book;
};

// Trains every model in every rolling window on that window's min-max
// normalized panel, scores the test weeks and accounts every strategy.
BacktestResult run_backtest(const FactorPanel& panel,
                            const BacktestConfig& config);

// Mean weekly gross return in bps of the strategy re-cut at each k in
// [1, k_max]. rows[k - 1][strategy].
struct HeatmapTable {
  std::vector<std::string> columns;
  std::vector<std::size_t> ks;
  std::vector<std::vector<double>> bps;
};

HeatmapTable cutoff_heatmap(const ScoreBook& book,
                            std::span<const StrategySpec> strategies,
                            std::size_t k_max, double leg_notional = 0.5);

// Mean weekly gross bps of top-k long / bottom-k short for k = 1..k_max on
// explicit scores; the building block of the heatmap.
std::vector<double> cutoff_curve(std::span<const std::vector<double>> scores,
                                 std::span<const std::vector<double>> returns,
                                 std::size_t k_max, double leg_notional = 0.5);

struct BatchGrid {
  std::vector<std::size_t> batch_sizes;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> bps;  // [batch size][strategy]
};

// Re-runs the backtest for each batch size with total_batches held fixed and
// reports mean weekly gross bps per strategy.
BatchGrid batch_size_grid(const FactorPanel& panel,
                          std::span<const std::size_t> batch_sizes,
                          const BacktestConfig& config);

double mean_gross_bps(const PnlSeries& pnl);

void write_stats_csv(const BacktestResult& result, std::ostream& out);
void write_rank_metrics_csv(const BacktestResult& result, std::ostream& out);
void write_pnl_csv(const PnlSeries& pnl, std::ostream& out);
void write_heatmap_csv(const HeatmapTable& table, std::ostream& out);
void write_batch_grid_csv(const BatchGrid& grid, std::ostream& out);
void write_stats_table(const BacktestResult& result, std::ostream& out);

}  // namespace listfold

#endif  // LISTFOLD_BACKTEST_HPP_
