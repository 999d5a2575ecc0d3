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

#include "listfold/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include "listfold/error.hpp"
#include "listfold/metrics.hpp"

namespace listfold {
namespace {

// Indices by score, best first; ties go to the lower index.
std::vector<std::size_t> best_first(std::span<const double> scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("portfolio: non-finite score");
  }
  return descending_order(scores);
}

// Indices by score, worst first; ties go to the lower index.
std::vector<std::size_t> worst_first(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

void require_k(std::size_t k, std::size_t needed, std::size_t universe) {
  if (k == 0) throw InvalidArgument("portfolio: k must be >= 1");
  if (needed > universe) {
    throw InvalidArgument("portfolio: universe of " + std::to_string(universe) +
                          " stocks is too small for k = " + std::to_string(k));
  }
}

std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double leg_sum(const std::vector<std::pair<std::size_t, double>>& leg) {
  double total = 0.0;
  for (const auto& [s, w] : leg) total += w;
  return total;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double new_name_share(const std::vector<std::pair<std::size_t, double>>& current,
                      const std::vector<std::pair<std::size_t, double>>* previous) {
  if (current.empty()) return 0.0;
  if (!previous) return 1.0;
  std::set<std::size_t> before;
  for (const auto& [s, w] : *previous) before.insert(s);
  std::size_t fresh = 0;
  for (const auto& [s, w] : current) {
    if (!before.count(s)) ++fresh;
  }
  return static_cast<double>(fresh) / static_cast<double>(current.size());
}

}  // namespace

std::string to_string(PortfolioMode mode) {
  switch (mode) {
    case PortfolioMode::kLongShort:
      return "long-short";
    case PortfolioMode::kShortAverage:
      return "short-average";
    case PortfolioMode::kList2MLE:
      return "list2mle";
  }
  return "long-short";
}

PortfolioMode parse_portfolio_mode(std::string_view name) {
  if (name == "long-short" || name == "ls") return PortfolioMode::kLongShort;
  if (name == "short-average" || name == "sa") return PortfolioMode::kShortAverage;
  if (name == "list2mle") return PortfolioMode::kList2MLE;
  throw InvalidArgument("unknown portfolio mode '" + std::string(name) + "'");
}

double Portfolio::long_notional() const { return leg_sum(longs); }
double Portfolio::short_notional() const { return leg_sum(shorts); }

std::vector<double> Portfolio::signed_weights(std::size_t universe) const {
  std::vector<double> w(universe, 0.0);
  for (const auto& [s, v] : longs) w.at(s) += v;
  for (const auto& [s, v] : shorts) w.at(s) -= v;
  return w;
}

Portfolio build_long_short(std::span<const double> scores, std::size_t k,
                           double leg_notional) {
  require_k(k, 2 * k, scores.size());
  Portfolio p;
  p.mode = PortfolioMode::kLongShort;
  const auto top = best_first(scores);
  const double w = leg_notional / static_cast<double>(k);
  std::vector<bool> taken(scores.size(), false);
  for (std::size_t i = 0; i < k; ++i) {
    p.longs.emplace_back(top[i], w);
    taken[top[i]] = true;
  }
  for (std::size_t s : worst_first(scores)) {
    if (p.shorts.size() == k) break;
    if (!taken[s]) p.shorts.emplace_back(s, w);
  }
  return p;
}

Portfolio build_short_average(std::span<const double> scores, std::size_t k,
                              double leg_notional) {
  require_k(k, k, scores.size());
  Portfolio p;
  p.mode = PortfolioMode::kShortAverage;
  const auto top = best_first(scores);
  const double w = leg_notional / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) p.longs.emplace_back(top[i], w);
  const double ws = leg_notional / static_cast<double>(scores.size());
  for (std::size_t s = 0; s < scores.size(); ++s) p.shorts.emplace_back(s, ws);
  p.overlap = k;
  return p;
}

Portfolio build_list2mle(std::span<const double> forward_scores,
                         std::span<const double> reverse_scores, std::size_t k,
                         double leg_notional) {
  if (forward_scores.size() != reverse_scores.size()) {
    throw InvalidArgument("build_list2mle: score vectors cover different universes");
  }
  require_k(k, k, forward_scores.size());
  Portfolio p;
  p.mode = PortfolioMode::kList2MLE;
  const auto top = best_first(forward_scores);
  const auto bottom = best_first(reverse_scores);
  const double w = leg_notional / static_cast<double>(k);
  std::set<std::size_t> longs;
  for (std::size_t i = 0; i < k; ++i) {
    p.longs.emplace_back(top[i], w);
    longs.insert(top[i]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    p.shorts.emplace_back(bottom[i], w);
    if (longs.count(bottom[i])) ++p.overlap;
  }
  return p;
}

WeekPnl week_pnl(const Portfolio& current, const Portfolio* previous,
                 std::span<const double> realized_returns, double cost_bps) {
  WeekPnl out;
  auto leg_return = [&](const std::vector<std::pair<std::size_t, double>>& leg) {
    double total = 0.0;
    for (const auto& [s, w] : leg) {
      if (s >= realized_returns.size() || !std::isfinite(realized_returns[s])) {
        throw DataError("week_pnl: missing return for held stock " +
                        std::to_string(s) +
                        (current.date.empty() ? "" : " on " + current.date));
      }
      total += w * realized_returns[s];
    }
    return total;
  };
  out.long_leg = leg_return(current.longs);
  out.short_leg = leg_return(current.shorts);
  out.gross = out.long_leg - out.short_leg;

  const std::size_t n = realized_returns.size();
  const auto now = current.signed_weights(n);
  const auto before = previous ? previous->signed_weights(n) : std::vector<double>(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) out.traded += std::abs(now[s] - before[s]);
  out.cost = cost_bps * 1e-4 * out.traded;
  out.net = out.gross - out.cost;
  out.turnover = 0.5 * (new_name_share(current.longs, previous ? &previous->longs : nullptr) +
                        new_name_share(current.shorts, previous ? &previous->shorts : nullptr));
  return out;
}

void PnlSeries::append(const std::string& date, const WeekPnl& week) {
  dates.push_back(date);
  gross.push_back(week.gross);
  cost.push_back(week.cost);
  weekly_returns.push_back(week.net);
  cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + week.net);
  turnover.push_back(week.turnover);
}

double max_drawdown(std::span<const double> cumulative) {
  double peak = 0.0;
  double worst = 0.0;
  for (double c : cumulative) {
    peak = std::max(peak, c);
    worst = std::max(worst, peak - c);
  }
  return worst;
}

StrategyStats compute_stats(const PnlSeries& pnl, double rf_annual,
                            int periods_per_year) {
  const std::size_t n = pnl.weekly_returns.size();
  if (n < 2) throw InvalidArgument("compute_stats: need at least 2 periods");
  const double periods = static_cast<double>(periods_per_year);
  const double mean = mean_of(pnl.weekly_returns);
  double ss = 0.0;
  for (double r : pnl.weekly_returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  StrategyStats st;
  st.mu_excess = mean * periods - rf_annual;
  st.sigma = sd * std::sqrt(periods);
  if (st.sigma > 0.0) {
    st.sharpe = st.mu_excess / st.sigma;
  } else {
    st.sharpe = 0.0;
    st.sharpe_defined = false;
  }
  st.mdd = max_drawdown(pnl.cumulative);
  st.trv = mean_of(pnl.turnover);
  return st;
}

BacktestConfig BacktestConfig::standard(std::size_t k) {
  BacktestConfig c;
  const LossSpec fold_exp{LossFamily::kListFold, Transform::exponential()};
  const LossSpec fold_sgm{LossFamily::kListFold, Transform::sigmoid()};
  const LossSpec mle{LossFamily::kListMLE, Transform::exponential()};
  const LossSpec mse{LossFamily::kMSE, Transform::exponential()};
  c.models = {{"listfold-exp", fold_exp, false},
              {"listfold-sgm", fold_sgm, false},
              {"listmle", mle, false},
              {"listmle-rvs", mle, true},
              {"mlp", mse, false}};
  using M = PortfolioMode;
  c.strategies = {
      {"ListFold-exp", M::kLongShort, "listfold-exp", "", k},
      {"ListFold-sgm", M::kLongShort, "listfold-sgm", "", k},
      {"ListMLE", M::kLongShort, "listmle", "", k},
      {"List2MLE", M::kList2MLE, "listmle", "listmle-rvs", k},
      {"MLP", M::kLongShort, "mlp", "", k},
      {"ListFold-exp-sa", M::kShortAverage, "listfold-exp", "", k},
      {"ListFold-sgm-sa", M::kShortAverage, "listfold-sgm", "", k},
      {"ListMLE-sa", M::kShortAverage, "listmle", "", k},
      {"MLP-sa", M::kShortAverage, "mlp", "", k},
  };
  return c;
}

BacktestConfig BacktestConfig::batch_grid(std::size_t k) {
  BacktestConfig c = standard(k);
  c.models.pop_back();
  using M = PortfolioMode;
  c.strategies = {
      {"ListFold-exp", M::kLongShort, "listfold-exp", "", k},
      {"ListFold-sgm", M::kLongShort, "listfold-sgm", "", k},
      {"ListMLE", M::kLongShort, "listmle", "", k},
      {"ListMLE-rvs", M::kLongShort, "listmle-rvs", "", k},
      {"List2MLE", M::kList2MLE, "listmle", "listmle-rvs", k},
  };
  return c;
}

const std::vector<std::vector<double>>& ScoreBook::model_scores(
    const std::string& name) const {
  const auto it = std::find(models.begin(), models.end(), name);
  if (it == models.end()) throw InvalidArgument("unknown model '" + name + "'");
  return scores[static_cast<std::size_t>(it - models.begin())];
}

namespace {

void validate_config(const FactorPanel& panel, const BacktestConfig& config) {
  if (config.models.empty()) throw InvalidArgument("backtest: no models configured");
  std::set<std::string> names;
  for (const auto& m : config.models) {
    if (!names.insert(m.name).second) {
      throw InvalidArgument("backtest: duplicate model '" + m.name + "'");
    }
  }
  for (const auto& s : config.strategies) {
    if (!names.count(s.model)) {
      throw InvalidArgument("strategy '" + s.name + "' references unknown model '" +
                            s.model + "'");
    }
    if (s.mode == PortfolioMode::kList2MLE && !names.count(s.reverse_model)) {
      throw InvalidArgument("strategy '" + s.name +
                            "' needs a known reverse_model");
    }
    const std::size_t needed = s.mode == PortfolioMode::kLongShort ? 2 * s.k : s.k;
    require_k(s.k, needed, panel.num_stocks());
  }
}

Portfolio build_for(const StrategySpec& s, const ScoreBook& book, std::size_t week,
                    std::size_t k, double leg_notional) {
  const auto& scores = book.model_scores(s.model)[week];
  switch (s.mode) {
    case PortfolioMode::kLongShort:
      return build_long_short(scores, k, leg_notional);
    case PortfolioMode::kShortAverage:
      return build_short_average(scores, k, leg_notional);
    case PortfolioMode::kList2MLE: {
      // The reverse model's ranking is stored best-first; its raw score
      // ranks the worst first.
      const auto& ranked = book.model_scores(s.reverse_model)[week];
      std::vector<double> raw(ranked.size());
      for (std::size_t i = 0; i < ranked.size(); ++i) raw[i] = -ranked[i];
      return build_list2mle(scores, raw, k, leg_notional);
    }
  }
  throw InvalidArgument("unknown portfolio mode");
}

RankMetricsRow rank_metrics_for(const std::string& model, const ScoreBook& book,
                                const BacktestConfig& config) {
  RankMetricsRow row;
  row.model = model;
  const auto& scores = book.model_scores(model);
  std::vector<double> ics;
  for (std::size_t w = 0; w < book.weeks.size(); ++w) {
    const auto& r = book.returns[w];
    const MetricValue ic = spearman_ic(scores[w], r);
    if (ic.degenerate) ++row.degenerate_weeks;
    ics.push_back(ic.value);

    const int levels = std::min<int>(config.label_levels, static_cast<int>(r.size()));
    RankEval eval;
    eval.labels = decile_labels(r, levels);
    eval.predicted_order = descending_order(scores[w]);
    eval.k = r.size();
    row.ndcg += ndcg_at_k(eval).value;
    eval.k = std::min(config.ndcg_k, r.size());
    row.ndcg_k += ndcg_at_k(eval).value;
    row.ndcg_minus_k += ndcg_at_minus_k(eval, levels).value;
    row.ndcg_pm_k += ndcg_pm_k(eval, levels).value;
  }
  const double t = static_cast<double>(book.weeks.size());
  row.weeks = book.weeks.size();
  if (row.weeks == 0) return row;
  row.ndcg /= t;
  row.ndcg_k /= t;
  row.ndcg_minus_k /= t;
  row.ndcg_pm_k /= t;
  row.ic = mean_of(ics);
  if (ics.size() > 1) {
    double ss = 0.0;
    for (double v : ics) ss += (v - row.ic) * (v - row.ic);
    row.ic_std = std::sqrt(ss / (t - 1.0));
    row.ic_t = row.ic_std > 0.0 ? row.ic / (row.ic_std / std::sqrt(t)) : 0.0;
  }
  return row;
}

}  // namespace

BacktestResult run_backtest(const FactorPanel& panel,
                            const BacktestConfig& config) {
  validate_config(panel, config);
  const auto plans =
      rolling_windows(panel.num_dates(), config.train_weeks, config.test_weeks);
  const std::size_t n_models = config.models.size();

  // window_scores[window][model][test week][stock]
  std::vector<std::vector<std::vector<std::vector<double>>>> window_scores(plans.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t w = next.fetch_add(1);
      if (w >= plans.size()) return;
      try {
        WindowPlan plan = plans[w];
        fit_normalization(plan, panel);
        const FactorPanel normalized = minmax_normalize(panel, plan);
        auto& out = window_scores[w];
        out.resize(n_models);
        for (std::size_t m = 0; m < n_models; ++m) {
          const ModelSpec& model = config.models[m];
          TrainConfig tc = config.train;
          tc.loss = model.loss;
          tc.reverse_labels = model.reverse_labels;
          tc.final_relu = model.loss.family != LossFamily::kMSE;
          const ScoringNet net = train(normalized, plan, tc);
          for (std::size_t week = plan.test.begin; week < plan.test.end; ++week) {
            auto s = score_week(net, normalized, week);
            if (model.reverse_labels) {
              for (double& v : s) v = -v;
            }
            out[m].push_back(std::move(s));
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(plans.size());
        return;
      }
    }
  };

  const std::size_t threads =
      std::max<std::size_t>(1, std::min(config.threads, plans.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BacktestResult result;
  ScoreBook& book = result.book;
  for (const auto& m : config.models) book.models.push_back(m.name);
  book.scores.resize(n_models);
  for (std::size_t w = 0; w < plans.size(); ++w) {
    for (std::size_t week = plans[w].test.begin; week < plans[w].test.end; ++week) {
      book.weeks.push_back(week);
      book.dates.push_back(panel.dates[week]);
      const auto r = panel.week_returns(week);
      book.returns.emplace_back(r.begin(), r.end());
    }
    for (std::size_t m = 0; m < n_models; ++m) {
      for (auto& s : window_scores[w][m]) book.scores[m].push_back(std::move(s));
    }
  }

  for (const auto& spec : config.strategies) {
    StrategyResult sr;
    sr.name = spec.name;
    sr.mode = spec.mode;
    std::optional<Portfolio> previous;
    double overlap = 0.0;
    for (std::size_t w = 0; w < book.weeks.size(); ++w) {
      Portfolio p = build_for(spec, book, w, spec.k, config.leg_notional);
      p.date = book.dates[w];
      const WeekPnl week = week_pnl(p, previous ? &*previous : nullptr,
                                    book.returns[w], config.cost_bps);
      sr.pnl.append(book.dates[w], week);
      if (spec.mode == PortfolioMode::kList2MLE) overlap += static_cast<double>(p.overlap);
      previous = std::move(p);
    }
    if (!book.weeks.empty()) overlap /= static_cast<double>(book.weeks.size());
    sr.mean_overlap = overlap;
    sr.stats = compute_stats(sr.pnl, config.rf_annual, config.periods_per_year);
    result.strategies.push_back(std::move(sr));
  }

  for (const auto& m : config.models) {
    result.rank_metrics.push_back(rank_metrics_for(m.name, book, config));
  }
  return result;
}

std::vector<double> cutoff_curve(std::span<const std::vector<double>> scores,
                                 std::span<const std::vector<double>> returns,
                                 std::size_t k_max, double leg_notional) {
  if (scores.size() != returns.size()) {
    throw InvalidArgument("cutoff_curve: score and return weeks differ");
  }
  std::vector<double> bps(k_max, 0.0);
  if (scores.empty()) return bps;
  for (std::size_t w = 0; w < scores.size(); ++w) {
    for (std::size_t k = 1; k <= k_max; ++k) {
      const Portfolio p = build_long_short(scores[w], k, leg_notional);
      bps[k - 1] += week_pnl(p, nullptr, returns[w], 0.0).gross;
    }
  }
  for (double& v : bps) v = v / static_cast<double>(scores.size()) * 1e4;
  return bps;
}

HeatmapTable cutoff_heatmap(const ScoreBook& book,
                            std::span<const StrategySpec> strategies,
                            std::size_t k_max, double leg_notional) {
  HeatmapTable table;
  for (std::size_t k = 1; k <= k_max; ++k) table.ks.push_back(k);
  table.bps.assign(k_max, {});
  for (const auto& spec : strategies) {
    if (spec.mode == PortfolioMode::kShortAverage) continue;
    table.columns.push_back(spec.name);
    for (std::size_t k = 1; k <= k_max; ++k) {
      double total = 0.0;
      for (std::size_t w = 0; w < book.weeks.size(); ++w) {
        const Portfolio p = build_for(spec, book, w, k, leg_notional);
        total += week_pnl(p, nullptr, book.returns[w], 0.0).gross;
      }
      const double weeks = static_cast<double>(std::max<std::size_t>(1, book.weeks.size()));
      table.bps[k - 1].push_back(total / weeks * 1e4);
    }
  }
  return table;
}

double mean_gross_bps(const PnlSeries& pnl) { return mean_of(pnl.gross) * 1e4; }

BatchGrid batch_size_grid(const FactorPanel& panel,
                          std::span<const std::size_t> batch_sizes,
                          const BacktestConfig& config) {
  BatchGrid grid;
  grid.batch_sizes.assign(batch_sizes.begin(), batch_sizes.end());
  for (const auto& s : config.strategies) grid.columns.push_back(s.name);
  for (std::size_t bs : batch_sizes) {
    BacktestConfig c = config;
    c.train.batch_size = bs;
    const BacktestResult r = run_backtest(panel, c);
    std::vector<double> row;
    for (const auto& s : r.strategies) row.push_back(mean_gross_bps(s.pnl));
    grid.bps.push_back(std::move(row));
  }
  return grid;
}

void write_stats_csv(const BacktestResult& result, std::ostream& out) {
  out << "strategy,mode,mu_excess,sigma,sharpe,sharpe_defined,mdd,trv,mean_overlap\n";
  for (const auto& s : result.strategies) {
    out << s.name << ',' << to_string(s.mode) << ',' << num(s.stats.mu_excess) << ','
        << num(s.stats.sigma) << ',' << num(s.stats.sharpe) << ','
        << (s.stats.sharpe_defined ? 1 : 0) << ',' << num(s.stats.mdd) << ','
        << num(s.stats.trv) << ',' << num(s.mean_overlap) << '\n';
  }
}

void write_rank_metrics_csv(const BacktestResult& result, std::ostream& out) {
  out << "model,weeks,ic,ic_std,ic_t,degenerate_weeks,ndcg,ndcg_at_k,"
         "ndcg_at_minus_k,ndcg_pm_k\n";
  for (const auto& r : result.rank_metrics) {
    out << r.model << ',' << r.weeks << ',' << num(r.ic) << ',' << num(r.ic_std)
        << ',' << num(r.ic_t) << ',' << r.degenerate_weeks << ',' << num(r.ndcg)
        << ',' << num(r.ndcg_k) << ',' << num(r.ndcg_minus_k) << ','
        << num(r.ndcg_pm_k) << '\n';
  }
}

void write_pnl_csv(const PnlSeries& pnl, std::ostream& out) {
  out << "date,gross,cost,net,cumulative\n";
  for (std::size_t i = 0; i < pnl.size(); ++i) {
    out << pnl.dates[i] << ',' << num(pnl.gross[i]) << ',' << num(pnl.cost[i]) << ','
        << num(pnl.weekly_returns[i]) << ',' << num(pnl.cumulative[i]) << '\n';
  }
}

void write_heatmap_csv(const HeatmapTable& table, std::ostream& out) {
  out << "k";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < table.ks.size(); ++i) {
    out << table.ks[i];
    for (double v : table.bps[i]) out << ',' << num(v);
    out << '\n';
  }
}

void write_batch_grid_csv(const BatchGrid& grid, std::ostream& out) {
  out << "batch_size";
  for (const auto& c : grid.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < grid.batch_sizes.size(); ++i) {
    out << grid.batch_sizes[i];
    for (double v : grid.bps[i]) out << ',' << num(v);
    out << '\n';
  }
}

void write_stats_table(const BacktestResult& result, std::ostream& out) {
  out << std::left << std::setw(18) << "strategy" << std::right << std::setw(10)
      << "mu-rf" << std::setw(10) << "sigma" << std::setw(10) << "SR"
      << std::setw(10) << "MDD" << std::setw(10) << "TRV" << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto& s : result.strategies) {
    out << std::left << std::setw(18) << s.name << std::right << std::setw(10)
        << s.stats.mu_excess << std::setw(10) << s.stats.sigma << std::setw(10)
        << s.stats.sharpe << std::setw(10) << s.stats.mdd << std::setw(10)
        << s.stats.trv << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace listfold
