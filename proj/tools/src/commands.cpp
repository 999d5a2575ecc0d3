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

#include "listfold/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "listfold/backtest.hpp"
#include "listfold/error.hpp"
#include "listfold/lab.hpp"
#include "listfold/losses.hpp"
#include "listfold/network.hpp"
#include "listfold/panel.hpp"
#include "listfold/training.hpp"

namespace listfold::cli {
namespace {

namespace fs = std::filesystem;

fs::path output_dir(const RunConfig& config) {
  fs::path dir = config.get_string("out", "listfold_out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string());
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  body(out);
  if (!out) throw DataError("write failed for " + path.string());
}

FactorPanel input_panel(const RunConfig& config) {
  const fs::path path = config.require_string("panel");
  if (!fs::exists(path)) throw DataError("panel file not found: " + path.string());
  const double threshold = config.get_double("missing_threshold", 0.001);
  if (threshold < 0.0 || threshold > 1.0) {
    throw ConfigError("missing_threshold", "must lie in [0, 1]");
  }
  return filter_by_missing(load_panel(path), threshold);
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig tc;
  tc.batch_size = config.get_size("batch_size", tc.batch_size);
  tc.total_batches = config.get_size("total_batches", tc.total_batches);
  tc.learning_rate = config.get_double("learning_rate", tc.learning_rate);
  tc.seed = config.get_u64("seed", tc.seed);
  tc.patience = config.get_size("patience", tc.patience);
  if (config.has("optimizer")) {
    try {
      tc.optimizer = parse_optimizer(config.get_string("optimizer", ""));
    } catch (const InvalidArgument& e) {
      throw ConfigError("optimizer", e.what());
    }
  }
  if (tc.batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  if (!(tc.learning_rate >= 0.0)) throw ConfigError("learning_rate", "must be >= 0");
  return tc;
}

LossSpec loss_from(const RunConfig& config) {
  try {
    return LossSpec::parse(config.get_string("loss", "listfold-exp"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("loss", e.what());
  }
}

WindowPlan window_plan(const RunConfig& config, const FactorPanel& panel) {
  const auto plans = rolling_windows(panel.num_dates(), config.get_size("train_weeks", 300),
                                     config.get_size("test_weeks", 16));
  const std::size_t index = config.get_size("window", 0);
  if (index >= plans.size()) {
    throw ConfigError("window", "index " + std::to_string(index) + " but only " +
                                    std::to_string(plans.size()) + " windows");
  }
  WindowPlan plan = plans[index];
  fit_normalization(plan, panel);
  return plan;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string join(std::span<const double> v, int digits = 6) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fixed(v[i], digits);
  }
  return out + ")";
}

int cmd_backtest(const RunConfig& config, std::ostream& out) {
  const fs::path dir = output_dir(config);
  const FactorPanel panel = input_panel(config);

  const std::size_t k = config.get_size("k", 8);
  BacktestConfig bc = BacktestConfig::standard(k);
  bc.train = train_config(config);
  bc.train_weeks = config.get_size("train_weeks", bc.train_weeks);
  bc.test_weeks = config.get_size("test_weeks", bc.test_weeks);
  bc.cost_bps = config.get_double("cost_bps", bc.cost_bps);
  bc.rf_annual = config.get_double("rf", bc.rf_annual);
  bc.leg_notional = config.get_double("leg_notional", bc.leg_notional);
  bc.label_levels = static_cast<int>(config.get_size("label_levels", 10));
  bc.ndcg_k = config.get_size("ndcg_k", bc.ndcg_k);
  bc.threads = config.get_size("threads", 1);
  if (k == 0 || 2 * k > panel.num_stocks()) {
    throw ConfigError("k", "must lie in [1, " + std::to_string(panel.num_stocks() / 2) + "]");
  }

  const auto wanted = config.get_list("strategies", {"all"});
  if (!(wanted.size() == 1 && wanted[0] == "all")) {
    std::vector<StrategySpec> kept;
    for (const auto& name : wanted) {
      const auto it = std::find_if(bc.strategies.begin(), bc.strategies.end(),
                                   [&](const StrategySpec& s) { return s.name == name; });
      if (it == bc.strategies.end()) throw ConfigError("strategies", "unknown strategy '" + name + "'");
      kept.push_back(*it);
    }
    bc.strategies = std::move(kept);
  }
  std::set<std::string> used;
  for (const auto& s : bc.strategies) {
    used.insert(s.model);
    if (!s.reverse_model.empty()) used.insert(s.reverse_model);
  }
  std::erase_if(bc.models, [&](const ModelSpec& m) { return !used.count(m.name); });

  const BacktestResult result = run_backtest(panel, bc);

  write_file(dir / "stats.csv", [&](std::ostream& o) { write_stats_csv(result, o); });
  write_file(dir / "rankmetrics.csv",
             [&](std::ostream& o) { write_rank_metrics_csv(result, o); });
  for (const auto& s : result.strategies) {
    write_file(dir / ("pnl_" + s.name + ".csv"),
               [&](std::ostream& o) { write_pnl_csv(s.pnl, o); });
  }
  const std::size_t k_max =
      std::min(config.get_size("heatmap_k_max", panel.num_stocks() / 2), panel.num_stocks() / 2);
  const HeatmapTable heat = cutoff_heatmap(result.book, bc.strategies, k_max, bc.leg_notional);
  write_file(dir / "heatmap.csv", [&](std::ostream& o) { write_heatmap_csv(heat, o); });

  const auto sizes = config.get_size_list("batch_sizes", {});
  if (!sizes.empty()) {
    BacktestConfig grid_config = BacktestConfig::batch_grid(k);
    grid_config.train = bc.train;
    grid_config.train_weeks = bc.train_weeks;
    grid_config.test_weeks = bc.test_weeks;
    grid_config.cost_bps = bc.cost_bps;
    grid_config.rf_annual = bc.rf_annual;
    grid_config.leg_notional = bc.leg_notional;
    grid_config.threads = bc.threads;
    const BatchGrid grid = batch_size_grid(panel, sizes, grid_config);
    write_file(dir / "batchgrid.csv", [&](std::ostream& o) { write_batch_grid_csv(grid, o); });
  }

  write_stats_table(result, out);
  out << "wrote " << (dir / "stats.csv").string() << '\n';
  return kExitOk;
}

std::vector<std::size_t> verify_sizes(const RunConfig& config) {
  const auto sizes = config.get_size_list("sizes", {2, 4, 6, 8});
  if (sizes.empty()) throw ConfigError("sizes", "empty list");
  for (std::size_t s : sizes) {
    if (s < 2 || s % 2 != 0 || s > lab::kMaxEnumerationSize) {
      throw ConfigError("sizes", "each size must be even and within [2, " +
                                     std::to_string(lab::kMaxEnumerationSize) + "], got " +
                                     std::to_string(s));
    }
  }
  return sizes;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  const auto sizes = verify_sizes(config);
  const std::size_t trials = config.get_size("trials", 100);
  const std::size_t budget = config.get_size("budget", 1000);
  const std::uint64_t seed = config.get_u64("seed", 0);
  std::vector<lab::ScoreDistribution> dists;
  const std::string dist_name = config.get_string("distribution", "all");
  if (dist_name == "all") {
    dists = {lab::ScoreDistribution::kUniform, lab::ScoreDistribution::kNormal,
             lab::ScoreDistribution::kClustered, lab::ScoreDistribution::kNearTie};
  } else {
    try {
      dists = {lab::parse_distribution(dist_name)};
    } catch (const InvalidArgument& e) {
      throw ConfigError("distribution", e.what());
    }
  }
  const fs::path dir = output_dir(config);

  std::ostringstream report;
  bool ok = true;

  const LossSpec fold_exp{LossFamily::kListFold, Transform::exponential()};
  const LossSpec fold_sgm{LossFamily::kListFold, Transform::sigmoid()};
  struct Golden {
    std::vector<double> scores;
    double expected;
  };
  const std::vector<Golden> golden = {
      {{5, 4, 1, 0}, 0.65}, {{1, 5, 4, 0}, 4.78}, {{5, 1, 4, 0}, 6.65}};
  report << "[golden] listfold-exp, tolerance 0.01\n";
  for (const auto& g : golden) {
    const double v = listfold_loss(g.scores, Transform::exponential()).value;
    const bool pass = std::abs(v - g.expected) <= 0.01;
    ok = ok && pass;
    report << "  L" << join(g.scores, 0) << " = " << fixed(v) << " expected "
           << fixed(g.expected, 2) << (pass ? " PASS" : " FAIL") << '\n';
  }

  std::vector<std::size_t> n_values;
  for (std::size_t s : sizes) n_values.push_back(s / 2);

  const auto t1 = lab::verify_sigmoid_pairing_family(trials, n_values, seed);
  const auto t2r = lab::verify_descending_minimizer(trials, n_values, seed + 1, true);
  const auto t2u = lab::verify_descending_minimizer(trials, n_values, seed + 2, false);
  for (const auto* t : {&t1, &t2r, &t2u}) {
    report << '\n';
    lab::write_property_summary(*t, report);
    ok = ok && t->ok();
  }

  const std::vector<double> example = {5, 4, 1, 0};
  const auto probe = lab::order_sensitivity_probe(example, fold_exp);
  report << "\n[order-sensitivity] listfold-exp on (5,4,1,0): " << probe.swaps_checked
         << " swaps toward the truth, " << probe.violations.size() << " raise the loss\n";
  for (const auto& v : probe.violations) {
    report << "  " << join(v.before, 0) << " swap " << v.i << "<->" << v.j
           << " delta " << fixed(v.delta) << '\n';
  }

  report << "\n[counterexample-search] listfold-exp, budget " << budget << '\n';
  std::ostringstream witnesses;
  witnesses << "size,distribution,scores,ordering,gap\n";
  std::size_t found = 0;
  for (std::size_t s : sizes) {
    for (std::size_t d = 0; d < dists.size(); ++d) {
      const auto w = lab::counterexample_search(budget, s, dists[d], seed + 100 * s + d);
      found += w.size();
      report << "  size " << s << ' ' << lab::to_string(dists[d]) << ": " << w.size()
             << " witnesses\n";
      for (const auto& x : w) {
        witnesses << s << ',' << lab::to_string(dists[d]) << ",\"" << join(x.scores, 9)
                  << "\",\"" << join(x.ordering, 9) << "\"," << fixed(x.gap, 12) << '\n';
      }
    }
  }
  report << "  total witnesses: " << found << '\n';
  report << "\nresult: " << (ok ? "PASS" : "FAIL") << '\n';

  write_file(dir / "verify_report.txt", [&](std::ostream& o) { o << report.str(); });
  write_file(dir / "counterexamples.csv", [&](std::ostream& o) { o << witnesses.str(); });
  for (const auto& spec : {fold_exp, fold_sgm}) {
    const auto rep = lab::enumerate_losses(example, spec);
    write_file(dir / ("enumeration_" + spec.name() + ".csv"),
               [&](std::ostream& o) { lab::write_enumeration_csv(rep, o); });
  }
  out << report.str();
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  lab::SamplerSpec spec;
  const std::string model = config.get_string("model", "plank");
  if (model == "vase") {
    spec.model = lab::SamplerModel::kVase;
  } else if (model == "plank" || model == "plank-dart") {
    spec.model = lab::SamplerModel::kPlankDart;
  } else {
    throw ConfigError("model", "expected vase or plank, got '" + model + "'");
  }
  spec.weights = config.get_double_list("weights", {1.0, 1.0});
  for (double w : spec.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weights", "weights must be positive");
  }
  if (spec.weights.empty() || spec.weights.size() > lab::kMaxEnumerationSize) {
    throw ConfigError("weights", "need 1 to " + std::to_string(lab::kMaxEnumerationSize) +
                                     " weights");
  }
  if (spec.model == lab::SamplerModel::kPlankDart && spec.weights.size() % 2 != 0) {
    throw ConfigError("weights", "plank model needs an even number of weights");
  }
  spec.draws = config.get_size("draws", 100000);
  if (spec.draws == 0) throw ConfigError("draws", "must be >= 1");
  spec.seed = config.get_u64("seed", 0);

  const auto table = spec.model == lab::SamplerModel::kVase ? lab::sample_vase(spec)
                                                            : lab::sample_plank_dart(spec);
  const fs::path dir = output_dir(config);
  write_file(dir / "frequencies.csv",
             [&](std::ostream& o) { lab::write_frequency_csv(table, o); });
  out << model << " sampler, " << table.draws << " draws, " << table.entries.size()
      << " orderings, max |z| " << fixed(table.max_abs_z(), 3) << '\n';
  for (const auto& e : table.entries) {
    out << "  ";
    for (std::size_t p : e.permutation) out << p;
    out << "  empirical " << fixed(e.empirical) << "  analytic " << fixed(e.analytic)
        << "  z " << fixed(e.z, 3) << '\n';
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  SyntheticOptions o;
  o.seed = config.get_u64("seed", o.seed);
  o.weeks = config.get_size("weeks", o.weeks);
  o.stocks = config.get_size("stocks", o.stocks);
  o.factors = config.get_size("factors", o.factors);
  o.signal_strength = config.get_double("signal", o.signal_strength);
  o.noise = config.get_double("noise", o.noise);
  o.signal_factors = config.get_size("signal_factors", std::min(o.signal_factors, o.factors));
  const FactorPanel panel = generate_synthetic_panel(o);
  const fs::path path = output_dir(config) / "panel.csv";
  save_panel(panel, path);
  out << "wrote " << path.string() << ": " << panel.num_dates() << " weeks x "
      << panel.num_stocks() << " stocks x " << panel.num_factors() << " factors\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const fs::path dir = output_dir(config);
  const FactorPanel panel = input_panel(config);
  const WindowPlan plan = window_plan(config, panel);
  const FactorPanel normalized = minmax_normalize(panel, plan);
  const LossSpec loss = loss_from(config);
  TrainConfig tc = train_config(config);
  tc.loss = loss;
  tc.final_relu = loss.family != LossFamily::kMSE;
  tc.reverse_labels = config.get_bool("reverse_labels", false);
  const ScoringNet net = train(normalized, plan, tc);
  const fs::path path = dir / "model.ckpt";
  save_checkpoint(net, fnv1a64(tc.fingerprint()), path);
  out << "trained " << loss.name() << " on weeks " << panel.dates[plan.train.begin] << " .. "
      << panel.dates[plan.train.end - 1] << ", wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_score(const RunConfig& config, std::ostream& out) {
  const fs::path dir = output_dir(config);
  const std::string week = config.require_string("week");
  const FactorPanel panel = input_panel(config);
  const WindowPlan plan = window_plan(config, panel);
  const FactorPanel normalized = minmax_normalize(panel, plan);
  const fs::path ckpt = config.get_string("checkpoint", (dir / "model.ckpt").string());
  if (!fs::exists(ckpt)) throw DataError("checkpoint not found: " + ckpt.string());
  const ScoringNet net = load_checkpoint(ckpt);
  if (net.feature_dim() != panel.num_factors()) {
    throw DataError("checkpoint expects " + std::to_string(net.feature_dim()) +
                    " factors, panel has " + std::to_string(panel.num_factors()));
  }
  if (!panel.find_date(week)) throw ConfigError("week", "unknown week '" + week + "'");
  const auto scores = score_week(net, normalized, std::string_view(week));
  const fs::path path = dir / ("scores_" + week + ".csv");
  write_file(path, [&](std::ostream& o) {
    o << "stock,score\n";
    o << std::setprecision(17);
    for (std::size_t s = 0; s < scores.size(); ++s) {
      o << panel.stocks[s] << ',' << scores[s] << '\n';
    }
  });
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"backtest", "verify", "simulate",
                                                 "synth",    "train",  "score"};
  return names;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "backtest") return cmd_backtest(config, out);
    if (name == "verify") return cmd_verify(config, out);
    if (name == "simulate") return cmd_simulate(config, out);
    if (name == "synth") return cmd_synth(config, out);
    if (name == "train") return cmd_train(config, out);
    if (name == "score") return cmd_score(config, out);
    err << "error: unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace listfold::cli
