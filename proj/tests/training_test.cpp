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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "listfold/error.hpp"
#include "listfold/losses.hpp"
#include "listfold/metrics.hpp"
#include "listfold/network.hpp"
#include "listfold/panel.hpp"
#include "listfold/training.hpp"

namespace listfold {
namespace {

FactorPanel small_panel(double signal, std::uint64_t seed, std::size_t weeks = 120,
                        std::size_t stocks = 30, std::size_t factors = 6) {
  SyntheticOptions o;
  o.weeks = weeks;
  o.stocks = stocks;
  o.factors = factors;
  o.signal_factors = 3;
  o.signal_strength = signal;
  o.noise = 0.3;
  o.seed = seed;
  return generate_synthetic_panel(o);
}

WindowPlan fitted_plan(const FactorPanel& p, std::size_t train, std::size_t test) {
  WindowPlan plan = rolling_windows(p.num_dates(), train, test).front();
  fit_normalization(plan, p);
  return plan;
}

std::vector<RankedBatch> lists(const FactorPanel& p, std::size_t count) {
  std::vector<RankedBatch> out;
  for (std::size_t w = 0; w < count; ++w) out.push_back(make_ranked_batch(p, w));
  return out;
}

TEST(TrainConfig, ForLossDropsFinalReluForMse) {
  EXPECT_FALSE(TrainConfig::for_loss(LossSpec::parse("mse")).final_relu);
  EXPECT_TRUE(TrainConfig::for_loss(LossSpec::parse("listfold-exp")).final_relu);
  EXPECT_EQ(parse_optimizer("sgd"), OptimizerKind::kSGD);
  EXPECT_THROW(parse_optimizer("rmsprop"), InvalidArgument);
}

TEST(TrainStep, ZeroLearningRateLeavesParameters) {
  const FactorPanel p = small_panel(1.0, 1);
  const auto batch = lists(p, 4);
  for (OptimizerKind kind : {OptimizerKind::kSGD, OptimizerKind::kAdam}) {
    auto net = ScoringNet::init(p.num_factors(), 3, true);
    const auto before = net.parameters();
    OptimizerState state;
    state.kind = kind;
    const auto r = train_step(net, batch, LossSpec::parse("listfold-exp"), 0.0, state);
    EXPECT_TRUE(r.finite);
    EXPECT_EQ(net.parameters(), before);
  }
}

TEST(TrainStep, SgdOnMseMatchesHandUpdate) {
  // score = w * x + b with no activation; one list of two stocks.
  ScoringNet net({1, 1}, false);
  net.layers()[0].weight << 0.5;
  net.layers()[0].bias << 0.1;
  RankedBatch list;
  list.features.resize(2, 1);
  list.features << 1.0, 2.0;
  list.returns = {0.3, 0.0};
  list.truth_order = {0, 1};
  list.labels = {2, 1};
  // f = (0.6, 1.1); dL/df = (2/2)(f - r) = (0.3, 1.1).
  // dL/dw = 0.3 * 1 + 1.1 * 2 = 2.5; dL/db = 1.4; L = (0.09 + 1.21) / 2.
  OptimizerState state;
  state.kind = OptimizerKind::kSGD;
  const std::vector<RankedBatch> batch = {list};
  const auto r = train_step(net, batch, LossSpec::parse("mse"), 0.1, state);
  EXPECT_NEAR(r.loss, 0.65, 1e-15);
  EXPECT_NEAR(net.layers()[0].weight(0, 0), 0.5 - 0.25, 1e-15);
  EXPECT_NEAR(net.layers()[0].bias(0), 0.1 - 0.14, 1e-15);
}

TEST(EvaluateBatch, ScoreGradientMatchesLossModule) {
  const FactorPanel p = small_panel(1.0, 2, 10, 12, 4);
  const auto batch = lists(p, 3);
  const auto net = ScoringNet::init(p.num_factors(), 5, false);
  const LossSpec spec = LossSpec::parse("listfold-exp");
  const auto eval = evaluate_batch(net, batch, spec);
  double mean_loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Eigen::VectorXd s = net.forward(batch[b].features);
    std::vector<double> ordered;
    for (std::size_t row : batch[b].truth_order) ordered.push_back(s(static_cast<Eigen::Index>(row)));
    const auto lr = listfold_loss(ordered, spec.transform);
    mean_loss += lr.value / 3.0;
    for (std::size_t pos = 0; pos < ordered.size(); ++pos) {
      const auto row = static_cast<Eigen::Index>(batch[b].truth_order[pos]);
      EXPECT_NEAR(eval.score_gradient(eval.offsets[b] + row), lr.gradient[pos] / 3.0, 1e-12);
    }
  }
  EXPECT_NEAR(eval.loss, mean_loss, 1e-12);
}

TEST(EvaluateBatch, OddListDropsMedian) {
  const FactorPanel p = small_panel(1.0, 4, 5, 7, 3);
  const auto batch = lists(p, 1);
  const auto net = ScoringNet::init(p.num_factors(), 5, false);
  const auto eval = evaluate_batch(net, batch, LossSpec::parse("listfold-exp"));
  const auto median = static_cast<Eigen::Index>(batch[0].truth_order[3]);
  EXPECT_EQ(eval.score_gradient(median), 0.0);
  EXPECT_TRUE(std::isfinite(eval.loss));
}

TEST(Train, ZeroBatchesReturnsInitialNet) {
  const FactorPanel p = small_panel(1.0, 5);
  const WindowPlan plan = fitted_plan(p, 100, 10);
  TrainConfig tc;
  tc.total_batches = 0;
  tc.seed = 17;
  const auto net = train(minmax_normalize(p, plan), plan, tc);
  EXPECT_TRUE(net == ScoringNet::init(p.num_factors(), 17, true));
}

TEST(Train, DeterministicAndTouchesOnlyTrainingWeeks) {
  const FactorPanel p = small_panel(1.0, 6);
  const WindowPlan plan = fitted_plan(p, 100, 10);
  const FactorPanel norm = minmax_normalize(p, plan);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.total_batches = 30;
  tc.seed = 3;
  std::vector<std::size_t> weeks;
  std::vector<double> losses;
  const auto a = train(norm, plan, tc, {&weeks, &losses});
  const auto b = train(norm, plan, tc);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(losses.size(), 30u);
  ASSERT_FALSE(weeks.empty());
  for (std::size_t w : weeks) EXPECT_TRUE(plan.train.contains(w)) << w;
}

TEST(Train, EarlyStoppingCutsBatches) {
  const FactorPanel p = small_panel(0.0, 7);
  const WindowPlan plan = fitted_plan(p, 100, 10);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.total_batches = 400;
  tc.patience = 5;
  std::vector<double> losses;
  train(minmax_normalize(p, plan), plan, tc, {nullptr, &losses});
  EXPECT_LT(losses.size(), 400u);
}

TEST(Train, DivergenceIsReported) {
  FactorPanel p = small_panel(1.0, 8);
  const WindowPlan plan = fitted_plan(p, 100, 10);
  FactorPanel norm = minmax_normalize(p, plan);
  for (double& v : norm.factors) v = 1e300;
  TrainConfig tc;
  tc.loss = LossSpec::parse("mse");
  tc.final_relu = false;
  tc.total_batches = 20;
  tc.batch_size = 4;
  EXPECT_THROW(train(norm, plan, tc), DivergenceError);
}

double mean_test_ic(const FactorPanel& p, const WindowPlan& plan, const TrainConfig& tc) {
  const FactorPanel norm = minmax_normalize(p, plan);
  const auto net = train(norm, plan, tc);
  double total = 0.0;
  for (std::size_t w = plan.test.begin; w < plan.test.end; ++w) {
    total += spearman_ic(score_week(net, norm, w), p.week_returns(w)).value;
  }
  return total / static_cast<double>(plan.test.size());
}

TEST(Train, PlantedSignalIsLearned) {
  const FactorPanel p = small_panel(1.0, 9, 140);
  const WindowPlan plan = fitted_plan(p, 100, 40);
  TrainConfig tc;
  tc.batch_size = 16;
  tc.total_batches = 150;
  tc.learning_rate = 3e-3;
  EXPECT_GT(mean_test_ic(p, plan, tc), 0.3);
}

TEST(Train, ZeroSignalLearnsNothing) {
  const FactorPanel p = small_panel(0.0, 10, 140);
  const WindowPlan plan = fitted_plan(p, 100, 40);
  TrainConfig tc;
  tc.batch_size = 16;
  tc.total_batches = 60;
  EXPECT_LT(std::abs(mean_test_ic(p, plan, tc)), 0.1);
}

TEST(ScoreWeek, AlignedAndByDate) {
  const FactorPanel p = small_panel(1.0, 11, 20, 9, 4);
  const auto net = ScoringNet::init(4, 1, true);
  const auto s = score_week(net, p, 3);
  ASSERT_EQ(s.size(), 9u);
  EXPECT_EQ(score_week(net, p, std::string_view(p.dates[3])), s);
  const Eigen::VectorXd direct = net.forward(p.week_features(3));
  for (int i = 0; i < 9; ++i) EXPECT_EQ(direct(i), s[static_cast<std::size_t>(i)]);
  EXPECT_THROW(score_week(net, p, std::string_view("1999-01-01")), InvalidArgument);
}

}  // namespace
}  // namespace listfold
