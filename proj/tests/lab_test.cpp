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
#include <set>
#include <sstream>

#include "listfold/error.hpp"
#include "listfold/lab.hpp"
#include "listfold/losses.hpp"

namespace listfold::lab {
namespace {

const LossSpec kFoldExp = LossSpec::parse("listfold-exp");
const LossSpec kFoldSgm = LossSpec::parse("listfold-sgm");
const LossSpec kMleExp = LossSpec::parse("listmle-exp");

std::set<std::vector<double>> minimizer_values(const EnumerationReport& r) {
  std::set<std::vector<double>> out;
  for (std::size_t i : r.minimizers) out.insert(r.arrangements[i].values);
  return out;
}

TEST(Enumerate, ExpListFoldUniqueDescending) {
  const auto r = enumerate_losses(std::vector<double>{0, 4, 5, 1}, kFoldExp);
  EXPECT_EQ(r.arrangements.size(), 24u);
  ASSERT_EQ(r.minimizers.size(), 1u);
  EXPECT_EQ(r.arrangements[r.minimizers[0]].values, (std::vector<double>{5, 4, 1, 0}));
  EXPECT_NEAR(r.min_loss, 0.65, 0.01);
  EXPECT_EQ(r.classification, MinimizerClass::kDescendingUnique);
}

TEST(Enumerate, SigmoidListFoldPairsMirroredPositions) {
  const auto r = enumerate_losses(std::vector<double>{5, 4, 1, 0}, kFoldSgm);
  const std::set<std::vector<double>> expected = {{5, 4, 0, 1}, {4, 5, 1, 0}};
  EXPECT_EQ(minimizer_values(r), expected);
  EXPECT_EQ(r.classification, MinimizerClass::kBinaryClassSet);
  EXPECT_NEAR(r.min_loss, 1.828059, 1e-6);
  // The descending ordering is not among them.
  double descending = 0.0;
  for (const auto& a : r.arrangements) {
    if (a.values == std::vector<double>{5, 4, 1, 0}) descending = a.loss;
  }
  EXPECT_NEAR(descending, 1.847062, 1e-6);
}

TEST(Enumerate, PairAlwaysPrefersLargerFirst) {
  for (const auto& spec : {kFoldExp, kFoldSgm, kMleExp, LossSpec::parse("naivept-exp")}) {
    const auto r = enumerate_losses(std::vector<double>{-0.3, 2.0}, spec);
    ASSERT_EQ(r.minimizers.size(), 1u) << spec.name();
    EXPECT_EQ(r.arrangements[r.minimizers[0]].values, (std::vector<double>{2.0, -0.3}));
  }
}

TEST(Enumerate, MultisetsListDistinctOrderings) {
  const auto r = enumerate_losses(std::vector<double>{1, 1, 0, 0}, kFoldExp);
  EXPECT_EQ(r.arrangements.size(), 6u);
}

TEST(Enumerate, CapAndParity) {
  EXPECT_THROW(enumerate_losses(std::vector<double>(10, 0.0), kMleExp), InvalidArgument);
  EXPECT_THROW(enumerate_losses(std::vector<double>{1, 2, 3}, kFoldExp), InvalidArgument);
}

TEST(Enumerate, ProbabilitiesSumToOne) {
  for (std::size_t m : {2u, 4u, 6u}) {
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = std::sin(1.7 * static_cast<double>(i + 1));
    for (const auto& spec : {kFoldExp, kMleExp}) {
      const auto r = enumerate_losses(f, spec);
      double total = 0.0;
      for (const auto& a : r.arrangements) total += std::exp(-a.loss);
      EXPECT_NEAR(total, 1.0, 1e-9) << spec.name() << " m=" << m;
    }
  }
}

TEST(Enumerate, CsvHasOneRowPerOrdering) {
  const auto r = enumerate_losses(std::vector<double>{5, 4, 1, 0}, kFoldExp);
  std::ostringstream out;
  write_enumeration_csv(r, out);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("permutation,loss,is_minimizer\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 25);
}

TEST(ExpTable, MatchesListFold) {
  const std::vector<double> scores = {1.3, -0.2, 0.7, 2.2, -1.1, 0.05};
  const ExpListFoldTable table(scores);
  std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
  do {
    std::vector<double> arranged;
    for (std::size_t i : order) arranged.push_back(scores[i]);
    EXPECT_NEAR(table.loss(order), listfold_loss(arranged, Transform::exponential()).value, 1e-10);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST(SigmoidPairingFamily, NoViolations) {
  const std::vector<std::size_t> ns = {1, 2, 3};
  const auto r = verify_sigmoid_pairing_family(100, ns, 1);
  EXPECT_EQ(r.cases, 300u);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.degenerate, 0u);
}

TEST(SigmoidPairingFamily, PairCaseIsMaxThenMin) {
  const auto c = check_sigmoid_pairing(std::vector<double>{-1.0, 3.0});
  EXPECT_EQ(c.status, CaseStatus::kPass);
}

TEST(SigmoidPairingFamily, TieAcrossMedianKeepsPairingFamily) {
  // Equal values collapse arrangements, so the pairing family still matches.
  const auto c = check_sigmoid_pairing(std::vector<double>{3.0, 1.0, 1.0, 0.0});
  EXPECT_EQ(c.status, CaseStatus::kPass);
}

TEST(DescendingMinimizer, RestrictedAndUnrestricted) {
  const std::vector<std::size_t> ns = {1, 2, 3, 4};
  const auto restricted = verify_descending_minimizer(100, ns, 2, true);
  EXPECT_TRUE(restricted.ok());
  EXPECT_EQ(restricted.degenerate, 0u);
  const auto full = verify_descending_minimizer(100, ns, 3, false);
  EXPECT_TRUE(full.ok());
  std::ostringstream out;
  write_property_summary(full, out);
  EXPECT_NE(out.str().find("violations=0"), std::string::npos);
}

TEST(DescendingMinimizer, AllEqualIsDegenerate) {
  const auto c = check_descending_minimizer(std::vector<double>{2, 2, 2, 2}, false);
  EXPECT_EQ(c.status, CaseStatus::kDegenerate);
}

TEST(DescendingMinimizer, DeterministicPerSeed) {
  const std::vector<std::size_t> ns = {2, 3};
  std::ostringstream a, b;
  write_property_summary(verify_descending_minimizer(30, ns, 9, false), a);
  write_property_summary(verify_descending_minimizer(30, ns, 9, false), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Counterexamples, NoneForListFoldExp) {
  EXPECT_TRUE(counterexample_search(2000, 6, ScoreDistribution::kUniform, 4).empty());
  EXPECT_TRUE(counterexample_search(500, 6, ScoreDistribution::kNearTie, 5).empty());
  EXPECT_TRUE(counterexample_search(200, 2, ScoreDistribution::kNormal, 6).empty());
}

TEST(Counterexamples, NegatedLossIsCaughtImmediately) {
  const ArrangementLoss negated = [](std::span<const double> f) {
    return -listfold_loss(f, Transform::exponential()).value;
  };
  const auto w = counterexample_search(3, 4, ScoreDistribution::kUniform, 7, negated);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_GT(w[0].gap, 0.0);
}

TEST(Counterexamples, SizeMustBeEvenWithinCap) {
  EXPECT_THROW(counterexample_search(1, 5, ScoreDistribution::kUniform, 1), InvalidArgument);
  EXPECT_THROW(counterexample_search(1, 10, ScoreDistribution::kUniform, 1), InvalidArgument);
}

TEST(Distributions, NamesRoundTrip) {
  for (auto d : {ScoreDistribution::kUniform, ScoreDistribution::kNormal,
                 ScoreDistribution::kClustered, ScoreDistribution::kNearTie}) {
    EXPECT_EQ(parse_distribution(to_string(d)), d);
    std::mt19937_64 rng(1);
    EXPECT_EQ(draw_scores(d, 6, rng).size(), 6u);
  }
  EXPECT_THROW(parse_distribution("cauchy"), InvalidArgument);
}

TEST(OrderSensitivity, ListFoldExpWorkedSwap) {
  const auto r = order_sensitivity_probe(std::vector<double>{5, 4, 1, 0}, kFoldExp);
  bool found = false;
  for (const auto& s : r.violations) {
    if (s.before == std::vector<double>{1, 5, 4, 0} && s.i == 0 && s.j == 1) {
      found = true;
      EXPECT_NEAR(s.delta, 1.87, 0.01);
    }
  }
  EXPECT_TRUE(found);
}

TEST(OrderSensitivity, ListMLEHasNoViolations) {
  for (const auto& scores : {std::vector<double>{5, 4, 1, 0}, std::vector<double>{0.3, -1.2, 2.5, 0.9, 1.1}}) {
    const auto r = order_sensitivity_probe(scores, kMleExp);
    EXPECT_GT(r.swaps_checked, 0u);
    EXPECT_TRUE(r.violations.empty());
  }
}

TEST(OrderSensitivity, PairHasNoViolations) {
  for (const auto& spec : {kFoldExp, kFoldSgm, kMleExp}) {
    EXPECT_TRUE(order_sensitivity_probe(std::vector<double>{1.0, 2.0}, spec).violations.empty());
  }
}

TEST(Vase, EqualWeightsUniform) {
  const SamplerSpec spec{SamplerModel::kVase, {1, 1, 1}, {}, 60000, 1};
  const auto t = sample_vase(spec);
  ASSERT_EQ(t.entries.size(), 6u);
  for (const auto& e : t.entries) EXPECT_NEAR(e.analytic, 1.0 / 6.0, 1e-12);
  EXPECT_LT(t.max_abs_z(), 3.5);
}

TEST(Vase, HeavyFirstTwoThirds) {
  const SamplerSpec spec{SamplerModel::kVase, {2, 1}, {}, 100000, 2};
  const auto t = sample_vase(spec);
  EXPECT_NEAR(t.entries[0].analytic, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.entries[0].empirical, 2.0 / 3.0, 0.006);
}

TEST(Vase, MatchesListMLEProbabilities) {
  const SamplerSpec spec{SamplerModel::kVase, {3, 1, 0.5, 2}, {}, 100000, 3};
  const auto t = sample_vase(spec);
  EXPECT_EQ(t.entries.size(), 24u);
  EXPECT_LT(t.max_abs_z(), 4.0);
}

TEST(PlankDart, TwoEqualPlanksHalf) {
  const SamplerSpec spec{SamplerModel::kPlankDart, {1, 1}, {}, 100000, 4};
  const auto t = sample_plank_dart(spec);
  ASSERT_EQ(t.entries.size(), 2u);
  EXPECT_NEAR(t.entries[0].analytic, 0.5, 1e-12);
  EXPECT_LT(t.max_abs_z(), 3.0);
}

TEST(PlankDart, SinglePairClosedForm) {
  const double e = std::exp(1.0);
  const SamplerSpec spec{SamplerModel::kPlankDart, {e, 1 / e}, {}, 100000, 5};
  const auto t = sample_plank_dart(spec);
  const double expected = e * e / (e * e + 1 / (e * e));
  EXPECT_NEAR(t.entries[0].analytic, expected, 1e-12);
  EXPECT_LT(t.max_abs_z(), 4.0);
}

TEST(PlankDart, FourPlanksMatchListFold) {
  const SamplerSpec spec{SamplerModel::kPlankDart, {2.0, 0.5, 1.0, 3.0}, {}, 100000, 6};
  const auto t = sample_plank_dart(spec);
  EXPECT_EQ(t.entries.size(), 24u);
  double total = 0.0;
  for (const auto& e : t.entries) total += e.analytic;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_LT(t.max_abs_z(), 4.0);
}

TEST(PlankDart, RejectsBadLengths) {
  SamplerSpec spec{SamplerModel::kPlankDart, {2.0, 0.5}, {0.5, 1.0}, 10, 1};
  EXPECT_THROW(sample_plank_dart(spec), InvalidArgument);
  spec.lengths.clear();
  spec.draws = 0;
  EXPECT_THROW(sample_plank_dart(spec), InvalidArgument);
  spec.draws = 10;
  spec.weights = {1.0, -1.0};
  EXPECT_THROW(sample_plank_dart(spec), InvalidArgument);
}

TEST(Samplers, DeterministicPerSeed) {
  const SamplerSpec spec{SamplerModel::kPlankDart, {2.0, 0.5, 1.0, 3.0}, {}, 5000, 8};
  std::ostringstream a, b;
  write_frequency_csv(sample_plank_dart(spec), a);
  write_frequency_csv(sample_plank_dart(spec), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Samplers, StandardErrorShrinksWithDraws) {
  // Quadrupling draws should roughly halve the mean absolute deviation.
  auto mean_dev = [](std::size_t draws) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const SamplerSpec spec{SamplerModel::kVase, {1, 1}, {}, draws, seed};
      total += std::abs(sample_vase(spec).entries[0].empirical - 0.5);
    }
    return total / 40.0;
  };
  const double ratio = mean_dev(2000) / mean_dev(8000);
  EXPECT_GT(ratio, 1.4);
  EXPECT_LT(ratio, 2.8);
}

}  // namespace
}  // namespace listfold::lab
