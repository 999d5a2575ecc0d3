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
#include <random>

#include "listfold/error.hpp"
#include "listfold/losses.hpp"

namespace listfold {
namespace {

const Transform kExp = Transform::exponential();
const Transform kSgm = Transform::sigmoid();
const Transform kLin = Transform::linear();

std::vector<double> uniform_scores(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<double> shifted(std::vector<double> v, double c) {
  for (double& x : v) x += c;
  return v;
}

// Plackett-Luce likelihood written out term by term.
double listmle_reference(const std::vector<double>& f, std::size_t stages) {
  double value = 0.0;
  for (std::size_t i = 0; i < stages; ++i) {
    double denom = 0.0;
    for (std::size_t k = i; k < f.size(); ++k) denom += std::exp(f[k]);
    value -= f[i] - std::log(denom);
  }
  return value;
}

TEST(Transform, SigmoidIsComplementary) {
  for (double x : {-30.0, -2.5, 0.0, 0.7, 12.0}) {
    EXPECT_NEAR(kSgm.value(x) + kSgm.value(-x), 1.0, 1e-12);
    EXPECT_GT(kSgm.value(x), 0.0);
    EXPECT_GT(kExp.value(x), 0.0);
  }
  EXPECT_DOUBLE_EQ(kLin.value(-1.0), Transform::kLinearFloor);
  EXPECT_DOUBLE_EQ(kLin.value(2.0), 2.0);
}

TEST(LossSpec, NamesRoundTrip) {
  for (const char* name : {"listfold-exp", "listfold-sgm", "listmle-exp", "listmle-lin",
                           "naivept-exp", "mse"}) {
    EXPECT_EQ(LossSpec::parse(name).name(), name);
  }
  EXPECT_THROW(LossSpec::parse("hinge"), InvalidArgument);
}

TEST(ListMLE, EqualScoresGiveLogFactorial) {
  EXPECT_NEAR(listmle_loss(std::vector<double>{0.3, 0.3, 0.3}, kExp).value, std::log(6.0), 1e-12);
}

TEST(ListMLE, HandValue) {
  EXPECT_NEAR(listmle_loss(std::vector<double>{2, 1, 0}, kExp).value, 0.7208676520, 1e-9);
}

TEST(ListMLE, ShiftInvariantUnderExp) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto f = uniform_scores(rng, 7, -3, 3);
    EXPECT_NEAR(listmle_loss(f, kExp).value, listmle_loss(shifted(f, 4.2), kExp).value, 1e-9);
  }
}

TEST(ListMLE, MatchesReferenceWithStages) {
  std::mt19937_64 rng(2);
  const auto f = uniform_scores(rng, 6, -2, 2);
  EXPECT_NEAR(listmle_loss(f, kExp).value, listmle_reference(f, 6), 1e-10);
  EXPECT_NEAR(listmle_loss(f, kExp, 3).value, listmle_reference(f, 3), 1e-10);
}

TEST(ListMLE, RejectsNonFinite) {
  EXPECT_THROW(listmle_loss(std::vector<double>{1.0, NAN}, kExp), InvalidArgument);
  EXPECT_THROW(listmle_loss(std::vector<double>{}, kExp), InvalidArgument);
}

TEST(ListFold, GoldenValues) {
  EXPECT_NEAR(listfold_loss(std::vector<double>{5, 4, 1, 0}, kExp).value, 0.65, 0.01);
  EXPECT_NEAR(listfold_loss(std::vector<double>{1, 5, 4, 0}, kExp).value, 4.78, 0.01);
  EXPECT_NEAR(listfold_loss(std::vector<double>{5, 1, 4, 0}, kExp).value, 6.65, 0.01);
  EXPECT_NEAR(listfold_loss(std::vector<double>{5, 4, 1, 0}, kExp).value, 0.6513107408, 1e-9);
  EXPECT_NEAR(listfold_loss(std::vector<double>{1, 5, 4, 0}, kExp).value, 4.775763067, 1e-8);
}

TEST(ListFold, EqualPairIsLogTwo) {
  EXPECT_NEAR(listfold_loss(std::vector<double>{1.5, 1.5}, kExp).value, std::log(2.0), 1e-12);
  EXPECT_NEAR(listfold_loss(std::vector<double>{1.5, 1.5}, kSgm).value, std::log(2.0), 1e-12);
}

TEST(ListFold, RejectsOddLength) {
  EXPECT_THROW(listfold_loss(std::vector<double>{1, 2, 3}, kExp), InvalidArgument);
  EXPECT_THROW(listfold_loss(std::vector<double>{}, kExp), InvalidArgument);
  EXPECT_THROW(listfold_loss(std::vector<double>{1, INFINITY}, kExp), InvalidArgument);
}

// Direct sum over ordered pairs of each window.
double listfold_reference(const std::vector<double>& f, Transform psi) {
  const std::size_t m = f.size();
  double value = 0.0;
  for (std::size_t i = 0; i < m / 2; ++i) {
    const std::size_t hi = m - 1 - i;
    double denom = 0.0;
    for (std::size_t u = i; u <= hi; ++u) {
      for (std::size_t v = i; v <= hi; ++v) {
        if (u != v) denom += psi.value(f[u] - f[v]);
      }
    }
    value += -std::log(psi.value(f[i] - f[hi])) + std::log(denom);
  }
  return value;
}

TEST(ListFold, MatchesDirectPairSum) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto f = uniform_scores(rng, 8, -3, 3);
    EXPECT_NEAR(listfold_loss(f, kExp).value, listfold_reference(f, kExp), 1e-9);
    EXPECT_NEAR(listfold_loss(f, kSgm).value, listfold_reference(f, kSgm), 1e-9);
    const auto g = shifted(f, 0.0);
    EXPECT_NEAR(listfold_loss(g, kLin).value, listfold_reference(g, kLin), 1e-9);
  }
}

TEST(ListFold, StableForLargeSpreads) {
  const std::vector<double> f = {400.0, 1.0, -1.0, -400.0};
  const auto r = listfold_loss(f, kExp);
  EXPECT_TRUE(std::isfinite(r.value));
  for (double g : r.gradient) EXPECT_TRUE(std::isfinite(g));
}

TEST(ListFold, ShiftInvariantForEveryTransform) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(-5, 5);
  for (int t = 0; t < 20; ++t) {
    const auto f = uniform_scores(rng, 6, -3, 3);
    const double shift = c(rng);
    for (Transform psi : {kExp, kSgm, kLin}) {
      EXPECT_NEAR(listfold_loss(f, psi).value, listfold_loss(shifted(f, shift), psi).value, 1e-9);
    }
  }
}

TEST(ListFold, SigmoidReducesToPairTermsPlusConstant) {
  std::mt19937_64 rng(5);
  auto residual = [](const std::vector<double>& f) {
    double pair = 0.0;
    const std::size_t m = f.size();
    for (std::size_t i = 0; i < m / 2; ++i) pair += std::log1p(std::exp(-(f[i] - f[m - 1 - i])));
    return listfold_loss(f, kSgm).value - pair;
  };
  const auto a = uniform_scores(rng, 8, -4, 4);
  const auto b = uniform_scores(rng, 8, -4, 4);
  EXPECT_NEAR(residual(a), residual(b), 1e-9);
  // The constant is sum_i log(m_i (m_i - 1) / 2) over window sizes 8, 6, 4, 2.
  EXPECT_NEAR(residual(a), std::log(28.0 * 15.0 * 6.0 * 1.0), 1e-9);
}

TEST(ListFold, ExpDecompositionIgnoresInnerPermutation) {
  std::mt19937_64 rng(6);
  auto f = uniform_scores(rng, 6, -2, 2);
  const double alpha = 1.3, beta = -0.4;
  auto outer_minus_inner = [&](const std::vector<double>& inner) {
    std::vector<double> full = {alpha};
    full.insert(full.end(), inner.begin(), inner.end());
    full.push_back(beta);
    return listfold_loss(full, kExp).value - listfold_loss(inner, kExp).value;
  };
  const double base = outer_minus_inner(f);
  std::sort(f.begin(), f.end());
  do {
    EXPECT_NEAR(outer_minus_inner(f), base, 1e-9);
  } while (std::next_permutation(f.begin(), f.end()));
}

TEST(ListFold, ExpProbabilitiesSumToOne) {
  for (std::size_t m : {2u, 4u, 6u}) {
    std::vector<double> f(m);
    std::mt19937_64 rng(m);
    f = uniform_scores(rng, m, -2, 2);
    std::sort(f.begin(), f.end());
    double total = 0.0;
    do {
      total += std::exp(-listfold_loss(f, kExp).value);
    } while (std::next_permutation(f.begin(), f.end()));
    EXPECT_NEAR(total, 1.0, 1e-9) << "m = " << m;
  }
}

TEST(NaivePt, EqualPairIsTwoLogTwo) {
  EXPECT_NEAR(naive_pt_loss(std::vector<double>{0.2, 0.2}, kExp).value, 2.0 * std::log(2.0), 1e-12);
}

TEST(NaivePt, ShiftInvariantUnderExp) {
  std::mt19937_64 rng(7);
  const auto f = uniform_scores(rng, 8, -2, 2);
  EXPECT_NEAR(naive_pt_loss(f, kExp).value, naive_pt_loss(shifted(f, -3.3), kExp).value, 1e-9);
}

TEST(NaivePt, ComposesTwoTopHalfListMLE) {
  const std::vector<double> f = {5, 4, 1, 0};
  const std::vector<double> reversed_negated = {-0.0, -1.0, -4.0, -5.0};
  const double expected = listmle_loss(f, kExp, 2).value + listmle_loss(reversed_negated, kExp, 2).value;
  EXPECT_NEAR(naive_pt_loss(f, kExp).value, expected, 1e-12);
  EXPECT_THROW(naive_pt_loss(std::vector<double>{1, 2, 3}, kExp), InvalidArgument);
}

TEST(Mse, Examples) {
  const std::vector<double> r = {0.1, -0.2, 0.3, 0.0};
  EXPECT_DOUBLE_EQ(mse_loss(r, r).value, 0.0);
  EXPECT_NEAR(mse_loss(shifted(r, 1.0), r).value, 1.0, 1e-15);
  EXPECT_NEAR(mse_loss(std::vector<double>{0.1, 0.2}, std::vector<double>{0.3, 0.0}).value, 0.04, 1e-15);
  const auto g = mse_loss(std::vector<double>{0.1, 0.2}, std::vector<double>{0.3, 0.0}).gradient;
  EXPECT_NEAR(g[0], -0.2, 1e-15);
  EXPECT_NEAR(g[1], 0.2, 1e-15);
  EXPECT_THROW(mse_loss(std::vector<double>{1}, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(GradientCheck, EveryFamilyMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  const std::vector<LossSpec> specs = {
      LossSpec::parse("listfold-exp"), LossSpec::parse("listfold-sgm"),
      LossSpec::parse("listmle-exp"),  LossSpec::parse("listmle-sgm"),
      LossSpec::parse("naivept-exp"),  LossSpec::parse("naivept-sgm"),
  };
  for (const auto& spec : specs) {
    for (int t = 0; t < 10; ++t) {
      const auto f = uniform_scores(rng, 8, -2, 2);
      EXPECT_LT(loss_gradient_check(spec, f, 1e-5), 1e-4) << spec.name();
    }
  }
}

TEST(GradientCheck, WideScoresStayAccurate) {
  std::mt19937_64 rng(9);
  for (const char* name : {"listfold-exp", "listmle-exp", "naivept-exp"}) {
    const auto f = uniform_scores(rng, 10, -10, 10);
    EXPECT_LT(loss_gradient_check(LossSpec::parse(name), f, 1e-5), 1e-4) << name;
  }
}

TEST(GradientCheck, LinearAwayFromFloor) {
  std::mt19937_64 rng(10);
  const auto f = uniform_scores(rng, 6, 1, 3);
  EXPECT_LT(loss_gradient_check(LossSpec::parse("listmle-lin"), f, 1e-6), 1e-4);
}

TEST(GradientCheck, MseIsExact) {
  std::mt19937_64 rng(11);
  const auto f = uniform_scores(rng, 9, -5, 5);
  const auto r = uniform_scores(rng, 9, -1, 1);
  EXPECT_LT(loss_gradient_check(LossSpec::parse("mse"), f, 1e-3, r), 1e-8);
}

TEST(Losses, ShiftInvariantLossesHaveZeroSumGradient) {
  std::mt19937_64 rng(12);
  const auto f = uniform_scores(rng, 8, -2, 2);
  for (const char* name : {"listfold-exp", "listfold-sgm", "listmle-exp", "naivept-exp"}) {
    const auto g = evaluate_loss(LossSpec::parse(name), f).gradient;
    EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 0.0, 1e-12) << name;
  }
}

TEST(RelativeError, UsesFloor) {
  EXPECT_DOUBLE_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0), 1e-3);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
}

}  // namespace
}  // namespace listfold
