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

#ifndef LISTFOLD_METRICS_HPP_
#define LISTFOLD_METRICS_HPP_

// Rank-quality metrics: Spearman IC, NDCG@k and its bottom/two-sided
// variants, permutation 0-1 loss and the half-split classification loss.

#include <cstddef>
#include <span>
#include <vector>

namespace listfold {

// A metric value plus a flag for inputs where the metric is undefined and a
// conventional value was returned instead.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

// Pearson correlation of average ranks. A constant input returns 0 flagged
// degenerate.
MetricValue spearman_ic(std::span<const double> scores,
                        std::span<const double> returns);

// Average ranks (1-based, ties share the mean rank).
std::vector<double> average_ranks(std::span<const double> values);

// predicted_order[j] is the item shown at position j; labels[i] is the
// relevance of item i.
struct RankEval {
  std::vector<std::size_t> predicted_order;
  std::vector<int> labels;
  std::size_t k = 0;
};

// Gain 2^l - 1 and discount 1/log2(1 + j), normalised by the ideal DCG of
// the same label multiset. All-zero ideal gain returns 1 flagged degenerate.
MetricValue ndcg_at_k(const RankEval& eval);

// NDCG@k with an explicit logarithm base for the discount.
MetricValue ndcg_at_k(const RankEval& eval, double log_base);

// NDCG@k of the reversed predicted order under complemented labels
// (levels + 1 - l): how well the bottom of the list is identified.
MetricValue ndcg_at_minus_k(const RankEval& eval, int levels);

// Mean of ndcg_at_k and ndcg_at_minus_k.
MetricValue ndcg_pm_k(const RankEval& eval, int levels);

// 0 iff the permutations are identical.
int perm_zero_one(std::span<const std::size_t> predicted,
                  std::span<const std::size_t> truth);

struct BinaryClassification {
  int loss = 0;                 // 0 iff every item lands in the same half
  std::size_t mismatches = 0;   // items whose half differs
};

// Labels the first half of each permutation +1 and the rest -1 and compares
// the labelings item by item. Even length only.
BinaryClassification binary_classification_loss(
    std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

}  // namespace listfold

#endif  // LISTFOLD_METRICS_HPP_
