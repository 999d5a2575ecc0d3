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

#include "listfold/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "listfold/error.hpp"

namespace listfold {
namespace {

void require_permutation(std::span<const std::size_t> order, std::size_t n,
                         const char* who) {
  if (order.size() != n) {
    throw InvalidArgument(std::string(who) + ": permutation length mismatch");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t i : order) {
    if (i >= n || seen[i]) {
      throw InvalidArgument(std::string(who) + ": not a permutation");
    }
    seen[i] = true;
  }
}

double dcg(std::span<const int> gains_in_order, std::size_t k, double log_base) {
  const double ln_base = std::log(log_base);
  double total = 0.0;
  for (std::size_t j = 0; j < k && j < gains_in_order.size(); ++j) {
    const double gain = std::exp2(static_cast<double>(gains_in_order[j])) - 1.0;
    total += gain * ln_base / std::log(static_cast<double>(j) + 2.0);
  }
  return total;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double mean = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = mean;
    i = j + 1;
  }
  return ranks;
}

MetricValue spearman_ic(std::span<const double> scores,
                        std::span<const double> returns) {
  if (scores.size() != returns.size()) {
    throw InvalidArgument("spearman_ic: length mismatch");
  }
  if (scores.size() < 2) throw InvalidArgument("spearman_ic: need >= 2 items");
  const auto rx = average_ranks(scores);
  const auto ry = average_ranks(returns);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {sxy / std::sqrt(sxx * syy), false};
}

MetricValue ndcg_at_k(const RankEval& eval, double log_base) {
  const std::size_t n = eval.labels.size();
  require_permutation(eval.predicted_order, n, "ndcg_at_k");
  if (eval.k < 1 || eval.k > n) {
    throw InvalidArgument("ndcg_at_k: cutoff must lie in [1, list length]");
  }
  std::vector<int> shown(n);
  for (std::size_t j = 0; j < n; ++j) shown[j] = eval.labels[eval.predicted_order[j]];
  std::vector<int> ideal(eval.labels);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double z = dcg(ideal, eval.k, log_base);
  if (z == 0.0) return {1.0, true};
  return {dcg(shown, eval.k, log_base) / z, false};
}

MetricValue ndcg_at_k(const RankEval& eval) { return ndcg_at_k(eval, 2.0); }

MetricValue ndcg_at_minus_k(const RankEval& eval, int levels) {
  RankEval flipped;
  flipped.k = eval.k;
  flipped.predicted_order.assign(eval.predicted_order.rbegin(),
                                 eval.predicted_order.rend());
  flipped.labels.reserve(eval.labels.size());
  for (int l : eval.labels) {
    if (l < 1 || l > levels) {
      throw InvalidArgument("ndcg_at_minus_k: label outside 1..levels");
    }
    flipped.labels.push_back(levels + 1 - l);
  }
  return ndcg_at_k(flipped);
}

MetricValue ndcg_pm_k(const RankEval& eval, int levels) {
  const MetricValue top = ndcg_at_k(eval);
  const MetricValue bottom = ndcg_at_minus_k(eval, levels);
  return {0.5 * (top.value + bottom.value), top.degenerate || bottom.degenerate};
}

int perm_zero_one(std::span<const std::size_t> predicted,
                  std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("perm_zero_one: length mismatch");
  }
  return std::equal(predicted.begin(), predicted.end(), truth.begin()) ? 0 : 1;
}

BinaryClassification binary_classification_loss(
    std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  const std::size_t n = truth.size();
  if (n % 2 != 0) {
    throw InvalidArgument("binary_classification_loss: odd list length");
  }
  require_permutation(truth, n, "binary_classification_loss");
  require_permutation(predicted, n, "binary_classification_loss");
  std::vector<bool> top_pred(n), top_truth(n);
  for (std::size_t j = 0; j < n; ++j) {
    top_pred[predicted[j]] = j < n / 2;
    top_truth[truth[j]] = j < n / 2;
  }
  BinaryClassification out;
  for (std::size_t i = 0; i < n; ++i) {
    if (top_pred[i] != top_truth[i]) ++out.mismatches;
  }
  out.loss = out.mismatches == 0 ? 0 : 1;
  return out;
}

}  // namespace listfold
