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

#ifndef LISTFOLD_LOSSES_HPP_
#define LISTFOLD_LOSSES_HPP_

// Listwise surrogate losses with analytic gradients w.r.t. the score vector.
//
// Every ranking loss takes scores laid out in truth order: position 0 holds
// the score of the item with the highest realized return.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace listfold {

enum class TransformKind { kExponential, kSigmoid, kLinear };

// Positive map applied to scores (or score differences) inside a likelihood.
class Transform {
 public:
  // Floor of the linear transform, which is otherwise not positive.
  static constexpr double kLinearFloor = 1e-12;

  constexpr explicit Transform(TransformKind kind = TransformKind::kExponential)
      : kind_(kind) {}
  static constexpr Transform exponential() {
    return Transform(TransformKind::kExponential);
  }
  static constexpr Transform sigmoid() {
    return Transform(TransformKind::kSigmoid);
  }
  static constexpr Transform linear() {
    return Transform(TransformKind::kLinear);
  }

  TransformKind kind() const { return kind_; }
  double value(double x) const;
  double derivative(double x) const;
  // log(value(x)) without overflow for the exponential and sigmoid kinds.
  double log_value(double x) const;
  // derivative(x) / value(x).
  double log_derivative(double x) const;

  friend bool operator==(Transform, Transform) = default;

 private:
  TransformKind kind_;
};

enum class LossFamily { kListFold, kListMLE, kNaivePt, kMSE };

struct LossSpec {
  LossFamily family = LossFamily::kListFold;
  Transform transform = Transform::exponential();  // ignored for MSE

  // "listfold-exp", "listmle-sgm", "naivept-lin", "mse", ...
  std::string name() const;
  static LossSpec parse(std::string_view name);
  bool needs_even_length() const {
    return family == LossFamily::kListFold || family == LossFamily::kNaivePt;
  }
  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d score, aligned to the input
};

// Plackett-Luce negative log-likelihood of the truth order. `stages` limits
// the product to the first `stages` selections; 0 means the full list.
LossResult listmle_loss(std::span<const double> scores, Transform transform,
                        std::size_t stages = 0);

// Two-sided pairwise-selection likelihood on a list of even length 2n. Step i
// selects the pair (i, 2n-1-i) out of the remaining window [i, 2n-1-i]
// against every ordered pair of distinct positions in that window.
LossResult listfold_loss(std::span<const double> scores, Transform transform);

// Product of a top-n ListMLE on the scores and a top-n ListMLE on the negated
// scores of the reversed list. Even length only.
LossResult naive_pt_loss(std::span<const double> scores, Transform transform);

// (1/n) * sum (r_i - f_i)^2.
LossResult mse_loss(std::span<const double> scores,
                    std::span<const double> returns);

// Dispatches on spec.family. `returns` is only read by MSE and must be
// aligned with `scores`.
LossResult evaluate_loss(const LossSpec& spec, std::span<const double> scores,
                         std::span<const double> returns = {});

// Max component-wise relative error between the analytic gradient and central
// finite differences with the given step. MSE uses `returns` (zeros if empty).
double loss_gradient_check(const LossSpec& spec,
                           std::span<const double> scores, double step,
                           std::span<const double> returns = {});

// Relative error used by the gradient checks: |a - b| / max(|a|, |b|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

}  // namespace listfold

#endif  // LISTFOLD_LOSSES_HPP_
