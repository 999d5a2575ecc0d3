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

#ifndef LISTFOLD_TRAINING_HPP_
#define LISTFOLD_TRAINING_HPP_

// Mini-batch training of a ScoringNet on weekly ranked lists.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "listfold/losses.hpp"
#include "listfold/network.hpp"
#include "listfold/panel.hpp"

namespace listfold {

enum class OptimizerKind { kSGD, kAdam };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  LossSpec loss;
  std::size_t batch_size = 32;      // weeks per mini-batch
  std::size_t total_batches = 1000;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  bool final_relu = true;
  std::uint64_t seed = 0;
  // Train against the reversed truth order (worst return ranked first).
  bool reverse_labels = false;
  // Stop after this many batches without a new best running loss; 0 = off.
  std::size_t patience = 0;

  // Ranking losses keep the final ReLU, MSE regression drops it.
  static TrainConfig for_loss(const LossSpec& loss);
  // Stable textual form, hashed into checkpoints.
  std::string fingerprint() const;
};

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  NetGradients first_moment;
  NetGradients second_moment;
  double running_loss = 0.0;  // mean of the finite batch losses seen so far
  std::uint64_t finite_batches = 0;
};

// Result of scoring one mini-batch without touching the parameters.
struct BatchEvaluation {
  double loss = 0.0;                // mean over lists
  Eigen::VectorXd score_gradient;   // d(mean loss)/d(score), stacked by list
  std::vector<Eigen::Index> offsets;  // first stacked row of each list
  NetGradients gradients;
};

// Stacks the lists, runs one forward/backward pass and averages per-list
// losses. Odd-length lists under an even-only loss drop the truth-order
// median item (its gradient is zero).
BatchEvaluation evaluate_batch(const ScoringNet& net,
                               std::span<const RankedBatch> batch,
                               const LossSpec& loss);

struct StepResult {
  double loss = 0.0;
  bool finite = true;  // false: parameters left untouched
};

// One optimizer update from the batch-averaged gradient.
StepResult train_step(ScoringNet& net, std::span<const RankedBatch> batch,
                      const LossSpec& loss, double learning_rate,
                      OptimizerState& state);

// Instrumentation for training runs.
struct TrainHooks {
  std::vector<std::size_t>* accessed_weeks = nullptr;  // every week read
  std::vector<double>* batch_losses = nullptr;
};

// Builds one ranked list per training week, shuffles them with the seeded
// RNG, and consumes exactly total_batches batches (reshuffling at each epoch
// boundary) unless early stopping fires. Throws DivergenceError after 10
// consecutive non-finite batch losses.
ScoringNet train(const FactorPanel& panel, const WindowPlan& window,
                 const TrainConfig& config, const TrainHooks& hooks = {});

// Scores for every stock of one week, aligned to panel.stocks.
std::vector<double> score_week(const ScoringNet& net, const FactorPanel& panel,
                               std::size_t week);
std::vector<double> score_week(const ScoringNet& net, const FactorPanel& panel,
                               std::string_view date);

}  // namespace listfold

#endif  // LISTFOLD_TRAINING_HPP_
