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

#include "listfold/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "listfold/error.hpp"

namespace listfold {
namespace {

constexpr int kMaxNonFiniteBatches = 10;

// Truth positions a loss sees; an odd list under an even-only loss loses its
// median position.
std::vector<std::size_t> kept_positions(std::size_t n, bool even_only) {
  std::vector<std::size_t> keep(n);
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (even_only && n % 2 == 1) keep.erase(keep.begin() + static_cast<long>(n / 2));
  return keep;
}

void adam_update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad,
                 Eigen::MatrixXd& m, Eigen::MatrixXd& v,
                 const OptimizerState& s, double lr) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  param.array() -=
      lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
}

}  // namespace

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSGD;
  throw InvalidArgument("unknown optimizer '" + std::string(name) + "'");
}

TrainConfig TrainConfig::for_loss(const LossSpec& loss) {
  TrainConfig c;
  c.loss = loss;
  c.final_relu = loss.family != LossFamily::kMSE;
  return c;
}

std::string TrainConfig::fingerprint() const {
  std::ostringstream out;
  out << "loss=" << loss.name() << ";batch_size=" << batch_size
      << ";total_batches=" << total_batches << ";lr=" << learning_rate
      << ";optimizer=" << optimizer_name(optimizer)
      << ";final_relu=" << final_relu << ";seed=" << seed
      << ";reverse=" << reverse_labels << ";patience=" << patience;
  return out.str();
}

BatchEvaluation evaluate_batch(const ScoringNet& net,
                               std::span<const RankedBatch> batch,
                               const LossSpec& loss) {
  if (batch.empty()) throw InvalidArgument("evaluate_batch: empty batch");
  BatchEvaluation eval;
  Eigen::Index rows = 0;
  for (const auto& list : batch) {
    if (static_cast<std::size_t>(list.features.cols()) != net.feature_dim()) {
      throw InvalidArgument("evaluate_batch: feature dimension mismatch");
    }
    eval.offsets.push_back(rows);
    rows += list.features.rows();
  }
  Eigen::MatrixXd stacked(rows, static_cast<Eigen::Index>(net.feature_dim()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    stacked.middleRows(eval.offsets[b], batch[b].features.rows()) =
        batch[b].features;
  }

  ForwardCache cache;
  const Eigen::VectorXd scores = net.forward(stacked, cache);
  eval.score_gradient = Eigen::VectorXd::Zero(rows);
  const double inv = 1.0 / static_cast<double>(batch.size());

  std::vector<double> ordered, targets;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& list = batch[b];
    const auto keep = kept_positions(list.truth_order.size(),
                                     loss.needs_even_length());
    ordered.clear();
    targets.clear();
    for (std::size_t p : keep) {
      const std::size_t row = list.truth_order[p];
      ordered.push_back(scores(eval.offsets[b] + static_cast<Eigen::Index>(row)));
      targets.push_back(list.returns[row]);
    }
    const LossResult r = evaluate_loss(loss, ordered, targets);
    eval.loss += r.value * inv;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const std::size_t row = list.truth_order[keep[i]];
      eval.score_gradient(eval.offsets[b] + static_cast<Eigen::Index>(row)) +=
          r.gradient[i] * inv;
    }
  }
  eval.gradients = net.backward(cache, eval.score_gradient);
  return eval;
}

StepResult train_step(ScoringNet& net, std::span<const RankedBatch> batch,
                      const LossSpec& loss, double learning_rate,
                      OptimizerState& state) {
  BatchEvaluation eval = evaluate_batch(net, batch, loss);
  StepResult result{eval.loss, std::isfinite(eval.loss)};
  if (!result.finite) return result;

  ++state.finite_batches;
  state.running_loss +=
      (eval.loss - state.running_loss) / static_cast<double>(state.finite_batches);

  auto& layers = net.layers();
  if (state.kind == OptimizerKind::kSGD) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l].weight -= learning_rate * eval.gradients.weight[l];
      layers[l].bias -= learning_rate * eval.gradients.bias[l];
    }
    return result;
  }

  if (state.first_moment.weight.empty()) {
    state.first_moment = net.zero_gradients();
    state.second_moment = net.zero_gradients();
  }
  ++state.step;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    adam_update(layers[l].weight, eval.gradients.weight[l],
                state.first_moment.weight[l], state.second_moment.weight[l],
                state, learning_rate);
    Eigen::MatrixXd m = state.first_moment.bias[l];
    Eigen::MatrixXd v = state.second_moment.bias[l];
    adam_update(layers[l].bias, eval.gradients.bias[l], m, v, state,
                learning_rate);
    state.first_moment.bias[l] = m;
    state.second_moment.bias[l] = v;
  }
  return result;
}

ScoringNet train(const FactorPanel& panel, const WindowPlan& window,
                 const TrainConfig& config, const TrainHooks& hooks) {
  if (window.train.empty() || window.train.end > panel.num_dates()) {
    throw InvalidArgument("train: empty or out-of-range training window");
  }
  if (config.batch_size == 0) throw InvalidArgument("train: batch_size must be >= 1");

  ScoringNet net =
      ScoringNet::init(panel.num_factors(), config.seed, config.final_relu);
  if (config.total_batches == 0) return net;

  std::vector<RankedBatch> lists;
  lists.reserve(window.train.size());
  for (std::size_t w = window.train.begin; w < window.train.end; ++w) {
    if (hooks.accessed_weeks) hooks.accessed_weeks->push_back(w);
    RankedBatch list = make_ranked_batch(panel, w);
    if (config.reverse_labels) {
      std::reverse(list.truth_order.begin(), list.truth_order.end());
    }
    lists.push_back(std::move(list));
  }

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(lists.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  OptimizerState state;
  state.kind = config.optimizer;
  std::vector<RankedBatch> batch;
  batch.reserve(config.batch_size);
  int non_finite = 0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t b = 0; b < config.total_batches; ++b) {
    batch.clear();
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(lists[order[cursor++]]);
    }
    const StepResult step =
        train_step(net, batch, config.loss, config.learning_rate, state);
    if (hooks.batch_losses) hooks.batch_losses->push_back(step.loss);
    if (!step.finite) {
      if (++non_finite >= kMaxNonFiniteBatches) {
        throw DivergenceError("training diverged: " +
                              std::to_string(kMaxNonFiniteBatches) +
                              " consecutive non-finite batch losses (" +
                              config.loss.name() + ")");
      }
      continue;
    }
    non_finite = 0;
    if (config.patience > 0) {
      if (state.running_loss < best) {
        best = state.running_loss;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    }
  }
  return net;
}

std::vector<double> score_week(const ScoringNet& net, const FactorPanel& panel,
                               std::size_t week) {
  if (week >= panel.num_dates()) {
    throw InvalidArgument("score_week: unknown week index " + std::to_string(week));
  }
  const Eigen::VectorXd s = net.forward(panel.week_features(week));
  return {s.data(), s.data() + s.size()};
}

std::vector<double> score_week(const ScoringNet& net, const FactorPanel& panel,
                               std::string_view date) {
  const auto week = panel.find_date(date);
  if (!week) throw InvalidArgument("score_week: unknown week " + std::string(date));
  return score_week(net, panel, *week);
}

}  // namespace listfold
