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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "listfold/lab.hpp"
#include "listfold/losses.hpp"
#include "listfold/network.hpp"
#include "listfold/panel.hpp"
#include "listfold/training.hpp"

namespace {

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

void BM_ListFoldExp(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(listfold::listfold_loss(scores, listfold::Transform::exponential()));
  }
}
BENCHMARK(BM_ListFoldExp)->Arg(8)->Arg(80)->Arg(320);

void BM_ListFoldLinear(benchmark::State& state) {
  auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 2);
  for (double& s : scores) s += 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(listfold::listfold_loss(scores, listfold::Transform::linear()));
  }
}
BENCHMARK(BM_ListFoldLinear)->Arg(8)->Arg(80);

void BM_ListMLEExp(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(listfold::listmle_loss(scores, listfold::Transform::exponential()));
  }
}
BENCHMARK(BM_ListMLEExp)->Arg(8)->Arg(80)->Arg(320);

void BM_EnumerateListFold(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 4);
  const listfold::LossSpec spec{listfold::LossFamily::kListFold,
                                listfold::Transform::exponential()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(listfold::lab::enumerate_losses(scores, spec));
  }
}
BENCHMARK(BM_EnumerateListFold)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DescendingCheckTable(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(listfold::lab::check_descending_minimizer(scores, false));
  }
}
BENCHMARK(BM_DescendingCheckTable)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_NetworkForward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto rows = static_cast<Eigen::Index>(state.range(1));
  const auto net = listfold::ScoringNet::init(d, 7, true);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(rows, static_cast<Eigen::Index>(d));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_NetworkForward)->Args({68, 80})->Args({68, 2560});

void BM_TrainStep(benchmark::State& state) {
  listfold::SyntheticOptions o;
  o.weeks = 40;
  o.seed = 3;
  const auto panel = listfold::generate_synthetic_panel(o);
  std::vector<listfold::RankedBatch> batch;
  for (std::size_t w = 0; w < static_cast<std::size_t>(state.range(0)); ++w) {
    batch.push_back(listfold::make_ranked_batch(panel, w));
  }
  auto net = listfold::ScoringNet::init(panel.num_factors(), 1, true);
  listfold::OptimizerState opt;
  const listfold::LossSpec spec{listfold::LossFamily::kListFold,
                                listfold::Transform::exponential()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(listfold::train_step(net, batch, spec, 1e-4, opt));
  }
}
BENCHMARK(BM_TrainStep)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
