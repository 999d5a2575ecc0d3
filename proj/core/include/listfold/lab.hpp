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

#ifndef LISTFOLD_LAB_HPP_
#define LISTFOLD_LAB_HPP_

// Consistency lab: exhaustive permutation enumeration of surrogate losses,
// empirical checks of the sigmoid/exponential minimizer characterisations,
// counterexample search, and Monte Carlo samplers for the vase
// (Plackett-Luce) and plank-dart models.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "listfold/losses.hpp"

namespace listfold::lab {

// Lists longer than this are refused by enumeration (8! = 40320 orderings).
inline constexpr std::size_t kMaxEnumerationSize = 8;
// Absolute tolerance when grouping minimal loss values.
inline constexpr double kMinimizerTolerance = 1e-9;

enum class MinimizerClass { kDescendingUnique, kBinaryClassSet, kOther };
std::string to_string(MinimizerClass c);

struct Arrangement {
  std::vector<double> values;  // scores in truth order
  double loss = 0.0;
};

struct EnumerationReport {
  std::vector<double> scores;  // the multiset, sorted descending
  std::string loss_name;
  std::vector<Arrangement> arrangements;  // each distinct ordering once
  std::vector<std::size_t> minimizers;    // indices into arrangements
  double min_loss = 0.0;
  MinimizerClass classification = MinimizerClass::kOther;
};

using ArrangementLoss = std::function<double(std::span<const double>)>;

// Evaluates `loss` on every distinct ordering of the multiset.
EnumerationReport enumerate_losses(std::span<const double> scores,
                                   const LossSpec& loss);
EnumerationReport enumerate_losses(std::span<const double> scores,
                                   const ArrangementLoss& loss,
                                   std::string loss_name);

// CSV with columns permutation,loss,is_minimizer.
void write_enumeration_csv(const EnumerationReport& report, std::ostream& out);

// Exponential ListFold on every ordering of a fixed score set, evaluated
// through the per-window log-normalisers of each remaining subset. Matches
// listfold_loss(exp) on the arranged scores.
class ExpListFoldTable {
 public:
  explicit ExpListFoldTable(std::span<const double> scores);
  std::size_t size() const { return scores_.size(); }
  // `order[p]` is the index of the score placed at truth position p.
  double loss(std::span<const std::size_t> order) const;

 private:
  std::vector<double> scores_;
  std::vector<double> log_normaliser_;  // by subset bitmask
};

enum class CaseStatus { kPass, kViolation, kDegenerate };
std::string to_string(CaseStatus s);

struct CaseResult {
  CaseStatus status = CaseStatus::kPass;
  std::vector<double> scores;   // descending
  std::vector<double> witness;  // offending ordering, if any
  double gap = 0.0;             // loss(descending) - loss(witness)
  std::string detail;
};

// Sigmoid ListFold: the minimizer set must be exactly the orderings that pair
// the j-th largest with the j-th largest of the bottom half, larger first, in
// any pair order. Ties make the set ambiguous and report kDegenerate.
CaseResult check_sigmoid_pairing(std::span<const double> scores);

// Exponential ListFold: the descending ordering must be the unique minimizer,
// among half-respecting orderings when `restricted`, else among all.
CaseResult check_descending_minimizer(std::span<const double> scores,
                                      bool restricted);

struct PropertyReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t passes = 0;
  std::size_t degenerate = 0;
  std::vector<CaseResult> violations;
  bool ok() const { return violations.empty(); }
};

// `trials` random score sets of 2n distinct values for every n in `n_values`.
PropertyReport verify_sigmoid_pairing_family(std::size_t trials,
                              std::span<const std::size_t> n_values,
                              std::uint64_t seed);
PropertyReport verify_descending_minimizer(std::size_t trials,
                              std::span<const std::size_t> n_values,
                              std::uint64_t seed, bool restricted);

void write_property_summary(const PropertyReport& report, std::ostream& out);

enum class ScoreDistribution { kUniform, kNormal, kClustered, kNearTie };
std::string to_string(ScoreDistribution d);
ScoreDistribution parse_distribution(std::string_view name);

// Draws `size` scores from the distribution.
std::vector<double> draw_scores(ScoreDistribution dist, std::size_t size,
                                std::mt19937_64& rng);

struct Witness {
  std::vector<double> scores;    // descending
  std::vector<double> ordering;  // strictly better than descending
  double gap = 0.0;
};

// Samples `budget` score sets and returns every one whose descending order is
// beaten by more than the tolerance under `loss` (exponential ListFold when
// empty).
std::vector<Witness> counterexample_search(std::size_t budget, std::size_t size,
                                           ScoreDistribution dist,
                                           std::uint64_t seed,
                                           const ArrangementLoss& loss = {});

struct SwapRecord {
  std::vector<double> before;
  std::size_t i = 0;  // positions swapped, i < j
  std::size_t j = 0;
  double delta = 0.0;  // loss(after) - loss(before)
};

struct SensitivityReport {
  std::size_t swaps_checked = 0;
  std::vector<SwapRecord> violations;  // swaps toward the truth with delta > 0
};

// For every ordering and every transposition that reduces the number of
// discordant pairs, records swaps that increase the loss.
SensitivityReport order_sensitivity_probe(std::span<const double> scores,
                                          const LossSpec& loss);

enum class SamplerModel { kVase, kPlankDart };

struct SamplerSpec {
  SamplerModel model = SamplerModel::kVase;
  std::vector<double> weights;
  std::vector<double> lengths;  // plank-dart only; empty means 1 / weight
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

struct FrequencyEntry {
  std::vector<std::size_t> permutation;  // position -> item
  std::size_t count = 0;
  double empirical = 0.0;
  double analytic = 0.0;
  double z = 0.0;
};

struct FrequencyTable {
  std::size_t draws = 0;
  std::vector<FrequencyEntry> entries;  // every permutation, lexicographic
  double max_abs_z() const;
};

// Sequential draws without replacement, probability proportional to the
// remaining weights. Analytic column: exp(-ListMLE-exp) with scores log w.
FrequencyTable sample_vase(const SamplerSpec& spec);

// Two simultaneous darts per stage (A by width, B by length), re-thrown when
// they hit the same plank. Position i holds A_{i+1}; position 2n-1-i holds
// B_{i+1}. Analytic column: exp(-ListFold-exp) with scores log w.
FrequencyTable sample_plank_dart(const SamplerSpec& spec);

void write_frequency_csv(const FrequencyTable& table, std::ostream& out);

}  // namespace listfold::lab

#endif  // LISTFOLD_LAB_HPP_
