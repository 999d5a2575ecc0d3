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

#include "listfold/lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "listfold/error.hpp"

namespace listfold::lab {
namespace {

std::vector<double> sorted_descending(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

bool has_ties(const std::vector<double>& desc) {
  return std::adjacent_find(desc.begin(), desc.end()) != desc.end();
}

void require_enumerable(std::size_t m) {
  if (m == 0) throw InvalidArgument("enumeration needs at least one score");
  if (m > kMaxEnumerationSize) {
    throw InvalidArgument("enumeration size " + std::to_string(m) +
                          " exceeds the cap of " +
                          std::to_string(kMaxEnumerationSize));
  }
}

std::string join(std::span<const double> values) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << values[i];
  }
  return out.str();
}

// The top-half values, as a sorted multiset, equal those of `desc`.
bool halves_respected(std::span<const double> arrangement,
                      const std::vector<double>& desc) {
  const std::size_t half = desc.size() / 2;
  std::vector<double> top(arrangement.begin(), arrangement.begin() + static_cast<long>(half));
  std::sort(top.begin(), top.end(), std::greater<>());
  return std::equal(top.begin(), top.end(), desc.begin());
}

std::vector<double> arrange(const std::vector<double>& values,
                            std::span<const std::size_t> order) {
  std::vector<double> out(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) out[p] = values[order[p]];
  return out;
}

double z_score(double empirical, double p, std::size_t draws) {
  const double var = p * (1.0 - p) / static_cast<double>(draws);
  if (var <= 0.0) {
    return empirical == p ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (empirical - p) / std::sqrt(var);
}

}  // namespace

std::string to_string(MinimizerClass c) {
  switch (c) {
    case MinimizerClass::kDescendingUnique:
      return "descending-unique";
    case MinimizerClass::kBinaryClassSet:
      return "binary-class-set";
    case MinimizerClass::kOther:
      return "other";
  }
  return "other";
}

std::string to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::kPass:
      return "pass";
    case CaseStatus::kViolation:
      return "violation";
    case CaseStatus::kDegenerate:
      return "degenerate";
  }
  return "pass";
}

EnumerationReport enumerate_losses(std::span<const double> scores,
                                   const LossSpec& loss) {
  if (loss.needs_even_length() && scores.size() % 2 != 0) {
    throw InvalidArgument(loss.name() + " needs an even number of scores");
  }
  return enumerate_losses(
      scores,
      [&loss](std::span<const double> f) { return evaluate_loss(loss, f).value; },
      loss.name());
}

EnumerationReport enumerate_losses(std::span<const double> scores,
                                   const ArrangementLoss& loss,
                                   std::string loss_name) {
  require_enumerable(scores.size());
  EnumerationReport report;
  report.scores = sorted_descending(scores);
  report.loss_name = std::move(loss_name);

  std::vector<double> current(report.scores.rbegin(), report.scores.rend());
  do {
    report.arrangements.push_back({current, loss(current)});
  } while (std::next_permutation(current.begin(), current.end()));

  report.min_loss = std::numeric_limits<double>::infinity();
  for (const auto& a : report.arrangements) {
    report.min_loss = std::min(report.min_loss, a.loss);
  }
  for (std::size_t i = 0; i < report.arrangements.size(); ++i) {
    if (report.arrangements[i].loss <= report.min_loss + kMinimizerTolerance) {
      report.minimizers.push_back(i);
    }
  }

  const auto& first = report.arrangements[report.minimizers.front()].values;
  if (report.minimizers.size() == 1 && first == report.scores) {
    report.classification = MinimizerClass::kDescendingUnique;
  } else if (report.scores.size() % 2 == 0 &&
             std::all_of(report.minimizers.begin(), report.minimizers.end(),
                         [&](std::size_t i) {
                           return halves_respected(report.arrangements[i].values,
                                                   report.scores);
                         })) {
    report.classification = MinimizerClass::kBinaryClassSet;
  } else {
    report.classification = MinimizerClass::kOther;
  }
  return report;
}

void write_enumeration_csv(const EnumerationReport& report, std::ostream& out) {
  out << "permutation,loss,is_minimizer\n";
  std::vector<bool> is_min(report.arrangements.size(), false);
  for (std::size_t i : report.minimizers) is_min[i] = true;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < report.arrangements.size(); ++i) {
    out << join(report.arrangements[i].values) << ',' << report.arrangements[i].loss
        << ',' << (is_min[i] ? 1 : 0) << '\n';
  }
}

ExpListFoldTable::ExpListFoldTable(std::span<const double> scores)
    : scores_(scores.begin(), scores.end()) {
  const std::size_t m = scores_.size();
  if (m == 0 || m % 2 != 0 || m > 16) {
    throw InvalidArgument("ExpListFoldTable: need an even size in [2, 16]");
  }
  log_normaliser_.assign(std::size_t{1} << m,
                         std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> members;
  for (std::size_t mask = 0; mask < log_normaliser_.size(); ++mask) {
    const int count = std::popcount(mask);
    if (count < 2 || count % 2 != 0) continue;
    members.clear();
    for (std::size_t u = 0; u < m; ++u) {
      if (mask & (std::size_t{1} << u)) members.push_back(u);
    }
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t u : members) {
      hi = std::max(hi, scores_[u]);
      lo = std::min(lo, scores_[u]);
    }
    const double top = hi - lo;
    double sum = 0.0;
    for (std::size_t u : members) {
      for (std::size_t v : members) {
        if (u != v) sum += std::exp(scores_[u] - scores_[v] - top);
      }
    }
    log_normaliser_[mask] = top + std::log(sum);
  }
}

double ExpListFoldTable::loss(std::span<const std::size_t> order) const {
  const std::size_t m = scores_.size();
  std::size_t mask = (std::size_t{1} << m) - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < m / 2; ++i) {
    const std::size_t u = order[i];
    const std::size_t v = order[m - 1 - i];
    total += log_normaliser_[mask] - (scores_[u] - scores_[v]);
    mask &= ~((std::size_t{1} << u) | (std::size_t{1} << v));
  }
  return total;
}

CaseResult check_sigmoid_pairing(std::span<const double> scores) {
  if (scores.size() % 2 != 0) {
    throw InvalidArgument("check_sigmoid_pairing: need an even number of scores");
  }
  const EnumerationReport report =
      enumerate_losses(scores, LossSpec{LossFamily::kListFold, Transform::sigmoid()});
  const std::vector<double>& desc = report.scores;
  const std::size_t n = desc.size() / 2;

  // Pair j couples desc[j] (top half) with desc[n + j] (bottom half).
  std::set<std::vector<double>> expected;
  std::vector<std::size_t> pair_order(n);
  std::iota(pair_order.begin(), pair_order.end(), std::size_t{0});
  do {
    std::vector<double> a(desc.size());
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = desc[pair_order[i]];
      a[desc.size() - 1 - i] = desc[n + pair_order[i]];
    }
    expected.insert(std::move(a));
  } while (std::next_permutation(pair_order.begin(), pair_order.end()));

  std::set<std::vector<double>> found;
  for (std::size_t i : report.minimizers) found.insert(report.arrangements[i].values);

  CaseResult result;
  result.scores = desc;
  if (found == expected) return result;

  const bool covered = std::includes(found.begin(), found.end(),
                                     expected.begin(), expected.end());
  if (has_ties(desc) && covered) {
    result.status = CaseStatus::kDegenerate;
    result.detail = "tied scores enlarge the minimizer set";
    return result;
  }
  result.status = CaseStatus::kViolation;
  for (const auto& a : found) {
    if (!expected.count(a)) {
      result.witness = a;
      result.detail = "unexpected minimizer";
      break;
    }
  }
  if (result.witness.empty()) {
    for (const auto& a : expected) {
      if (!found.count(a)) {
        result.witness = a;
        result.detail = "predicted ordering is not a minimizer";
        break;
      }
    }
  }
  result.gap = evaluate_loss({LossFamily::kListFold, Transform::sigmoid()},
                             result.witness).value - report.min_loss;
  return result;
}

CaseResult check_descending_minimizer(std::span<const double> scores,
                                      bool restricted) {
  require_enumerable(scores.size());
  if (scores.size() % 2 != 0) {
    throw InvalidArgument("check_descending_minimizer: need an even number of scores");
  }
  const std::vector<double> desc = sorted_descending(scores);
  const std::size_t m = desc.size();
  const std::size_t n = m / 2;
  const ExpListFoldTable table(desc);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double truth_loss = table.loss(order);

  double best_other = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_order;
  auto consider = [&](std::span<const std::size_t> o) {
    bool same = true;
    for (std::size_t p = 0; p < m && same; ++p) same = desc[o[p]] == desc[p];
    if (same) return;
    const double l = table.loss(o);
    if (l < best_other) {
      best_other = l;
      best_order.assign(o.begin(), o.end());
    }
  };

  if (restricted) {
    auto top_begin = order.begin();
    auto mid = order.begin() + static_cast<long>(n);
    do {
      std::sort(mid, order.end());
      do {
        consider(order);
      } while (std::next_permutation(mid, order.end()));
    } while (std::next_permutation(top_begin, mid));
  } else {
    do {
      consider(order);
    } while (std::next_permutation(order.begin(), order.end()));
  }

  CaseResult result;
  result.scores = desc;
  if (best_order.empty()) {
    // No distinct alternative: either every score is equal, or the
    // restricted space holds the descending ordering alone.
    if (desc.front() == desc.back()) {
      result.status = CaseStatus::kDegenerate;
      result.detail = "all scores equal";
    }
    return result;
  }
  result.gap = truth_loss - best_other;
  if (best_other < truth_loss - kMinimizerTolerance) {
    result.status = CaseStatus::kViolation;
    result.witness = arrange(desc, best_order);
    result.detail = "descending ordering beaten";
  } else if (best_other <= truth_loss + kMinimizerTolerance) {
    result.status = CaseStatus::kDegenerate;
    result.witness = arrange(desc, best_order);
    result.detail = "another ordering ties the descending one";
  }
  return result;
}

namespace {

std::vector<double> draw_distinct(std::size_t size, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.5);
  std::vector<double> out(size);
  while (true) {
    for (double& v : out) v = gauss(rng);
    auto sorted = out;
    std::sort(sorted.begin(), sorted.end());
    bool distinct = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] - sorted[i - 1] < 1e-6) distinct = false;
    }
    if (distinct) return out;
  }
}

template <typename Check>
PropertyReport run_trials(std::string name, std::size_t trials,
                         std::span<const std::size_t> n_values,
                         std::uint64_t seed, Check check) {
  PropertyReport report;
  report.name = std::move(name);
  std::mt19937_64 rng(seed);
  for (std::size_t n : n_values) {
    if (n == 0 || 2 * n > kMaxEnumerationSize) {
      throw InvalidArgument("property check: n must lie in [1, " +
                            std::to_string(kMaxEnumerationSize / 2) + "]");
    }
    for (std::size_t t = 0; t < trials; ++t) {
      const auto scores = draw_distinct(2 * n, rng);
      CaseResult r = check(scores);
      ++report.cases;
      switch (r.status) {
        case CaseStatus::kPass:
          ++report.passes;
          break;
        case CaseStatus::kDegenerate:
          ++report.degenerate;
          break;
        case CaseStatus::kViolation:
          report.violations.push_back(std::move(r));
          break;
      }
    }
  }
  return report;
}

}  // namespace

PropertyReport verify_sigmoid_pairing_family(std::size_t trials,
                              std::span<const std::size_t> n_values,
                              std::uint64_t seed) {
  return run_trials("sigmoid-pairing", trials, n_values, seed,
                    [](const std::vector<double>& s) { return check_sigmoid_pairing(s); });
}

PropertyReport verify_descending_minimizer(std::size_t trials,
                              std::span<const std::size_t> n_values,
                              std::uint64_t seed, bool restricted) {
  return run_trials(restricted ? "exp-descending-restricted"
                               : "exp-descending-unrestricted",
                    trials, n_values, seed,
                    [restricted](const std::vector<double>& s) {
                      return check_descending_minimizer(s, restricted);
                    });
}

void write_property_summary(const PropertyReport& report, std::ostream& out) {
  out << report.name << ": cases=" << report.cases << " passes=" << report.passes
      << " degenerate=" << report.degenerate
      << " violations=" << report.violations.size() << '\n';
  out << std::setprecision(17);
  for (const auto& v : report.violations) {
    out << "  violation scores=[" << join(v.scores) << "] witness=["
        << join(v.witness) << "] gap=" << v.gap << " (" << v.detail << ")\n";
  }
}

std::string to_string(ScoreDistribution d) {
  switch (d) {
    case ScoreDistribution::kUniform:
      return "uniform";
    case ScoreDistribution::kNormal:
      return "normal";
    case ScoreDistribution::kClustered:
      return "clustered";
    case ScoreDistribution::kNearTie:
      return "near-tie";
  }
  return "uniform";
}

ScoreDistribution parse_distribution(std::string_view name) {
  if (name == "uniform") return ScoreDistribution::kUniform;
  if (name == "normal") return ScoreDistribution::kNormal;
  if (name == "clustered") return ScoreDistribution::kClustered;
  if (name == "near-tie") return ScoreDistribution::kNearTie;
  throw InvalidArgument("unknown score distribution '" + std::string(name) + "'");
}

std::vector<double> draw_scores(ScoreDistribution dist, std::size_t size,
                                std::mt19937_64& rng) {
  std::vector<double> out(size);
  switch (dist) {
    case ScoreDistribution::kUniform: {
      std::uniform_real_distribution<double> u(-3.0, 3.0);
      for (double& v : out) v = u(rng);
      break;
    }
    case ScoreDistribution::kNormal: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& v : out) v = g(rng);
      break;
    }
    case ScoreDistribution::kClustered: {
      // Two tight groups whose separation varies per draw.
      std::uniform_real_distribution<double> gap(0.5, 4.0);
      std::normal_distribution<double> jitter(0.0, 0.1);
      std::bernoulli_distribution side(0.5);
      const double g = gap(rng);
      for (double& v : out) v = (side(rng) ? g : 0.0) + jitter(rng);
      break;
    }
    case ScoreDistribution::kNearTie: {
      // A near-tied bulk plus one extreme score on a random side.
      std::normal_distribution<double> jitter(0.0, 1e-2);
      std::uniform_real_distribution<double> far(1.0, 6.0);
      std::bernoulli_distribution side(0.5);
      for (double& v : out) v = jitter(rng);
      if (!out.empty()) out.front() = side(rng) ? far(rng) : -far(rng);
      break;
    }
  }
  return out;
}

std::vector<Witness> counterexample_search(std::size_t budget, std::size_t size,
                                           ScoreDistribution dist,
                                           std::uint64_t seed,
                                           const ArrangementLoss& loss) {
  if (size == 0 || size % 2 != 0 || size > kMaxEnumerationSize) {
    throw InvalidArgument("counterexample_search: size must be even and <= " +
                          std::to_string(kMaxEnumerationSize));
  }
  std::mt19937_64 rng(seed);
  std::vector<Witness> witnesses;
  for (std::size_t b = 0; b < budget; ++b) {
    const auto scores = draw_scores(dist, size, rng);
    if (!loss) {
      const CaseResult r = check_descending_minimizer(scores, false);
      if (r.status == CaseStatus::kViolation) {
        witnesses.push_back({r.scores, r.witness, r.gap});
      }
      continue;
    }
    const EnumerationReport report = enumerate_losses(scores, loss, "custom");
    const double truth = loss(report.scores);
    for (std::size_t i : report.minimizers) {
      const auto& a = report.arrangements[i];
      if (a.loss < truth - kMinimizerTolerance) {
        witnesses.push_back({report.scores, a.values, truth - a.loss});
        break;
      }
    }
  }
  return witnesses;
}

SensitivityReport order_sensitivity_probe(std::span<const double> scores,
                                          const LossSpec& loss) {
  const EnumerationReport report = enumerate_losses(scores, loss);
  std::map<std::vector<double>, double> by_values;
  for (const auto& a : report.arrangements) by_values.emplace(a.values, a.loss);

  SensitivityReport out;
  for (const auto& a : report.arrangements) {
    const std::size_t m = a.values.size();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (!(a.values[i] < a.values[j])) continue;  // only swaps toward truth
        auto after = a.values;
        std::swap(after[i], after[j]);
        const double delta = by_values.at(after) - a.loss;
        ++out.swaps_checked;
        if (delta > kMinimizerTolerance) {
          out.violations.push_back({a.values, i, j, delta});
        }
      }
    }
  }
  return out;
}

double FrequencyTable::max_abs_z() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, std::abs(e.z));
  return worst;
}

namespace {

void validate_sampler(const SamplerSpec& spec) {
  if (spec.weights.empty()) throw InvalidArgument("sampler: no weights");
  require_enumerable(spec.weights.size());
  for (double w : spec.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("sampler: weights must be positive and finite");
    }
  }
  if (spec.draws == 0) throw InvalidArgument("sampler: draws must be >= 1");
}

std::size_t pick(const std::vector<double>& mass,
                 const std::vector<std::size_t>& items, std::mt19937_64& rng) {
  double total = 0.0;
  for (std::size_t i : items) total += mass[i];
  std::uniform_real_distribution<double> u(0.0, total);
  double x = u(rng);
  for (std::size_t k = 0; k < items.size(); ++k) {
    x -= mass[items[k]];
    if (x < 0.0) return k;
  }
  return items.size() - 1;
}

template <typename Analytic>
FrequencyTable tabulate(const std::map<std::vector<std::size_t>, std::size_t>& counts,
                        std::size_t m, std::size_t draws, Analytic analytic) {
  FrequencyTable table;
  table.draws = draws;
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    FrequencyEntry e;
    e.permutation = perm;
    const auto it = counts.find(perm);
    e.count = it == counts.end() ? 0 : it->second;
    e.empirical = static_cast<double>(e.count) / static_cast<double>(draws);
    e.analytic = analytic(perm);
    e.z = z_score(e.empirical, e.analytic, draws);
    table.entries.push_back(std::move(e));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return table;
}

std::vector<double> log_weights(const std::vector<double>& w,
                                std::span<const std::size_t> perm) {
  std::vector<double> out(perm.size());
  for (std::size_t p = 0; p < perm.size(); ++p) out[p] = std::log(w[perm[p]]);
  return out;
}

}  // namespace

FrequencyTable sample_vase(const SamplerSpec& spec) {
  validate_sampler(spec);
  const std::size_t m = spec.weights.size();
  std::mt19937_64 rng(spec.seed);
  std::map<std::vector<std::size_t>, std::size_t> counts;
  std::vector<std::size_t> remaining, drawn;
  for (std::size_t d = 0; d < spec.draws; ++d) {
    remaining.resize(m);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    drawn.clear();
    while (!remaining.empty()) {
      const std::size_t k = pick(spec.weights, remaining, rng);
      drawn.push_back(remaining[k]);
      remaining.erase(remaining.begin() + static_cast<long>(k));
    }
    ++counts[drawn];
  }
  return tabulate(counts, m, spec.draws, [&](std::span<const std::size_t> perm) {
    return std::exp(-listmle_loss(log_weights(spec.weights, perm),
                                  Transform::exponential()).value);
  });
}

FrequencyTable sample_plank_dart(const SamplerSpec& spec) {
  validate_sampler(spec);
  const std::size_t m = spec.weights.size();
  if (m % 2 != 0) throw InvalidArgument("plank-dart sampler: need an even number of planks");
  std::vector<double> lengths = spec.lengths;
  if (lengths.empty()) {
    for (double w : spec.weights) lengths.push_back(1.0 / w);
  }
  if (lengths.size() != m) throw InvalidArgument("plank-dart sampler: lengths size mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(spec.weights[i] * lengths[i] - 1.0) > 1e-12) {
      throw InvalidArgument("plank-dart sampler: width * length must equal 1");
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::map<std::vector<std::size_t>, std::size_t> counts;
  std::vector<std::size_t> remaining, sequence(m);
  for (std::size_t d = 0; d < spec.draws; ++d) {
    remaining.resize(m);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    for (std::size_t stage = 0; stage < m / 2; ++stage) {
      std::size_t a = 0, b = 0;
      do {
        a = pick(spec.weights, remaining, rng);
        b = pick(lengths, remaining, rng);
      } while (a == b);
      sequence[stage] = remaining[a];
      sequence[m - 1 - stage] = remaining[b];
      remaining.erase(remaining.begin() + static_cast<long>(std::max(a, b)));
      remaining.erase(remaining.begin() + static_cast<long>(std::min(a, b)));
    }
    ++counts[sequence];
  }
  return tabulate(counts, m, spec.draws, [&](std::span<const std::size_t> perm) {
    return std::exp(-listfold_loss(log_weights(spec.weights, perm),
                                   Transform::exponential()).value);
  });
}

void write_frequency_csv(const FrequencyTable& table, std::ostream& out) {
  out << "permutation,count,empirical,analytic,z\n";
  out << std::setprecision(10);
  for (const auto& e : table.entries) {
    for (std::size_t p = 0; p < e.permutation.size(); ++p) {
      if (p) out << ' ';
      out << e.permutation[p];
    }
    out << ',' << e.count << ',' << e.empirical << ',' << e.analytic << ','
        << e.z << '\n';
  }
}

}  // namespace listfold::lab
