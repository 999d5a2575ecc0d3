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

#include "listfold/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "listfold/error.hpp"

namespace listfold {
namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void require_finite(std::span<const double> scores, const char* who) {
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InvalidArgument(std::string(who) + ": non-finite score");
    }
  }
}

void require_even(std::span<const double> scores, const char* who) {
  if (scores.empty() || scores.size() % 2 != 0) {
    throw InvalidArgument(std::string(who) +
                          ": list length must be even and positive, got " +
                          std::to_string(scores.size()));
  }
}

}  // namespace

double Transform::value(double x) const {
  switch (kind_) {
    case TransformKind::kExponential:
      return std::exp(x);
    case TransformKind::kSigmoid:
      return logistic(x);
    case TransformKind::kLinear:
      return std::max(x, kLinearFloor);
  }
  return 0.0;
}

double Transform::derivative(double x) const {
  switch (kind_) {
    case TransformKind::kExponential:
      return std::exp(x);
    case TransformKind::kSigmoid:
      return logistic(x) * logistic(-x);
    case TransformKind::kLinear:
      return x > kLinearFloor ? 1.0 : 0.0;
  }
  return 0.0;
}

double Transform::log_value(double x) const {
  switch (kind_) {
    case TransformKind::kExponential:
      return x;
    case TransformKind::kSigmoid:
      return -softplus(-x);
    case TransformKind::kLinear:
      return std::log(std::max(x, kLinearFloor));
  }
  return 0.0;
}

double Transform::log_derivative(double x) const {
  switch (kind_) {
    case TransformKind::kExponential:
      return 1.0;
    case TransformKind::kSigmoid:
      return logistic(-x);
    case TransformKind::kLinear:
      return x > kLinearFloor ? 1.0 / x : 0.0;
  }
  return 0.0;
}

std::string LossSpec::name() const {
  std::string base;
  switch (family) {
    case LossFamily::kListFold:
      base = "listfold";
      break;
    case LossFamily::kListMLE:
      base = "listmle";
      break;
    case LossFamily::kNaivePt:
      base = "naivept";
      break;
    case LossFamily::kMSE:
      return "mse";
  }
  switch (transform.kind()) {
    case TransformKind::kExponential:
      return base + "-exp";
    case TransformKind::kSigmoid:
      return base + "-sgm";
    case TransformKind::kLinear:
      return base + "-lin";
  }
  return base;
}

LossSpec LossSpec::parse(std::string_view name) {
  if (name == "mse") return {LossFamily::kMSE, Transform::exponential()};
  const auto dash = name.rfind('-');
  if (dash == std::string_view::npos) {
    throw InvalidArgument("unknown loss '" + std::string(name) + "'");
  }
  const auto family = name.substr(0, dash);
  const auto suffix = name.substr(dash + 1);
  LossSpec spec;
  if (family == "listfold") {
    spec.family = LossFamily::kListFold;
  } else if (family == "listmle") {
    spec.family = LossFamily::kListMLE;
  } else if (family == "naivept") {
    spec.family = LossFamily::kNaivePt;
  } else {
    throw InvalidArgument("unknown loss family '" + std::string(family) + "'");
  }
  if (suffix == "exp") {
    spec.transform = Transform::exponential();
  } else if (suffix == "sgm" || suffix == "sigmoid") {
    spec.transform = Transform::sigmoid();
  } else if (suffix == "lin" || suffix == "linear") {
    spec.transform = Transform::linear();
  } else {
    throw InvalidArgument("unknown transform '" + std::string(suffix) + "'");
  }
  return spec;
}

LossResult listmle_loss(std::span<const double> scores, Transform transform,
                        std::size_t stages) {
  if (scores.empty()) throw InvalidArgument("listmle_loss: empty list");
  require_finite(scores, "listmle_loss");
  const std::size_t n = scores.size();
  const std::size_t steps = (stages == 0 || stages > n) ? n : stages;

  LossResult out;
  out.gradient.assign(n, 0.0);

  if (transform.kind() == TransformKind::kExponential) {
    // Suffix log-sum-exp, accumulated from the back.
    std::vector<double> lse(n);
    double running = -std::numeric_limits<double>::infinity();
    for (std::size_t k = n; k-- > 0;) {
      const double hi = std::max(running, scores[k]);
      running = hi + std::log(std::exp(running - hi) + std::exp(scores[k] - hi));
      lse[k] = running;
    }
    for (std::size_t i = 0; i < steps; ++i) {
      out.value += lse[i] - scores[i];
      out.gradient[i] -= 1.0;
      for (std::size_t j = i; j < n; ++j) {
        out.gradient[j] += std::exp(scores[j] - lse[i]);
      }
    }
    return out;
  }

  std::vector<double> psi(n), dpsi(n);
  for (std::size_t k = 0; k < n; ++k) {
    psi[k] = transform.value(scores[k]);
    dpsi[k] = transform.derivative(scores[k]);
  }
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + psi[k];
  for (std::size_t i = 0; i < steps; ++i) {
    out.value += std::log(suffix[i]) - transform.log_value(scores[i]);
    out.gradient[i] -= transform.log_derivative(scores[i]);
    for (std::size_t j = i; j < n; ++j) out.gradient[j] += dpsi[j] / suffix[i];
  }
  return out;
}

LossResult listfold_loss(std::span<const double> scores, Transform transform) {
  require_even(scores, "listfold_loss");
  require_finite(scores, "listfold_loss");
  const std::size_t m = scores.size();
  const std::size_t half = m / 2;

  LossResult out;
  out.gradient.assign(m, 0.0);

  std::vector<double> a(m);
  std::vector<double> b(m);
  for (std::size_t i = 0; i < half; ++i) {
    const std::size_t lo = i;
    const std::size_t hi = m - 1 - i;
    const double width = static_cast<double>(hi - lo + 1);

    const double pair = scores[lo] - scores[hi];
    out.value -= transform.log_value(pair);
    const double dpair = transform.log_derivative(pair);
    out.gradient[lo] -= dpair;
    out.gradient[hi] += dpair;

    switch (transform.kind()) {
      case TransformKind::kExponential: {
        // sum_{u != v} e^(f_u - f_v) = (sum_u e^f_u)(sum_v e^-f_v) - width,
        // with both sums shifted by the window's extremes.
        const auto [mn_it, mx_it] = std::minmax_element(scores.begin() + lo,
                                                        scores.begin() + hi + 1);
        const double spread = *mx_it - *mn_it;
        double sa = 0.0;
        double sb = 0.0;
        for (std::size_t u = lo; u <= hi; ++u) {
          a[u] = std::exp(scores[u] - *mx_it);
          b[u] = std::exp(*mn_it - scores[u]);
          sa += a[u];
          sb += b[u];
        }
        const double scaled = sa * sb - width * std::exp(-spread);
        out.value += spread + std::log(scaled);
        for (std::size_t u = lo; u <= hi; ++u) {
          out.gradient[u] += (a[u] * sb - b[u] * sa) / scaled;
        }
        break;
      }
      case TransformKind::kSigmoid:
        // psi(x) + psi(-x) = 1, so the window sums to its number of
        // unordered pairs and carries no gradient.
        out.value += std::log(width * (width - 1.0) / 2.0);
        break;
      case TransformKind::kLinear: {
        double denominator = 0.0;
        for (std::size_t u = lo; u <= hi; ++u) {
          for (std::size_t v = lo; v <= hi; ++v) {
            if (u != v) denominator += transform.value(scores[u] - scores[v]);
          }
        }
        out.value += std::log(denominator);
        for (std::size_t u = lo; u <= hi; ++u) {
          for (std::size_t v = lo; v <= hi; ++v) {
            if (u == v) continue;
            const double w = transform.derivative(scores[u] - scores[v]) / denominator;
            out.gradient[u] += w;
            out.gradient[v] -= w;
          }
        }
        break;
      }
    }
  }
  return out;
}

LossResult naive_pt_loss(std::span<const double> scores, Transform transform) {
  require_even(scores, "naive_pt_loss");
  require_finite(scores, "naive_pt_loss");
  const std::size_t m = scores.size();
  const std::size_t half = m / 2;

  LossResult top = listmle_loss(scores, transform, half);

  std::vector<double> mirrored(m);
  for (std::size_t k = 0; k < m; ++k) mirrored[k] = -scores[m - 1 - k];
  const LossResult bottom = listmle_loss(mirrored, transform, half);

  top.value += bottom.value;
  // d/d f_k of bottom = -bottom.gradient[m - 1 - k].
  for (std::size_t k = 0; k < m; ++k) top.gradient[k] -= bottom.gradient[m - 1 - k];
  return top;
}

LossResult mse_loss(std::span<const double> scores,
                    std::span<const double> returns) {
  if (scores.size() != returns.size()) {
    throw InvalidArgument("mse_loss: length mismatch (" +
                          std::to_string(scores.size()) + " scores, " +
                          std::to_string(returns.size()) + " returns)");
  }
  if (scores.empty()) throw InvalidArgument("mse_loss: empty list");
  const double n = static_cast<double>(scores.size());
  LossResult out;
  out.gradient.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double e = scores[i] - returns[i];
    out.value += e * e / n;
    out.gradient[i] = 2.0 * e / n;
  }
  return out;
}

LossResult evaluate_loss(const LossSpec& spec, std::span<const double> scores,
                         std::span<const double> returns) {
  switch (spec.family) {
    case LossFamily::kListFold:
      return listfold_loss(scores, spec.transform);
    case LossFamily::kListMLE:
      return listmle_loss(scores, spec.transform);
    case LossFamily::kNaivePt:
      return naive_pt_loss(scores, spec.transform);
    case LossFamily::kMSE:
      return mse_loss(scores, returns);
  }
  throw InvalidArgument("unknown loss family");
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

double loss_gradient_check(const LossSpec& spec,
                           std::span<const double> scores, double step,
                           std::span<const double> returns) {
  if (!(step > 0.0)) throw InvalidArgument("gradient check step must be > 0");
  std::vector<double> targets(returns.begin(), returns.end());
  if (targets.empty()) targets.assign(scores.size(), 0.0);

  const LossResult analytic = evaluate_loss(spec, scores, targets);
  std::vector<double> probe(scores.begin(), scores.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + step;
    const double up = evaluate_loss(spec, probe, targets).value;
    probe[k] = saved - step;
    const double down = evaluate_loss(spec, probe, targets).value;
    probe[k] = saved;
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, relative_error(analytic.gradient[k], numeric));
  }
  return worst;
}

}  // namespace listfold
