// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLLAPSE_STATS_HPP_
#define COLLAPSE_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "collapse/error.hpp"
#include "collapse/parallel.hpp"

namespace collapse {

struct MeanEstimate {
  double mean = 0.0;
  /// Standard error of the mean, sqrt(sample variance / n).
  double se = 0.0;
  std::size_t n = 0;
};

inline MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate e;
  e.n = values.size();
  if (e.n == 0) return e;
  e.mean = pairwise_sum(values) / static_cast<double>(e.n);
  if (e.n < 2) return e;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - e.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(e.n - 1);
  e.se = std::sqrt(var / static_cast<double>(e.n));
  return e;
}

/// Unbiased sample variance and the standard error of that variance estimate,
/// sqrt((m4 - s^4) / n).
struct VarianceEstimate {
  double variance = 0.0;
  double se = 0.0;
};

inline VarianceEstimate estimate_variance(std::span<const double> values) {
  const auto m = estimate_mean(values);
  const auto n = static_cast<double>(values.size());
  std::vector<double> d2(values.size()), d4(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - m.mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  return {m2 * n / (n - 1.0), std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

// Kolmogorov distribution K(x) = P(sup|B| <= x) for the Brownian bridge,
// by two independent series. The alternating form converges fast for large
// x, the theta form for small x.

inline double kolmogorov_cdf_alternating(double x) {
  if (x <= 0.0) return 0.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return 1.0 - 2.0 * sum;
}

inline double kolmogorov_cdf_theta(double x) {
  if (x <= 0.0) return 0.0;
  double sum = 0.0;
  const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
  for (int k = 1; k <= 200; ++k) {
    const double m = 2.0 * k - 1.0;
    const double term = std::exp(-m * m * c);
    sum += term;
    if (term < 1e-300) break;
  }
  return std::sqrt(2.0 * std::numbers::pi) / x * sum;
}

/// 1 - K(x), evaluated by whichever series is accurate at x.
inline double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) return 1.0 - kolmogorov_cdf_theta(x);
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  /// Effective sample size entering the asymptotic distribution.
  double n_effective = 0.0;
};

/// Asymptotic p-value with the Stephens small-sample correction.
inline double ks_p_value(double d, double n_effective) {
  const double en = std::sqrt(n_effective);
  return kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
}

inline KsResult ks_one_sample(std::vector<double> samples,
                              const std::function<double(double)>& cdf) {
  require(!samples.empty(), ErrorCode::invalid_parameter, "KS test on an empty sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p_value(d, n), n};
}

inline double effective_sample_size(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

/// Two-sample KS with optional weights on either side. Weighted empirical
/// CDFs are normalized by the total weight; the asymptotic distribution uses
/// effective sample sizes (sum w)^2 / sum w^2.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> wa,
                              std::span<const double> b, std::span<const double> wb) {
  require(!a.empty() && !b.empty(), ErrorCode::invalid_parameter, "KS test on an empty sample");
  require(wa.empty() || wa.size() == a.size(), ErrorCode::invalid_parameter,
          "weight count mismatch");
  require(wb.empty() || wb.size() == b.size(), ErrorCode::invalid_parameter,
          "weight count mismatch");
  auto sorted = [](std::span<const double> v, std::span<const double> w) {
    std::vector<std::pair<double, double>> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = {v[i], w.empty() ? 1.0 : w[i]};
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto sa = sorted(a, wa);
  const auto sb = sorted(b, wb);
  double ta = 0.0, tb = 0.0;
  for (const auto& p : sa) ta += p.second;
  for (const auto& p : sb) tb += p.second;
  require(ta > 0.0 && tb > 0.0, ErrorCode::invalid_parameter, "KS weights sum to zero");

  std::size_t i = 0, j = 0;
  double ca = 0.0, cb = 0.0, d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j >= sb.size() || (i < sa.size() && sa[i].first <= sb[j].first))
      x = sa[i].first;
    else
      x = sb[j].first;
    while (i < sa.size() && sa[i].first == x) ca += sa[i++].second;
    while (j < sb.size() && sb[j].first == x) cb += sb[j++].second;
    d = std::max(d, std::abs(ca / ta - cb / tb));
  }

  const double na = wa.empty() ? static_cast<double>(a.size()) : effective_sample_size(wa);
  const double nb = wb.empty() ? static_cast<double>(b.size()) : effective_sample_size(wb);
  const double ne = na * nb / (na + nb);
  return {d, ks_p_value(d, ne), ne};
}

inline double chi_square_survival(double x, double dof) {
  require(dof > 0.0, ErrorCode::invalid_parameter, "chi-square needs dof > 0");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

inline double log_poisson_pmf(std::uint64_t k, double mean) {
  const auto kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

/// P(N >= k) for N ~ Poisson(mean) via the regularized incomplete gamma
/// identity P(N >= k) = P(k, mean).
inline double poisson_upper_tail(std::uint64_t k, double mean) {
  if (k == 0) return 1.0;
  return boost::math::gamma_p(static_cast<double>(k), mean);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Goodness of fit of observed counts to Poisson(mean). Adjacent classes are
/// pooled from both tails until every expected count is >= 5.
inline ChiSquareResult poisson_goodness_of_fit(std::span<const std::uint64_t> counts,
                                               double mean) {
  require(!counts.empty(), ErrorCode::invalid_parameter, "no counts");
  require(mean > 0.0, ErrorCode::invalid_parameter, "Poisson mean must be positive");
  const auto n = static_cast<double>(counts.size());
  const std::uint64_t kmax = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(kmax + 2, 0.0);
  for (auto c : counts) observed[c] += 1.0;
  std::vector<double> expected(kmax + 2);
  double acc = 0.0;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    expected[k] = n * std::exp(log_poisson_pmf(k, mean));
    acc += expected[k];
  }
  expected[kmax + 1] = std::max(0.0, n - acc);  // tail class N > kmax

  // Pool into classes with expected >= 5, scanning from the left; the last
  // class absorbs any remainder.
  std::vector<std::pair<double, double>> classes;
  double eo = 0.0, ee = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    eo += observed[k];
    ee += expected[k];
    if (ee >= 5.0) {
      classes.emplace_back(eo, ee);
      eo = ee = 0.0;
    }
  }
  if (ee > 0.0 || eo > 0.0) {
    if (classes.empty()) {
      classes.emplace_back(eo, ee);
    } else {
      classes.back().first += eo;
      classes.back().second += ee;
    }
  }
  ChiSquareResult r;
  r.bins = classes.size();
  for (const auto& [o, e] : classes) r.statistic += (o - e) * (o - e) / e;
  r.dof = static_cast<double>(classes.size()) - 1.0;
  r.p_value = r.dof > 0.0 ? chi_square_survival(r.statistic, r.dof) : 1.0;
  return r;
}

}  // namespace collapse

#endif  // COLLAPSE_STATS_HPP_
