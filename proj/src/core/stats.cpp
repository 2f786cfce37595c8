// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "yieldrisk/error.hpp"

namespace yieldrisk::stats {
namespace {

struct Ranked {
  std::vector<double> ranks;  // midranks of the pooled sample, a first then b
  double tie_term = 0.0;      // sum over tie groups of t^3 - t
};

Ranked rank_pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());

  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });

  Ranked out;
  out.ranks.resize(pooled.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
    for (std::size_t k = i; k < j; ++k) out.ranks[order[k]] = rank;
    const auto t = static_cast<double>(j - i);
    out.tie_term += t * t * t - t;
    i = j;
  }
  return out;
}

double asymptotic_p(double u, double n1, double n2, double tie_term) {
  const double n = n1 + n2;
  const double mu = 0.5 * n1 * n2;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(std::abs(u - mu) - 0.5, 0.0) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

// Exact permutation p-value conditional on the observed ties. Works on doubled
// midranks, which are integers, and counts subsets of size n1 by rank sum.
double exact_p(const std::vector<double>& ranks, std::size_t n1) {
  const std::size_t n = ranks.size();
  std::vector<int64_t> doubled(n);
  int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = std::llround(2.0 * ranks[i]);
    total += doubled[i];
  }
  const auto max_sum = static_cast<std::size_t>(total);
  const std::size_t width = max_sum + 1;
  // counts[j * width + s]: number of j-subsets with doubled rank sum s.
  std::vector<double> counts((n1 + 1) * width, 0.0);
  counts[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(doubled[i]);
    for (std::size_t j = std::min(i + 1, n1); j >= 1; --j) {
      double* dst = &counts[j * width];
      const double* src = &counts[(j - 1) * width];
      for (std::size_t s = max_sum; s >= r; --s) {
        dst[s] += src[s - r];
        if (s == r) break;
      }
    }
  }

  int64_t observed = 0;
  for (std::size_t i = 0; i < n1; ++i) observed += doubled[i];
  // Mean of the doubled rank sum is n1 * (n + 1).
  const auto centre = static_cast<int64_t>(n1 * (n + 1));
  const int64_t dev = std::llabs(observed - centre);

  double extreme = 0.0, all = 0.0;
  const double* row = &counts[n1 * width];
  for (std::size_t s = 0; s <= max_sum; ++s) {
    if (row[s] == 0.0) continue;
    all += row[s];
    if (std::llabs(static_cast<int64_t>(s) - centre) >= dev) extreme += row[s];
  }
  return std::min(1.0, extreme / all);
}

}  // namespace

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> midranks(std::span<const double> values) {
  return rank_pooled(values, {}).ranks;
}

MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                         MwuMethod method) {
  if (a.empty() || b.empty()) {
    throw DomainError("mann_whitney_u: both samples must be nonempty");
  }
  const auto ranked = rank_pooled(a, b);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double r1 = std::accumulate(ranked.ranks.begin(),
                                    ranked.ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);

  MwuResult out;
  out.n1 = a.size();
  out.n2 = b.size();
  out.u_statistic = r1 - n1 * (n1 + 1.0) / 2.0;

  const std::size_t n = a.size() + b.size();
  if (method == MwuMethod::Auto) {
    method = n <= kExactMwuLimit ? MwuMethod::Exact : MwuMethod::Asymptotic;
  }
  out.method = method;
  out.p_value = method == MwuMethod::Exact ? exact_p(ranked.ranks, a.size())
                                           : asymptotic_p(out.u_statistic, n1, n2, ranked.tie_term);
  return out;
}

double bonferroni_threshold(double alpha, std::size_t n_tests) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("bonferroni: alpha must be in (0, 1)");
  if (n_tests == 0) throw DomainError("bonferroni: number of tests must be >= 1");
  return alpha / static_cast<double>(n_tests);
}

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("spearman_rho: inputs differ in length");
  if (x.size() < 3) throw DomainError("spearman_rho: need at least 3 pairs");

  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DomainError("spearman_rho: undefined for a constant input vector");
  }

  SpearmanResult out;
  out.n = x.size();
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = n - 2.0;
  const double denom = 1.0 - out.rho * out.rho;
  if (denom <= 0.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.rho * std::sqrt(dof / denom);
    const boost::math::students_t dist(dof);
    out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  }
  return out;
}

}  // namespace yieldrisk::stats
