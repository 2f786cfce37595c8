// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/summary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "yieldrisk/coverage.hpp"
#include "yieldrisk/error.hpp"

namespace yieldrisk {

NormalityFlags normality_screen(double skewness, double excess_kurtosis) noexcept {
  NormalityFlags flags;
  flags.approx_symmetric = std::abs(skewness) <= kSkewnessLimit;
  flags.approx_normal =
      flags.approx_symmetric && std::abs(excess_kurtosis) <= kExcessKurtosisLimit;
  return flags;
}

double compute_yield_delta(double y_actual, double y_expected) {
  if (!(y_expected > 0.0)) {
    throw DomainError("yield delta requires a positive expected yield, got " +
                      std::to_string(y_expected));
  }
  return (y_actual - y_expected) / y_expected;
}

NeighborhoodSummary summarize_neighborhood(std::span<const double> deltas,
                                           const Geohash& geohash4, int year,
                                           double maize_acres) {
  if (deltas.empty()) {
    throw DomainError("summarize_neighborhood: no deltas for " + geohash4.code() + " " +
                      std::to_string(year));
  }
  NeighborhoodSummary s;
  s.geohash4 = geohash4;
  s.year = year;
  s.count = deltas.size();
  s.maize_acres = maize_acres;

  // Sorting first makes the floating-point sums independent of input order.
  std::vector<double> sorted(deltas.begin(), deltas.end());
  std::sort(sorted.begin(), sorted.end());

  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (double d : sorted) sum += d;
  s.mean_delta = sum / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double d : sorted) {
    const double c = d - s.mean_delta;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  if (sorted.size() >= 2) s.std_delta = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;

  const bool spread = m2 > 0.0 && s.std_delta > 1e-12 * std::max(1.0, std::abs(s.mean_delta));
  if (!spread || sorted.size() < 3) {
    s.skewness = 0.0;
    s.excess_kurtosis = 0.0;
    s.approx_normal = false;
    s.approx_symmetric = false;
    return s;
  }

  const double g1 = m3 / std::pow(m2, 1.5);
  s.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  bool kurtosis_defined = sorted.size() >= 4;
  if (kurtosis_defined) {
    const double g2 = m4 / (m2 * m2) - 3.0;
    s.excess_kurtosis = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
  }
  const auto flags = normality_screen(s.skewness, s.excess_kurtosis);
  s.approx_symmetric = flags.approx_symmetric;
  s.approx_normal = flags.approx_normal && kurtosis_defined;
  return s;
}

std::vector<NeighborhoodSummary> summarize_records(std::span<const UnitYieldRecord> records,
                                                   int history_window,
                                                   std::vector<std::string>* skipped) {
  struct Group {
    std::vector<double> deltas;
    std::vector<double> acres;
  };
  std::map<std::pair<std::string, int>, Group> groups;
  for (const auto& r : records) {
    if (r.y_history.empty()) {
      if (skipped) skipped->push_back("unit " + r.unit_id + " year " + std::to_string(r.year) +
                                      ": empty yield history");
      continue;
    }
    const double expected = expected_yield(r.y_history, history_window);
    if (!(expected > 0.0)) {
      if (skipped) skipped->push_back("unit " + r.unit_id + " year " + std::to_string(r.year) +
                                      ": expected yield is zero");
      continue;
    }
    auto& g = groups[{r.geohash4.code(), r.year}];
    g.deltas.push_back(compute_yield_delta(r.y_actual, expected));
    g.acres.push_back(r.unit_acres);
  }

  std::vector<NeighborhoodSummary> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    std::sort(g.acres.begin(), g.acres.end());
    double acres = 0.0;
    for (double a : g.acres) acres += a;
    out.push_back(summarize_neighborhood(g.deltas, Geohash(key.first), key.second, acres));
  }
  return out;
}

}  // namespace yieldrisk
