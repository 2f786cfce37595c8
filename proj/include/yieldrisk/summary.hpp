// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Yield deltas and per-neighborhood distribution summaries.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "yieldrisk/geohash.hpp"

namespace yieldrisk {

struct UnitYieldRecord {
  std::string unit_id;
  Geohash geohash4;
  int year = 0;
  double y_actual = 0.0;
  std::vector<double> y_history;  // oldest first
  double unit_acres = 0.0;
};

// Screening cutoffs for approximate normality of a delta distribution.
inline constexpr double kSkewnessLimit = 2.0;
inline constexpr double kExcessKurtosisLimit = 7.0;

struct NormalityFlags {
  bool approx_normal = false;
  bool approx_symmetric = false;
};

NormalityFlags normality_screen(double skewness, double excess_kurtosis) noexcept;

struct NeighborhoodSummary {
  Geohash geohash4;
  int year = 0;
  double mean_delta = 0.0;
  double std_delta = 0.0;  // sample std (n - 1)
  std::size_t count = 0;
  double skewness = 0.0;         // adjusted Fisher-Pearson G1; 0 when undefined
  double excess_kurtosis = 0.0;  // sample excess kurtosis G2; 0 when undefined
  bool approx_normal = false;
  bool approx_symmetric = false;
  double maize_acres = 0.0;
};

/// (y_actual - y_expected) / y_expected; throws DomainError for y_expected <= 0.
double compute_yield_delta(double y_actual, double y_expected);

/// Summary of one neighborhood-year. Fewer than three samples or zero spread
/// is degenerate: both normality flags are false.
NeighborhoodSummary summarize_neighborhood(std::span<const double> deltas,
                                           const Geohash& geohash4, int year,
                                           double maize_acres);

/// Groups records by (geohash, year), computes each unit's delta against the
/// mean of its last `history_window` yields, and summarizes every group.
/// Records with an empty history are skipped and reported through `skipped`.
std::vector<NeighborhoodSummary> summarize_records(std::span<const UnitYieldRecord> records,
                                                   int history_window,
                                                   std::vector<std::string>* skipped = nullptr);

}  // namespace yieldrisk
