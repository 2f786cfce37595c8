// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic stand-in for remote-sensed yields and gridded climate
// projections. Neighborhood-year yield deltas follow a known response to the
// climate features:
//
//   mean  = intercept + year_trend * (year - trend_reference_year) + beta . x + noise
//   std   = clamp(std_base + gamma . x + noise / 2, std_floor, std_cap)
//
// Unit deltas in each neighborhood-year are standardized draws, so their
// sample mean and sample std reproduce (mean, std) exactly. With
// noise_scale = 0 the summaries are an exact function of the features.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "yieldrisk/climate.hpp"
#include "yieldrisk/summary.hpp"

namespace yieldrisk {

struct SyntheticConfig {
  int n_neighborhoods = 50;
  int first_year = 1999;
  int n_years = 18;
  uint64_t seed = 7;
  FeatureSchema schema = FeatureSchema::default_schema();
  int units_per_neighborhood = 24;
  double noise_scale = 0.0;

  double intercept = 0.01;
  double year_trend = 0.004;
  int trend_reference_year = 2008;
  double std_base = 0.12;
  double std_floor = 0.03;
  double std_cap = 0.24;
  int informative_features = 6;
  double mean_effect = 0.03;
  double std_effect = 0.008;

  // Future series: years centred on 2030 and 2050.
  int series_window = 5;
  double warming_2030 = 0.6;  // shift of warming-type features, in feature sd
  double warming_2050 = 1.2;
  double variability_2030 = 1.15;
  double variability_2050 = 1.3;

  void validate() const;
};

struct SyntheticTruth {
  std::vector<double> mean_coefficients;  // beta, one per climate feature
  std::vector<double> std_coefficients;   // gamma
  double intercept = 0.0;
  double year_trend = 0.0;
  int trend_reference_year = 0;
  double std_base = 0.0;
  double std_floor = 0.0;
  double std_cap = 0.0;
  // (geohash, year) -> realized (mean, std) of unit deltas, historic years only.
  std::map<std::pair<std::string, int>, std::pair<double, double>> moments;

  /// Noise-free response.
  double mean_response(const std::vector<double>& climate, int year) const;
  double std_response(const std::vector<double>& climate) const;
};

struct SyntheticDataset {
  std::vector<UnitYieldRecord> yields;
  ClimateBundle climate;  // historic plus the four future series
  SyntheticTruth truth;
};

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

}  // namespace yieldrisk
