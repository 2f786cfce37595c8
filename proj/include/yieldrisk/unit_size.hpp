// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "yieldrisk/rng.hpp"

namespace yieldrisk {

// Acres in one 1 km x 1 km sample cell.
inline constexpr double kAcresPerSquareKm = 247.105381;

// Discrete distribution of insured-unit sizes in acres. Read from and
// written to CSV `acres,probability`.
class UnitSizeTable {
 public:
  UnitSizeTable() = default;
  UnitSizeTable(std::vector<double> acres, std::vector<double> probability);

  /// Illustrative default; real runs should supply a table built from
  /// historic insured-unit data.
  static UnitSizeTable default_table();

  /// Drops the smallest sizes whose cumulative probability is at most
  /// `quantile`, then renormalizes.
  UnitSizeTable without_smallest(double quantile) const;

  double sample(Rng& rng) const;
  double mean_acres() const noexcept;

  const std::vector<double>& acres() const noexcept { return acres_; }
  const std::vector<double>& probability() const noexcept { return probability_; }

  static UnitSizeTable read_csv(std::istream& in);
  static UnitSizeTable load_csv(const std::string& path);
  void write_csv(std::ostream& out) const;

 private:
  std::vector<double> acres_;        // ascending
  std::vector<double> probability_;  // sums to 1
  std::vector<double> cumulative_;
};

/// Number of 1 km samples averaged to form one unit's yield:
/// max(1, round(acres / (granularity_km^2 * acres per km^2))).
int samples_for_unit(double unit_acres, double sample_granularity_km);

}  // namespace yieldrisk
