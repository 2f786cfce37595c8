// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regression rows: one per neighborhood-year, joining the yield-delta summary
// with that year's climate deltas and the neighborhood's earlier history.
//
// Model input layout is [climate features..., year, z_mu, z_sigma] where
// z_mu / z_sigma are the means of the neighborhood's summary mean_delta /
// std_delta over all strictly earlier years (0 when there are none).

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yieldrisk/climate.hpp"
#include "yieldrisk/summary.hpp"

namespace yieldrisk {

inline constexpr std::size_t kExtraInputs = 3;  // year, z_mu, z_sigma

struct RegressionRow {
  Geohash geohash4;
  int year = 0;
  std::vector<double> climate;
  double z_mu = 0.0;
  double z_sigma = 0.0;
  double target_mean = 0.0;
  double target_std = 0.0;
  double acres = 0.0;

  std::vector<double> inputs() const;
};

struct HistoryStats {
  double z_mu = 0.0;
  double z_sigma = 0.0;
};

class NeighborhoodHistory {
 public:
  NeighborhoodHistory() = default;
  explicit NeighborhoodHistory(std::span<const NeighborhoodSummary> summaries);

  /// Statistics over summaries strictly before `year`.
  HistoryStats before(const Geohash& g, int year) const;
  /// Mean maize acreage across all summarized years; 0 when unknown.
  double mean_acres(const Geohash& g) const;
  std::vector<Geohash> geohashes() const;

 private:
  struct Entry {
    int year;
    double mean_delta;
    double std_delta;
    double acres;
  };
  std::map<std::string, std::vector<Entry>> by_geohash_;  // entries sorted by year
};

struct RegressionDataset {
  FeatureSchema schema;
  std::vector<RegressionRow> rows;
  std::vector<std::string> warnings;  // neighborhood-years skipped for missing climate

  std::size_t input_size() const noexcept { return schema.size() + kExtraInputs; }
};

RegressionDataset build_regression_dataset(std::span<const NeighborhoodSummary> summaries,
                                           std::span<const ClimateFeatureSet> climate,
                                           const FeatureSchema& schema);

// Attribute groups used for attribute-drop experiments. "none" drops nothing,
// "year" drops the year input, "temperature" covers tmin and tmax, and any
// other climate variable name covers that variable's columns.
inline constexpr std::string_view kNoAttributeDrop = "none";

/// Input columns covered by `attribute`; throws ConfigError if unknown or if
/// the schema has no columns for it.
std::vector<std::size_t> attribute_columns(const FeatureSchema& schema, std::string_view attribute);

/// The ten attribute-drop options of the default sweep grid.
std::vector<std::string> default_attribute_drop_menu();

}  // namespace yieldrisk
