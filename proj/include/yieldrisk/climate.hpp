// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monthly climate-delta features and the scenario series that carry them.
//
// Feature vectors are dense and ordered (variable, month, stat): variables in
// the order of the schema, months ascending, stats min/max/mean/std. A missing
// cell is NaN and never silently zero.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yieldrisk/geohash.hpp"

namespace yieldrisk {

enum class ClimateVariable {
  Precipitation,
  Tmin,
  Tmax,
  RhMean,
  RhPeak,
  HeatIndex,
  WetBulb,
  Vpd,
  Svp,
};

inline constexpr std::array kAllClimateVariables = {
    ClimateVariable::Precipitation, ClimateVariable::Tmin,    ClimateVariable::Tmax,
    ClimateVariable::RhMean,        ClimateVariable::RhPeak,  ClimateVariable::HeatIndex,
    ClimateVariable::WetBulb,       ClimateVariable::Vpd,     ClimateVariable::Svp,
};

enum class ClimateStat { Min = 0, Max = 1, Mean = 2, Std = 3 };
inline constexpr std::size_t kStatsPerMonth = 4;

std::string_view to_string(ClimateVariable v) noexcept;
ClimateVariable climate_variable_from_string(std::string_view name);
std::string_view to_string(ClimateStat s) noexcept;

struct FeatureSchema {
  std::vector<ClimateVariable> variables;
  std::vector<int> months;  // 1..12, ascending

  /// All nine variables over April through September.
  static FeatureSchema default_schema();

  std::size_t size() const noexcept {
    return variables.size() * months.size() * kStatsPerMonth;
  }
  /// Throws DomainError for a variable or month outside the schema.
  std::size_t index(ClimateVariable v, int month, ClimateStat stat) const;
  std::vector<std::string> feature_names() const;
  void validate() const;

  bool operator==(const FeatureSchema&) const = default;
};

struct ClimateFeatureSet {
  Geohash geohash4;
  int year = 0;
  std::vector<double> features;

  bool has_missing() const noexcept;
};

struct DailyObservation {
  int year = 0;
  int month = 0;
  int day = 0;
  double value = 0.0;
};

// Daily values for one geohash over one season (a single year), keyed by variable.
using DailySeries = std::map<ClimateVariable, std::vector<DailyObservation>>;

enum class MissingPolicy {
  Fail,      // an empty (variable, month) cell throws MissingDataError
  Sentinel,  // leave NaN in place; see impute_missing()
};

/// Raw (absolute) min/max/mean/std of daily values for each schema cell.
ClimateFeatureSet monthly_stats(const Geohash& geohash4, int year, const DailySeries& daily,
                                const FeatureSchema& schema,
                                MissingPolicy policy = MissingPolicy::Fail);

// Per-geohash baseline: for each feature, the mean of that raw statistic over
// the reference years.
struct ClimateBaseline {
  std::map<std::string, std::vector<double>> by_geohash;

  const std::vector<double>& at(const Geohash& g) const;
};

ClimateBaseline build_climate_baseline(std::span<const ClimateFeatureSet> raw,
                                       std::span<const int> reference_years);

/// Monthly stats expressed as deltas from `baseline`.
ClimateFeatureSet summarize_climate(const Geohash& geohash4, int year, const DailySeries& daily,
                                    const FeatureSchema& schema, const ClimateBaseline& baseline,
                                    MissingPolicy policy = MissingPolicy::Fail);

/// Replaces NaN cells by the mean of that feature over the non-missing sets.
/// Intended for exploratory runs only.
void impute_missing(std::vector<ClimateFeatureSet>& sets);

enum class ScenarioId {
  Historic,
  Counterfactual2030,
  Ssp245_2030,
  Counterfactual2050,
  Ssp245_2050,
};

std::string_view to_string(ScenarioId id) noexcept;
ScenarioId scenario_from_string(std::string_view name);  // throws ConfigError
std::optional<ScenarioId> try_scenario_from_string(std::string_view name) noexcept;
int series_year(ScenarioId id) noexcept;  // 0 for Historic
bool is_counterfactual(ScenarioId id) noexcept;
/// Counterfactual partner of an SSP245 series (identity for counterfactuals).
ScenarioId counterfactual_of(ScenarioId id);
std::string_view scenario_label(ScenarioId id) noexcept;  // "SSP245", "Counterfactual", "Historic"

struct ScenarioSeries {
  ScenarioId id = ScenarioId::Historic;
  std::vector<ClimateFeatureSet> climate;
};

// Everything the engine needs about climate: the feature schema plus one
// entry per scenario series.
struct ClimateBundle {
  FeatureSchema schema;
  std::vector<ScenarioSeries> series;

  const ScenarioSeries* find(ScenarioId id) const noexcept;
};

}  // namespace yieldrisk
