// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo simulation of insured units.
//
// For each neighborhood-year the regressor's (mean, std) prediction is
// perturbed by resampled held-out residuals, a unit size is drawn, and the
// unit's yield delta is the average of k Normal(mean', std') draws, one per
// 1 km sample cell the unit covers. The coverage policy then decides claim and
// severity. Every neighborhood-year owns an RNG substream keyed by
// (seed, geohash, year), so results do not depend on scheduling or on which
// other neighborhoods are simulated.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yieldrisk/climate.hpp"
#include "yieldrisk/coverage.hpp"
#include "yieldrisk/dataset.hpp"
#include "yieldrisk/regressor.hpp"
#include "yieldrisk/summary.hpp"
#include "yieldrisk/unit_size.hpp"

namespace yieldrisk {

inline constexpr int kDefaultTrials = 10000;
inline constexpr double kOptionalUnitQuantile = 0.25;

enum class UnitSizePolicy { HistoricDraw, SingleField, OptionalUnitsRemoved };
enum class DeltaSampler { Normal, Bootstrap };
// What the per-neighborhood significance test compares between scenarios.
enum class CompareOn { Claims, YieldDelta };

std::string_view to_string(UnitSizePolicy p) noexcept;
UnitSizePolicy unit_size_policy_from_string(std::string_view name);
std::string_view to_string(DeltaSampler s) noexcept;
DeltaSampler delta_sampler_from_string(std::string_view name);
std::string_view to_string(CompareOn c) noexcept;
CompareOn compare_on_from_string(std::string_view name);

struct ScenarioSpec {
  ScenarioId scenario = ScenarioId::Historic;
  CoveragePolicy coverage;
  int trials = kDefaultTrials;
  UnitSizePolicy unit_size_policy = UnitSizePolicy::HistoricDraw;
  UnitSizeTable size_table = UnitSizeTable::default_table();
  double sample_granularity_km = 1.0;
  int samples_per_unit = 0;  // > 0 overrides the size policy with a fixed k
  DeltaSampler sampler = DeltaSampler::Normal;
  uint64_t seed = 0;
  int threads = 1;  // <= 0: hardware concurrency

  void validate() const;
};

struct NeighborhoodInput {
  Geohash geohash4;
  int year = 0;
  double acres = 0.0;
  Prediction pred;
};

struct UnitTrial {
  double y_delta = 0.0;
  LossOutcome outcome;
};

/// One unit-year. `shape_pool` (standardized deltas) is used only by the
/// bootstrap sampler. Throws ConfigError on empty residual pools.
UnitTrial simulate_unit_trial(const Prediction& pred, const Residuals& pools, int unit_samples,
                              const CoveragePolicy& coverage, Rng& rng,
                              DeltaSampler sampler = DeltaSampler::Normal,
                              std::span<const double> shape_pool = {});

struct NeighborhoodOutcome {
  Geohash geohash4;
  int year = 0;
  double acres = 0.0;
  double mean_pred = 0.0;
  double std_pred = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_claims = 0;
  double claims_rate = 0.0;
  double mean_severity_given_claim = 0.0;  // over claim trials only
  double mean_yield_change = 0.0;
  std::optional<double> p_value;  // set by compare_scenarios
  bool significant_vs_counterfactual = false;

  std::vector<double> trial_deltas;  // per-trial y_delta, kept for tests and histograms
  std::vector<double> trial_claims;  // 0/1
};

struct ScenarioRun {
  ScenarioId scenario = ScenarioId::Historic;
  std::vector<NeighborhoodOutcome> outcomes;  // sorted by (geohash, year)
  std::vector<std::string> warnings;
};

/// Model predictions for every (neighborhood in history, year in series).
/// Neighborhood-years lacking complete climate features are skipped with a warning.
std::vector<NeighborhoodInput> predict_distributions(const TrainedRegressor& model,
                                                     const ScenarioSeries& series,
                                                     const NeighborhoodHistory& history,
                                                     std::vector<std::string>* warnings = nullptr);

ScenarioRun simulate_neighborhoods(const ScenarioSpec& spec, std::span<const NeighborhoodInput> inputs,
                                   const Residuals& pools, std::span<const double> shape_pool = {});

/// predict_distributions + simulate_neighborhoods using the model's residuals.
ScenarioRun run_scenario(const ScenarioSpec& spec, const TrainedRegressor& model,
                         const ScenarioSeries& series, const NeighborhoodHistory& history,
                         std::span<const double> shape_pool = {});

/// Per-unit deltas standardized within their neighborhood-year, for the bootstrap sampler.
std::vector<double> standardized_delta_pool(std::span<const UnitYieldRecord> records, int window);

// ---- comparison and aggregation ----

struct YearAggregate {
  ScenarioId scenario = ScenarioId::Historic;
  int year = 0;  // series year (2030 / 2050) or calendar year for historic runs
  double unit_mean_yield_change = 0.0;
  double unit_loss_probability = 0.0;
  double avg_covered_loss_severity = 0.0;  // conditional on a claim
  double acres = 0.0;
  std::size_t neighborhoods = 0;
};

/// Grouping year used in aggregates and histograms.
int aggregate_year(ScenarioId scenario, int calendar_year) noexcept;

/// Acreage-weighted means per aggregate year. Severity is weighted by
/// acres x claims_rate so it stays a per-claim average.
std::vector<YearAggregate> aggregate_outcomes(ScenarioId scenario,
                                              std::span<const NeighborhoodOutcome> outcomes);

struct ComparisonOptions {
  double alpha = 0.05;
  CompareOn compare_on = CompareOn::Claims;
};

struct SimulationReport {
  ScenarioId treatment = ScenarioId::Historic;
  ScenarioId counterfactual = ScenarioId::Historic;
  ComparisonOptions options;
  std::vector<NeighborhoodOutcome> treatment_outcomes;  // p_value / significance filled
  std::vector<NeighborhoodOutcome> counterfactual_outcomes;
  std::vector<YearAggregate> aggregates;  // treatment rows then counterfactual rows
  std::size_t n_tests = 0;
  double threshold = 0.0;  // alpha / n_tests
  std::vector<std::string> significant_neighborhoods;
  double pct_acreage_significant = 0.0;
  std::vector<std::string> warnings;
};

/// Throws ComparisonError unless both runs cover the same neighborhood-years.
SimulationReport compare_scenarios(const ScenarioRun& treatment, const ScenarioRun& counterfactual,
                                   const ComparisonOptions& options = {});

// ---- histograms ----

inline constexpr double kHistogramLow = -1.0;
inline constexpr double kHistogramHigh = 1.0;
inline constexpr double kHistogramWidth = 0.05;
inline constexpr std::size_t kHistogramBins = 40;

struct Histogram {
  ScenarioId scenario = ScenarioId::Historic;
  int year = 0;
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
  std::size_t total = 0;
};

/// Bins are [lo, hi) except the last, which also takes +1 exactly.
Histogram make_histogram(ScenarioId scenario, int year, std::span<const double> values);

/// One histogram of trial deltas per aggregate year.
std::vector<Histogram> outcome_histograms(ScenarioId scenario,
                                          std::span<const NeighborhoodOutcome> outcomes);

}  // namespace yieldrisk
