// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Yield Protection loss formulas and the variance-based coverage alternative.
// Yields are generic nonnegative reals; nothing here assumes bu/acre.

#pragma once

#include <span>
#include <string_view>

namespace yieldrisk {

enum class CoverageMode { PercentOfHistory, StdDevBased };

// Which threshold the StdDevBased mode uses. `MeanMinusSigmas` guarantees
// y_mu - c_sigma * y_sigma. `AsPrintedRatio` is the compatibility form
// c_sigma * y_mu / y_sigma, kept as an alternative.
enum class SigmaFormula { MeanMinusSigmas, AsPrintedRatio };

struct CoveragePolicy {
  CoverageMode mode = CoverageMode::PercentOfHistory;
  double c_pct = 0.75;
  double c_sigma = 2.11;
  int history_window = 10;
  SigmaFormula sigma_formula = SigmaFormula::MeanMinusSigmas;

  // Throws DomainError unless 0 < c_pct <= 1, c_sigma >= 0, window >= 1.
  void validate() const;

  static CoveragePolicy percent(double c_pct, int window = 10);
  static CoveragePolicy std_dev(double c_sigma,
                                SigmaFormula formula = SigmaFormula::MeanMinusSigmas);
};

struct LossOutcome {
  double loss = 0.0;      // yield units below the guarantee, >= 0
  bool claim = false;     // loss > 0 (strict)
  double severity = 0.0;  // loss / expected yield
};

/// Mean of the most recent min(d, history.size()) yields.
double expected_yield(std::span<const double> history, int d);

/// l = max(c * y_expected - y_actual, 0), severity = l / y_expected.
LossOutcome yp_loss(const CoveragePolicy& policy, double y_expected, double y_actual);

/// Guarantee threshold for the variance-based mode under `policy.sigma_formula`.
double stddev_threshold(const CoveragePolicy& policy, double y_mu, double y_sigma);

/// l = max(threshold - y_actual, 0), severity = l / y_mu.
LossOutcome stddev_loss(const CoveragePolicy& policy, double y_mu, double y_sigma,
                        double y_actual);

/// c_sigma that puts the mean-minus-sigmas guarantee at the same yield as
/// the percent guarantee: mean - c_sigma * std == target_c_pct * mean.
double calibrate_c_sigma(double target_c_pct, double mean, double std_dev);

/// True iff y_delta_pct < c_pct - 1.
bool claims_indicator(double y_delta_pct, double c_pct) noexcept;

/// Dispatches on policy.mode. For PercentOfHistory, y_mu is the expected yield
/// and y_sigma is ignored.
/// Loss for a unit with expected yield 1 and realized delta `y_delta`
/// (actual = 1 + y_delta). `sigma_delta` is the unit's delta std, used only
/// by StdDevBased policies. Loss and severity coincide at unit scale.
LossOutcome delta_loss(const CoveragePolicy& policy, double y_delta, double sigma_delta);

LossOutcome policy_loss(const CoveragePolicy& policy, double y_mu, double y_sigma,
                        double y_actual);

std::string_view to_string(CoverageMode mode) noexcept;
CoverageMode coverage_mode_from_string(std::string_view name);
std::string_view to_string(SigmaFormula formula) noexcept;
SigmaFormula sigma_formula_from_string(std::string_view name);

}  // namespace yieldrisk
