// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "yieldrisk/error.hpp"

namespace yieldrisk {

void CoveragePolicy::validate() const {
  if (!(c_pct > 0.0 && c_pct <= 1.0)) {
    throw DomainError("coverage c_pct must be in (0, 1], got " + std::to_string(c_pct));
  }
  if (!(c_sigma >= 0.0)) {
    throw DomainError("coverage c_sigma must be >= 0, got " + std::to_string(c_sigma));
  }
  if (history_window < 1) {
    throw DomainError("history window must be >= 1");
  }
}

CoveragePolicy CoveragePolicy::percent(double c_pct, int window) {
  CoveragePolicy p;
  p.mode = CoverageMode::PercentOfHistory;
  p.c_pct = c_pct;
  p.history_window = window;
  p.validate();
  return p;
}

CoveragePolicy CoveragePolicy::std_dev(double c_sigma, SigmaFormula formula) {
  CoveragePolicy p;
  p.mode = CoverageMode::StdDevBased;
  p.c_sigma = c_sigma;
  p.sigma_formula = formula;
  p.validate();
  return p;
}

double expected_yield(std::span<const double> history, int d) {
  if (history.empty()) throw DomainError("expected_yield: empty yield history");
  if (d < 1) throw DomainError("expected_yield: window d must be >= 1");
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(d), history.size());
  const auto recent = history.last(n);
  return std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(n);
}

LossOutcome yp_loss(const CoveragePolicy& policy, double y_expected, double y_actual) {
  policy.validate();
  if (!(y_expected > 0.0)) {
    throw DomainError("yp_loss: expected yield must be > 0 to compute severity");
  }
  if (!(y_actual >= 0.0)) throw DomainError("yp_loss: actual yield must be >= 0");
  // Evaluated in delta form: fl(c - 1) == -fl(1 - c), so severity > 0 holds
  // exactly when claims_indicator() does, including at the guarantee boundary.
  const double y_delta = (y_actual - y_expected) / y_expected;
  LossOutcome out;
  out.severity = std::max(-y_delta - (1.0 - policy.c_pct), 0.0);
  out.claim = out.severity > 0.0;
  out.loss = out.severity * y_expected;
  return out;
}

double stddev_threshold(const CoveragePolicy& policy, double y_mu, double y_sigma) {
  policy.validate();
  if (!(y_sigma >= 0.0)) throw DomainError("stddev_loss: y_sigma must be >= 0");
  if (!(y_mu > 0.0)) throw DomainError("stddev_loss: y_mu must be > 0");
  switch (policy.sigma_formula) {
    case SigmaFormula::MeanMinusSigmas:
      return y_mu - policy.c_sigma * y_sigma;
    case SigmaFormula::AsPrintedRatio:
      if (y_sigma == 0.0) {
        throw DomainError("stddev_loss: printed ratio form divides by y_sigma = 0");
      }
      return policy.c_sigma * y_mu / y_sigma;
  }
  return 0.0;
}

LossOutcome stddev_loss(const CoveragePolicy& policy, double y_mu, double y_sigma,
                        double y_actual) {
  const double threshold = stddev_threshold(policy, y_mu, y_sigma);
  if (!(y_actual >= 0.0)) throw DomainError("stddev_loss: actual yield must be >= 0");
  LossOutcome out;
  out.loss = std::max(threshold - y_actual, 0.0);
  out.claim = out.loss > 0.0;
  out.severity = out.claim ? out.loss / y_mu : 0.0;
  return out;
}

double calibrate_c_sigma(double target_c_pct, double mean, double std_dev) {
  if (!(target_c_pct > 0.0 && target_c_pct <= 1.0)) {
    throw DomainError("calibrate_c_sigma: target coverage must be in (0, 1]");
  }
  if (!(std_dev > 0.0)) throw DomainError("calibrate_c_sigma: std must be > 0");
  if (!(mean > 0.0)) throw DomainError("calibrate_c_sigma: mean must be > 0");
  return (1.0 - target_c_pct) * mean / std_dev;
}

bool claims_indicator(double y_delta_pct, double c_pct) noexcept {
  return y_delta_pct < c_pct - 1.0;
}

LossOutcome delta_loss(const CoveragePolicy& policy, double y_delta, double sigma_delta) {
  if (!(y_delta >= -1.0)) throw DomainError("delta_loss: y_delta must be >= -1");
  if (policy.mode == CoverageMode::StdDevBased) {
    return stddev_loss(policy, 1.0, sigma_delta, 1.0 + y_delta);
  }
  LossOutcome out;
  out.severity = std::max(-y_delta - (1.0 - policy.c_pct), 0.0);
  out.claim = out.severity > 0.0;
  out.loss = out.severity;
  return out;
}

LossOutcome policy_loss(const CoveragePolicy& policy, double y_mu, double y_sigma,
                        double y_actual) {
  if (policy.mode == CoverageMode::PercentOfHistory) {
    return yp_loss(policy, y_mu, y_actual);
  }
  return stddev_loss(policy, y_mu, y_sigma, y_actual);
}

std::string_view to_string(CoverageMode mode) noexcept {
  return mode == CoverageMode::PercentOfHistory ? "percent" : "stddev";
}

CoverageMode coverage_mode_from_string(std::string_view name) {
  if (name == "percent" || name == "PercentOfHistory") return CoverageMode::PercentOfHistory;
  if (name == "stddev" || name == "StdDevBased") return CoverageMode::StdDevBased;
  throw ConfigError("unknown coverage mode '" + std::string(name) + "'");
}

std::string_view to_string(SigmaFormula formula) noexcept {
  return formula == SigmaFormula::MeanMinusSigmas ? "mean_minus_sigmas" : "as_printed_ratio";
}

SigmaFormula sigma_formula_from_string(std::string_view name) {
  if (name == "mean_minus_sigmas") return SigmaFormula::MeanMinusSigmas;
  if (name == "as_printed_ratio") return SigmaFormula::AsPrintedRatio;
  throw ConfigError("unknown sigma formula '" + std::string(name) + "'");
}

}  // namespace yieldrisk
