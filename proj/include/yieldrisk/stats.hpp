// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace yieldrisk::stats {

enum class MwuMethod {
  // Exact conditional distribution when n1 + n2 <= kExactMwuLimit, otherwise
  // the tie- and continuity-corrected normal approximation.
  Auto,
  Asymptotic,
  Exact,
};

inline constexpr std::size_t kExactMwuLimit = 50;

struct MwuResult {
  double u_statistic = 0.0;  // U for the first sample
  double p_value = 1.0;      // two-sided
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  MwuMethod method = MwuMethod::Asymptotic;  // method actually used
};

/// Two-sided Mann-Whitney U test with midrank tie handling. When every value
/// in both samples is identical the result is p = 1.
MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                         MwuMethod method = MwuMethod::Auto);

/// alpha / n_tests.
double bonferroni_threshold(double alpha, std::size_t n_tests);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, Student t approximation with n-2 dof
  std::size_t n = 0;
};

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

double normal_cdf(double z) noexcept;

}  // namespace yieldrisk::stats
