// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Train/validation/test partitions of regression rows.
//
//   SweepTemporal  train 1999-2012, validation {2014, 2016}, test {2013, 2015}
//   Temporal       train 1999-2013, test 2014-2016
//   Spatial        whole 3-char regions: a seeded 75% to train, the rest to test
//   Random         seeded 75/25 over (year, geohash) rows
//
// Rows from years a temporal split does not name go to `unassigned`, so the
// four parts always cover the input.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "yieldrisk/dataset.hpp"

namespace yieldrisk {

enum class SplitKind { SweepTemporal, Temporal, Spatial, Random };

std::string_view to_string(SplitKind k) noexcept;
SplitKind split_kind_from_string(std::string_view name);  // throws ConfigError

struct SplitSpec {
  SplitKind kind = SplitKind::SweepTemporal;
  std::vector<int> train_years;
  std::vector<int> validation_years;
  std::vector<int> test_years;
  double train_fraction = 0.75;
  uint64_t seed = 0;

  static SplitSpec sweep_temporal();
  static SplitSpec temporal();
  static SplitSpec spatial(uint64_t seed);
  static SplitSpec random(uint64_t seed);
  static SplitSpec of_kind(SplitKind kind, uint64_t seed = 0);
};

struct Split {
  std::vector<RegressionRow> train;
  std::vector<RegressionRow> validation;
  std::vector<RegressionRow> test;
  std::vector<RegressionRow> unassigned;
};

/// Throws SplitError when the data is empty, a named validation/test year has
/// no rows, or a part that must be nonempty comes out empty.
Split make_split(const SplitSpec& spec, std::span<const RegressionRow> rows);

}  // namespace yieldrisk
