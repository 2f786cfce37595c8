// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Grid search over regressor configurations.
//
// Candidates are ranked by validation MAE of the mean head, then of the std
// head, then by parameter count. A candidate that diverges is kept on the
// leaderboard (ranked last) rather than aborting the sweep.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "yieldrisk/regressor.hpp"
#include "yieldrisk/splits.hpp"

namespace yieldrisk {

struct SweepGrid {
  std::vector<int> layer_counts = {1, 2, 3, 4, 5, 6};
  std::vector<double> dropout = {0.00, 0.01, 0.05, 0.10, 0.50};
  std::vector<double> l2 = {0.00, 0.05, 0.10, 0.15, 0.20};
  std::vector<std::string> attribute_drops = default_attribute_drop_menu();
  uint64_t seed = 0;

  /// The full menus (1500 candidates).
  static SweepGrid full_default() { return {}; }

  std::size_t cardinality() const noexcept;
  std::vector<RegressorConfig> candidates() const;
  void validate() const;
};

/// Missing keys keep the full defaults. Throws ConfigError on bad values.
SweepGrid sweep_grid_from_json(const std::string& text);
std::string sweep_grid_to_json(const SweepGrid& grid);

struct LeaderboardEntry {
  RegressorConfig config;
  std::size_t rank = 0;  // 1-based
  ErrorMetrics train;
  ErrorMetrics validation;
  int best_epoch = 0;
  std::size_t parameters = 0;
  bool diverged = false;
  std::string error;
};

/// Ranking order used by the sweep.
bool leaderboard_less(const LeaderboardEntry& a, const LeaderboardEntry& b);

struct SweepResult {
  std::vector<LeaderboardEntry> leaderboard;  // ranked

  /// First non-diverged entry; throws TrainingDivergence if every candidate diverged.
  const LeaderboardEntry& winner() const;
};

/// Trains every candidate on split.train, scores on split.validation.
/// `threads` <= 0 means hardware concurrency. Results do not depend on it.
SweepResult run_sweep(const SweepGrid& grid, const FeatureSchema& schema, const Split& split,
                      const TrainOptions& options = {}, int threads = 1);

struct RetrainResult {
  TrainedRegressor model;    // trained on train + validation
  ErrorMetrics test_before;  // winner as selected (train only)
  ErrorMetrics test_after;   // after retrain
};

/// Retrains the winner on train + validation for its best epoch count and
/// scores both versions on split.test.
RetrainResult retrain_winner(const LeaderboardEntry& winner, const FeatureSchema& schema,
                             const Split& split, const TrainOptions& options = {});

void write_leaderboard_json(std::ostream& out, const SweepResult& result);
SweepResult read_leaderboard_json(std::istream& in);
void write_leaderboard_csv(std::ostream& out, const SweepResult& result);

}  // namespace yieldrisk
