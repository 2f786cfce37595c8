// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Neighborhood regressor: predicts (mean, std) of unit yield deltas from a
// RegressionRow's inputs. Wraps the Mlp with input standardization, attribute
// masking, early-stopped training and residual bookkeeping.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "yieldrisk/climate.hpp"
#include "yieldrisk/dataset.hpp"
#include "yieldrisk/network.hpp"

namespace yieldrisk {

inline const std::vector<int> kLayerMenu = {512, 256, 128, 64, 32, 8};
inline constexpr int kModelSchemaVersion = 1;

struct RegressorConfig {
  std::vector<int> layer_sizes = {64, 32, 8};
  double dropout = 0.0;
  double l2 = 0.0;
  std::string dropped_attribute = "none";
  uint64_t seed = 0;

  /// Last `n` entries of kLayerMenu.
  static std::vector<int> layers_for_count(int n);
  static RegressorConfig from_layer_count(int n, double dropout, double l2,
                                          std::string dropped_attribute = "none", uint64_t seed = 0);

  void validate() const;
  std::string label() const;  // e.g. "L3/d0.05/l2=0.1/drop=vpd"
};

struct TrainOptions {
  int max_epochs = 200;
  int patience = 20;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double weight_decay = 0.004;
  // > 0: train exactly this many epochs with no early stopping (final retrain).
  int fixed_epochs = 0;
};

struct Normalization {
  std::vector<double> location;
  std::vector<double> scale;
};

struct ErrorMetrics {
  double mae_mean = 0.0;
  double mae_std = 0.0;
  std::size_t n = 0;
};

struct Residuals {
  std::vector<double> mean_residuals;  // observed - predicted
  std::vector<double> std_residuals;
};

struct Prediction {
  double mean_pred = 0.0;
  double std_pred = 0.0;
};

class TrainedRegressor {
 public:
  TrainedRegressor() = default;
  TrainedRegressor(RegressorConfig config, FeatureSchema schema, Normalization norm, Mlp net);

  const RegressorConfig& config() const noexcept { return config_; }
  const FeatureSchema& schema() const noexcept { return schema_; }
  const Normalization& normalization() const noexcept { return norm_; }
  const Mlp& network() const noexcept { return net_; }
  Mlp& network() noexcept { return net_; }
  std::size_t input_size() const noexcept { return schema_.size() + kExtraInputs; }

  /// `inputs` laid out as RegressionRow::inputs(). Throws ShapeError on length mismatch.
  Prediction predict(std::span<const double> inputs) const;
  Prediction predict(const RegressionRow& row) const;
  std::vector<Prediction> predict_batch(std::span<const RegressionRow> rows) const;

  /// Standardized, attribute-masked design matrix (inputs x rows).
  Eigen::MatrixXd design(std::span<const RegressionRow> rows) const;

  Residuals residuals;
  std::vector<std::pair<std::string, ErrorMetrics>> metrics;  // split name -> metrics
  int best_epoch = 0;
  std::vector<double> train_loss_history;
  std::vector<double> val_mae_history;

 private:
  void standardize(std::span<const double> in, double* out) const;

  RegressorConfig config_;
  FeatureSchema schema_;
  Normalization norm_;
  std::vector<std::size_t> masked_;
  Mlp net_;
};

/// Per-feature mean/std over the rows; zero-variance features get scale 1.
Normalization fit_normalization(std::span<const RegressionRow> rows, std::size_t input_size);

/// Throws TrainingDivergence if the loss becomes non-finite.
TrainedRegressor train(const RegressorConfig& config, const FeatureSchema& schema,
                       std::span<const RegressionRow> train_rows,
                       std::span<const RegressionRow> val_rows, const TrainOptions& options = {});

ErrorMetrics evaluate(const TrainedRegressor& model, std::span<const RegressionRow> rows);
Residuals extract_residuals(const TrainedRegressor& model, std::span<const RegressionRow> rows);

void save_model(std::ostream& out, const TrainedRegressor& model);
TrainedRegressor load_model(std::istream& in);
void save_model_file(const std::string& path, const TrainedRegressor& model);
TrainedRegressor load_model_file(const std::string& path);

}  // namespace yieldrisk
