// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-output feed-forward network. Hidden layers use Leaky ReLU; the output
// layer is linear for the mean head and softplus for the std head, so the std
// prediction is nonnegative by construction.
//
// Matrices are column-major with one sample per column.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "yieldrisk/rng.hpp"

namespace yieldrisk {

inline constexpr double kLeakySlope = 0.01;

struct DenseLayer {
  Eigen::MatrixXd weight;  // outputs x inputs
  Eigen::VectorXd bias;
};

double softplus(double z) noexcept;

// Inverted-dropout masks, one per hidden layer (units x batch), entries 0 or
// 1 / (1 - rate).
using DropoutMasks = std::vector<Eigen::MatrixXd>;

class Mlp {
 public:
  Mlp() = default;
  /// He-initialized weights, zero biases.
  Mlp(std::size_t inputs, const std::vector<int>& hidden, uint64_t seed);

  std::size_t input_size() const noexcept;
  std::size_t hidden_layers() const noexcept { return layers_.empty() ? 0 : layers_.size() - 1; }
  std::size_t parameter_count() const noexcept;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Inference (no dropout). Returns 2 x batch: row 0 mean, row 1 std.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;

  /// Mean absolute error summed over both outputs, averaged over the batch,
  /// plus l2 * sum of squared hidden-layer weights. Fills `grad` (same shapes
  /// as layers()) when non-null. `masks` may be null for no dropout.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets, double l2,
                           const DropoutMasks* masks, std::vector<DenseLayer>* grad) const;

  DropoutMasks sample_masks(std::size_t batch, double rate, Rng& rng) const;

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);

 private:
  std::vector<DenseLayer> layers_;  // hidden layers then the output layer
};

// Decoupled weight-decay Adam. Decay applies to weights, not biases.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.004;
  };

  AdamW(const Mlp& net, Options options);
  void step(Mlp& net, const std::vector<DenseLayer>& grad);

 private:
  Options options_;
  std::vector<DenseLayer> m_, v_;
  long step_ = 0;
};

}  // namespace yieldrisk
