// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/network.hpp"

#include <cmath>

#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }

Eigen::MatrixXd leaky(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

}  // namespace

double softplus(double z) noexcept {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

Mlp::Mlp(std::size_t inputs, const std::vector<int>& hidden, uint64_t seed) {
  Rng rng(derive_seed(seed, "mlp-init", 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t fan_in = inputs;
  auto add_layer = [&](std::size_t outputs, double gain) {
    DenseLayer layer;
    layer.weight.resize(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(fan_in));
    const double scale = std::sqrt(gain / static_cast<double>(fan_in));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = scale * normal(rng);
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputs));
    layers_.push_back(std::move(layer));
    fan_in = outputs;
  };
  for (int units : hidden) {
    if (units < 1) throw ConfigError("hidden layer sizes must be positive");
    add_layer(static_cast<std::size_t>(units), 2.0);
  }
  add_layer(2, 1.0);
}

std::size_t Mlp::input_size() const noexcept {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::MatrixXd Mlp::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_size()) {
    throw ShapeError("network expects " + std::to_string(input_size()) + " inputs, got " +
                     std::to_string(x.rows()));
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    a = leaky(z);
  }
  Eigen::MatrixXd out = layers_.back().weight * a;
  out.colwise() += layers_.back().bias;
  for (Eigen::Index c = 0; c < out.cols(); ++c) out(1, c) = softplus(out(1, c));
  return out;
}

double Mlp::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets, double l2,
                              const DropoutMasks* masks, std::vector<DenseLayer>* grad) const {
  const auto batch = x.cols();
  if (static_cast<std::size_t>(x.rows()) != input_size() || targets.rows() != 2 ||
      targets.cols() != batch || batch == 0) {
    throw ShapeError("loss_and_gradient: inconsistent batch shapes");
  }
  const std::size_t hidden = hidden_layers();
  if (masks && masks->size() != hidden) throw ShapeError("dropout masks do not match hidden layers");

  // Forward, keeping pre-activations and layer inputs for backprop.
  std::vector<Eigen::MatrixXd> inputs(layers_.size());
  std::vector<Eigen::MatrixXd> pre(hidden);
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < hidden; ++l) {
    inputs[l] = a;
    pre[l] = layers_[l].weight * a;
    pre[l].colwise() += layers_[l].bias;
    a = leaky(pre[l]);
    if (masks) a = a.cwiseProduct((*masks)[l]);
  }
  inputs[hidden] = a;
  Eigen::MatrixXd out = layers_.back().weight * a;
  out.colwise() += layers_.back().bias;

  const double inv_batch = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  Eigen::MatrixXd d_out(2, batch);
  for (Eigen::Index c = 0; c < batch; ++c) {
    const double mean = out(0, c);
    const double sd = softplus(out(1, c));
    loss += std::abs(mean - targets(0, c)) + std::abs(sd - targets(1, c));
    d_out(0, c) = sign(mean - targets(0, c)) * inv_batch;
    d_out(1, c) = sign(sd - targets(1, c)) * inv_batch * sigmoid(out(1, c));
  }
  loss *= inv_batch;
  for (std::size_t l = 0; l < hidden; ++l) loss += l2 * layers_[l].weight.squaredNorm();

  if (!grad) return loss;
  grad->resize(layers_.size());
  Eigen::MatrixXd delta = d_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& g = (*grad)[l];
    g.weight = delta * inputs[l].transpose();
    g.bias = delta.rowwise().sum();
    if (l < hidden) g.weight += 2.0 * l2 * layers_[l].weight;
    if (l == 0) break;
    Eigen::MatrixXd da = layers_[l].weight.transpose() * delta;
    const std::size_t below = l - 1;
    if (masks) da = da.cwiseProduct((*masks)[below]);
    delta = da.cwiseProduct(
        pre[below].unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; }));
  }
  return loss;
}

DropoutMasks Mlp::sample_masks(std::size_t batch, double rate, Rng& rng) const {
  DropoutMasks masks;
  if (rate <= 0.0) return masks;
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t l = 0; l < hidden_layers(); ++l) {
    Eigen::MatrixXd m(layers_[l].weight.rows(), static_cast<Eigen::Index>(batch));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = keep(rng) ? scale : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void Mlp::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) throw ShapeError("parameter vector has wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    std::copy_n(params.data() + k, l.weight.size(), l.weight.data());
    k += static_cast<std::size_t>(l.weight.size());
    std::copy_n(params.data() + k, l.bias.size(), l.bias.data());
    k += static_cast<std::size_t>(l.bias.size());
  }
}

AdamW::AdamW(const Mlp& net, Options options) : options_(options) {
  for (const auto& l : net.layers()) {
    m_.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                  Eigen::VectorXd::Zero(l.bias.size())});
  }
  v_ = m_;
}

void AdamW::step(Mlp& net, const std::vector<DenseLayer>& grad) {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weight;
    auto& b = layers[l].bias;
    m_[l].weight = b1 * m_[l].weight + (1.0 - b1) * grad[l].weight;
    v_[l].weight = b2 * v_[l].weight + (1.0 - b2) * grad[l].weight.cwiseAbs2();
    m_[l].bias = b1 * m_[l].bias + (1.0 - b1) * grad[l].bias;
    v_[l].bias = b2 * v_[l].bias + (1.0 - b2) * grad[l].bias.cwiseAbs2();

    w.array() -= lr * options_.weight_decay * w.array();
    w.array() -= lr * (m_[l].weight.array() / c1) /
                 ((v_[l].weight.array() / c2).sqrt() + eps);
    b.array() -= lr * (m_[l].bias.array() / c1) / ((v_[l].bias.array() / c2).sqrt() + eps);
  }
}

}  // namespace yieldrisk
