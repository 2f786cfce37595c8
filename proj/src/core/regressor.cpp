// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "csv_util.hpp"
#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

using json = nlohmann::json;

Eigen::MatrixXd targets_of(std::span<const RegressionRow> rows) {
  Eigen::MatrixXd t(2, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t(0, static_cast<Eigen::Index>(i)) = rows[i].target_mean;
    t(1, static_cast<Eigen::Index>(i)) = rows[i].target_std;
  }
  return t;
}

ErrorMetrics metrics_from(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  ErrorMetrics m;
  m.n = static_cast<std::size_t>(pred.cols());
  if (m.n == 0) return m;
  m.mae_mean = (pred.row(0) - target.row(0)).cwiseAbs().mean();
  m.mae_std = (pred.row(1) - target.row(1)).cwiseAbs().mean();
  return m;
}

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<int> RegressorConfig::layers_for_count(int n) {
  if (n < 1 || n > static_cast<int>(kLayerMenu.size())) {
    throw ConfigError("layer count must be in 1.." + std::to_string(kLayerMenu.size()) + ", got " +
                      std::to_string(n));
  }
  return {kLayerMenu.end() - n, kLayerMenu.end()};
}

RegressorConfig RegressorConfig::from_layer_count(int n, double dropout, double l2,
                                                  std::string dropped_attribute, uint64_t seed) {
  RegressorConfig c;
  c.layer_sizes = layers_for_count(n);
  c.dropout = dropout;
  c.l2 = l2;
  c.dropped_attribute = std::move(dropped_attribute);
  c.seed = seed;
  return c;
}

void RegressorConfig::validate() const {
  if (layer_sizes.empty()) throw ConfigError("layer_sizes must be nonempty");
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (layer_sizes[i] < 1) throw ConfigError("layer sizes must be positive");
    if (i > 0 && layer_sizes[i] >= layer_sizes[i - 1]) {
      throw ConfigError("layer_sizes must be strictly decreasing");
    }
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("l2 must be >= 0");
}

std::string RegressorConfig::label() const {
  return "L" + std::to_string(layer_sizes.size()) + "/d" + trim_number(dropout) +
         "/l2=" + trim_number(l2) + "/drop=" + dropped_attribute;
}

TrainedRegressor::TrainedRegressor(RegressorConfig config, FeatureSchema schema, Normalization norm,
                                   Mlp net)
    : config_(std::move(config)), schema_(std::move(schema)), norm_(std::move(norm)),
      net_(std::move(net)) {
  masked_ = attribute_columns(schema_, config_.dropped_attribute);
  if (norm_.location.size() != input_size() || norm_.scale.size() != input_size() ||
      net_.input_size() != input_size()) {
    throw ShapeError("model parts disagree on input size");
  }
}

void TrainedRegressor::standardize(std::span<const double> in, double* out) const {
  if (in.size() != input_size()) {
    throw ShapeError("expected " + std::to_string(input_size()) + " inputs, got " +
                     std::to_string(in.size()));
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - norm_.location[i]) / norm_.scale[i];
  for (auto c : masked_) out[c] = 0.0;
}

Eigen::MatrixXd TrainedRegressor::design(std::span<const RegressionRow> rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(input_size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto in = rows[i].inputs();
    standardize(in, x.col(static_cast<Eigen::Index>(i)).data());
  }
  return x;
}

Prediction TrainedRegressor::predict(std::span<const double> inputs) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(input_size()), 1);
  standardize(inputs, x.data());
  const auto out = net_.predict(x);
  return {out(0, 0), out(1, 0)};
}

Prediction TrainedRegressor::predict(const RegressionRow& row) const { return predict(row.inputs()); }

std::vector<Prediction> TrainedRegressor::predict_batch(std::span<const RegressionRow> rows) const {
  std::vector<Prediction> out;
  if (rows.empty()) return out;
  const auto p = net_.predict(design(rows));
  out.reserve(rows.size());
  for (Eigen::Index c = 0; c < p.cols(); ++c) out.push_back({p(0, c), p(1, c)});
  return out;
}

Normalization fit_normalization(std::span<const RegressionRow> rows, std::size_t input_size) {
  Normalization n;
  n.location.assign(input_size, 0.0);
  n.scale.assign(input_size, 1.0);
  if (rows.empty()) return n;
  std::vector<double> sum(input_size, 0.0), sq(input_size, 0.0);
  for (const auto& r : rows) {
    const auto x = r.inputs();
    if (x.size() != input_size) throw ShapeError("row input length does not match schema");
    for (std::size_t i = 0; i < input_size; ++i) sum[i] += x[i];
  }
  const double count = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < input_size; ++i) n.location[i] = sum[i] / count;
  for (const auto& r : rows) {
    const auto x = r.inputs();
    for (std::size_t i = 0; i < input_size; ++i) sq[i] += (x[i] - n.location[i]) * (x[i] - n.location[i]);
  }
  for (std::size_t i = 0; i < input_size; ++i) {
    const double sd = std::sqrt(sq[i] / count);
    n.scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  return n;
}

TrainedRegressor train(const RegressorConfig& config, const FeatureSchema& schema,
                       std::span<const RegressionRow> train_rows,
                       std::span<const RegressionRow> val_rows, const TrainOptions& options) {
  config.validate();
  if (train_rows.empty()) throw ConfigError("training set is empty");
  if (options.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  const std::size_t inputs = schema.size() + kExtraInputs;

  TrainedRegressor model(config, schema, fit_normalization(train_rows, inputs),
                         Mlp(inputs, config.layer_sizes, config.seed));
  const Eigen::MatrixXd x = model.design(train_rows);
  const Eigen::MatrixXd t = targets_of(train_rows);
  const bool validate = !val_rows.empty() && options.fixed_epochs <= 0;
  Eigen::MatrixXd xv, tv;
  if (validate) {
    xv = model.design(val_rows);
    tv = targets_of(val_rows);
  }

  Mlp& net = model.network();
  AdamW opt(net, {options.learning_rate, 0.9, 0.999, 1e-8, options.weight_decay});
  Rng rng(derive_seed(config.seed, "train", 0));
  const auto n = static_cast<std::size_t>(x.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const int epochs = options.fixed_epochs > 0 ? options.fixed_epochs : options.max_epochs;
  std::vector<double> best_params = net.flatten();
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0, since_best = 0;
  std::vector<DenseLayer> grad;
  Eigen::MatrixXd xb, tb;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(options.batch_size), n - start);
      xb.resize(x.rows(), static_cast<Eigen::Index>(len));
      tb.resize(2, static_cast<Eigen::Index>(len));
      for (std::size_t j = 0; j < len; ++j) {
        xb.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(order[start + j]));
        tb.col(static_cast<Eigen::Index>(j)) = t.col(static_cast<Eigen::Index>(order[start + j]));
      }
      const auto masks = net.sample_masks(len, config.dropout, rng);
      const double loss =
          net.loss_and_gradient(xb, tb, config.l2, masks.empty() ? nullptr : &masks, &grad);
      if (!std::isfinite(loss)) {
        throw TrainingDivergence("training diverged at epoch " + std::to_string(epoch) +
                                 " (" + config.label() + ")");
      }
      opt.step(net, grad);
      epoch_loss += loss;
      ++batches;
    }
    model.train_loss_history.push_back(epoch_loss / static_cast<double>(batches));

    if (!validate) {
      best_epoch = epoch;
      continue;
    }
    const double val = metrics_from(net.predict(xv), tv).mae_mean;
    if (!std::isfinite(val)) {
      throw TrainingDivergence("validation loss diverged at epoch " + std::to_string(epoch));
    }
    model.val_mae_history.push_back(val);
    if (val < best_val) {
      best_val = val;
      best_epoch = epoch;
      best_params = net.flatten();
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  if (validate) net.unflatten(best_params);
  model.best_epoch = best_epoch;

  model.metrics.emplace_back("train", evaluate(model, train_rows));
  if (!val_rows.empty()) model.metrics.emplace_back("validation", evaluate(model, val_rows));
  return model;
}

ErrorMetrics evaluate(const TrainedRegressor& model, std::span<const RegressionRow> rows) {
  if (rows.empty()) return {};
  return metrics_from(model.network().predict(model.design(rows)), targets_of(rows));
}

Residuals extract_residuals(const TrainedRegressor& model, std::span<const RegressionRow> rows) {
  Residuals r;
  const auto preds = model.predict_batch(rows);
  r.mean_residuals.reserve(rows.size());
  r.std_residuals.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.mean_residuals.push_back(rows[i].target_mean - preds[i].mean_pred);
    r.std_residuals.push_back(rows[i].target_std - preds[i].std_pred);
  }
  return r;
}

// ---- serialization ----

void save_model(std::ostream& out, const TrainedRegressor& model) {
  const auto& c = model.config();
  json j;
  j["format"] = "yieldrisk-model";
  j["schema_version"] = kModelSchemaVersion;
  j["config"] = {{"layer_sizes", c.layer_sizes},
                 {"dropout", c.dropout},
                 {"l2", c.l2},
                 {"dropped_attribute", c.dropped_attribute},
                 {"seed", c.seed}};
  json schema;
  schema["variables"] = json::array();
  for (auto v : model.schema().variables) schema["variables"].push_back(std::string(to_string(v)));
  schema["months"] = model.schema().months;
  j["feature_schema"] = schema;
  j["normalization"] = {{"location", model.normalization().location},
                        {"scale", model.normalization().scale}};
  json layers = json::array();
  for (const auto& l : model.network().layers()) {
    std::vector<double> w(l.weight.data(), l.weight.data() + l.weight.size());
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"weight", w}, {"bias", b}});
  }
  j["layers"] = layers;
  j["residuals"] = {{"mean", model.residuals.mean_residuals}, {"std", model.residuals.std_residuals}};
  json metrics = json::object();
  for (const auto& [name, m] : model.metrics) {
    metrics[name] = {{"mae_mean", m.mae_mean}, {"mae_std", m.mae_std}, {"n", m.n}};
  }
  j["metrics"] = metrics;
  j["best_epoch"] = model.best_epoch;
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing model");
}

TrainedRegressor load_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "yieldrisk-model") throw SchemaError("not a yieldrisk model file");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw SchemaError("model schema_version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kModelSchemaVersion) + ")");
    }
    RegressorConfig c;
    const auto& jc = j.at("config");
    c.layer_sizes = jc.at("layer_sizes").get<std::vector<int>>();
    c.dropout = jc.at("dropout").get<double>();
    c.l2 = jc.at("l2").get<double>();
    c.dropped_attribute = jc.at("dropped_attribute").get<std::string>();
    c.seed = jc.at("seed").get<uint64_t>();
    c.validate();

    FeatureSchema schema;
    for (const auto& v : j.at("feature_schema").at("variables")) {
      schema.variables.push_back(climate_variable_from_string(v.get<std::string>()));
    }
    schema.months = j.at("feature_schema").at("months").get<std::vector<int>>();
    schema.validate();

    Normalization norm{j.at("normalization").at("location").get<std::vector<double>>(),
                       j.at("normalization").at("scale").get<std::vector<double>>()};

    const std::size_t inputs = schema.size() + kExtraInputs;
    Mlp net(inputs, c.layer_sizes, 0);
    auto& layers = net.layers();
    const auto& jl = j.at("layers");
    if (jl.size() != layers.size()) throw SchemaError("model layer count does not match config");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto w = jl[i].at("weight").get<std::vector<double>>();
      const auto b = jl[i].at("bias").get<std::vector<double>>();
      if (jl[i].at("rows").get<Eigen::Index>() != layers[i].weight.rows() ||
          jl[i].at("cols").get<Eigen::Index>() != layers[i].weight.cols() ||
          w.size() != static_cast<std::size_t>(layers[i].weight.size()) ||
          b.size() != static_cast<std::size_t>(layers[i].bias.size())) {
        throw SchemaError("layer " + std::to_string(i) + " has unexpected shape");
      }
      std::copy(w.begin(), w.end(), layers[i].weight.data());
      std::copy(b.begin(), b.end(), layers[i].bias.data());
    }

    TrainedRegressor model(std::move(c), std::move(schema), std::move(norm), std::move(net));
    if (j.contains("residuals")) {
      model.residuals.mean_residuals = j["residuals"].at("mean").get<std::vector<double>>();
      model.residuals.std_residuals = j["residuals"].at("std").get<std::vector<double>>();
    }
    if (j.contains("metrics")) {
      for (const auto& [name, m] : j["metrics"].items()) {
        model.metrics.emplace_back(name, ErrorMetrics{m.at("mae_mean").get<double>(),
                                                      m.at("mae_std").get<double>(),
                                                      m.at("n").get<std::size_t>()});
      }
    }
    model.best_epoch = j.value("best_epoch", 0);
    return model;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw SchemaError(std::string("inconsistent model file: ") + e.what());
  }
}

void save_model_file(const std::string& path, const TrainedRegressor& model) {
  auto out = detail::open_output(path);
  save_model(out, model);
}

TrainedRegressor load_model_file(const std::string& path) {
  auto in = detail::open_input(path);
  return load_model(in);
}

}  // namespace yieldrisk
