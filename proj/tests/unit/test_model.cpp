// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "yieldrisk/error.hpp"
#include "yieldrisk/network.hpp"
#include "yieldrisk/regressor.hpp"
#include "yieldrisk/splits.hpp"
#include "yieldrisk/summary.hpp"
#include "yieldrisk/sweep.hpp"
#include "yieldrisk/synthetic.hpp"

using namespace yieldrisk;

namespace {

FeatureSchema small_schema() {
  FeatureSchema s;
  s.variables = {ClimateVariable::Precipitation, ClimateVariable::Tmax};
  s.months = {6, 7};
  return s;
}

// Rows from the noiseless generator on a small schema.
std::vector<RegressionRow> synthetic_rows(int neighborhoods, uint64_t seed, FeatureSchema schema = small_schema()) {
  SyntheticConfig cfg;
  cfg.n_neighborhoods = neighborhoods;
  cfg.seed = seed;
  cfg.schema = schema;
  cfg.informative_features = 4;
  const auto ds = generate_synthetic(cfg);
  const auto sums = summarize_records(ds.yields, 10);
  return build_regression_dataset(sums, ds.climate.find(ScenarioId::Historic)->climate, schema).rows;
}

std::vector<RegressionRow> random_rows(std::size_t n, const FeatureSchema& schema, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<RegressionRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].geohash4 = Geohash("9zqv");
    rows[i].year = 2000 + static_cast<int>(i % 10);
    rows[i].climate.resize(schema.size());
    for (auto& c : rows[i].climate) c = nd(rng);
    rows[i].z_mu = 0.01 * nd(rng);
    rows[i].z_sigma = 0.1;
  }
  return rows;
}

double batch_mae(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& y) {
  return (pred - y).cwiseAbs().sum() / static_cast<double>(y.cols());
}

}  // namespace

TEST_SUITE("regressor") {

TEST_CASE("zero network outputs zero mean and softplus(0) std") {
  Mlp net(5, {4, 2}, 1);
  auto p = net.flatten();
  std::fill(p.begin(), p.end(), 0.0);
  net.unflatten(p);
  const auto out = net.predict(Eigen::MatrixXd::Random(5, 3));
  for (Eigen::Index c = 0; c < 3; ++c) {
    CHECK(out(0, c) == 0.0);
    CHECK(out(1, c) == doctest::Approx(std::log(2.0)));
    CHECK(out(1, c) > 0.0);
  }
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(-800.0) >= 0.0);
}

TEST_CASE("inference is deterministic and std is never negative") {
  Mlp net(6, {8, 4}, 2);
  Eigen::MatrixXd x = 50.0 * Eigen::MatrixXd::Random(6, 40);
  const auto a = net.predict(x), b = net.predict(x);
  CHECK((a.array() == b.array()).all());
  CHECK((a.row(1).array() >= 0.0).all());
  Eigen::MatrixXd dup(6, 2);
  dup.col(0) = x.col(0);
  dup.col(1) = x.col(0);
  const auto d = net.predict(dup);
  CHECK(d(0, 0) == d(0, 1));
  CHECK_THROWS_AS(net.predict(Eigen::MatrixXd::Zero(5, 1)), ShapeError);
}

TEST_CASE("loss is batch-mean MAE over both heads plus hidden-weight L2") {
  Mlp net(4, {6, 3}, 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 7), y = Eigen::MatrixXd::Random(2, 7);
  const double mae = batch_mae(net.predict(x), y);
  CHECK(net.loss_and_gradient(x, y, 0.0, nullptr, nullptr) == doctest::Approx(mae).epsilon(1e-14));
  double sq = 0.0;
  for (std::size_t l = 0; l + 1 < net.layers().size(); ++l) sq += net.layers()[l].weight.squaredNorm();
  CHECK(net.loss_and_gradient(x, y, 0.3, nullptr, nullptr) == doctest::Approx(mae + 0.3 * sq).epsilon(1e-14));
}

TEST_CASE("leaky slope applies to negative pre-activations only") {
  Mlp net(1, {1}, 4);
  auto& L = net.layers();
  L[0].weight(0, 0) = 1.0;
  L[0].bias(0) = 0.0;
  L[1].weight.setZero();
  L[1].bias.setZero();
  L[1].weight(0, 0) = 1.0;
  Eigen::MatrixXd x(1, 2);
  x << -2.0, 3.0;
  const auto out = net.predict(x);
  CHECK(out(0, 0) == doctest::Approx(-2.0 * kLeakySlope));
  CHECK(out(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("parameters flatten and restore") {
  Mlp net(7, {5, 3}, 5);
  const auto p = net.flatten();
  CHECK(p.size() == net.parameter_count());
  CHECK(net.parameter_count() == 7 * 5 + 5 + 5 * 3 + 3 + 3 * 2 + 2);
  Mlp other(7, {5, 3}, 6);
  CHECK(other.flatten() != p);
  other.unflatten(p);
  CHECK(other.flatten() == p);
  CHECK_THROWS(other.unflatten(std::vector<double>(3, 0.0)));
}

TEST_CASE("dropout masks are inverted and off at rate zero") {
  Mlp net(4, {32, 8}, 7);
  Rng rng(1);
  CHECK(net.sample_masks(10, 0.0, rng).empty());
  const auto m = net.sample_masks(200, 0.5, rng);
  REQUIRE(m.size() == 2);
  std::set<double> values(m[0].data(), m[0].data() + m[0].size());
  CHECK(values == std::set<double>{0.0, 2.0});
  CHECK(m[0].mean() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("first AdamW step is lr * sign(g) plus decoupled decay") {
  Mlp net(3, {2}, 8);
  const auto before = net.layers();
  std::vector<DenseLayer> g = before;
  for (auto& l : g) {
    l.weight.setConstant(0.5);
    l.bias.setConstant(-0.25);
  }
  AdamW opt(net, {});
  opt.step(net, g);
  const double lr = 1e-3, wd = 0.004;
  for (std::size_t l = 0; l < before.size(); ++l) {
    for (Eigen::Index i = 0; i < before[l].weight.size(); ++i) {
      const double w = before[l].weight.data()[i];
      CHECK(net.layers()[l].weight.data()[i] == doctest::Approx(w - lr * wd * w - lr * 0.5 / (0.5 + 1e-8)));
    }
    for (Eigen::Index i = 0; i < before[l].bias.size(); ++i) {
      CHECK(net.layers()[l].bias(i) == doctest::Approx(before[l].bias(i) + lr * 0.25 / (0.25 + 1e-8)));
    }
  }
}

TEST_CASE("config menus and validation") {
  CHECK(RegressorConfig::layers_for_count(1) == std::vector<int>{8});
  CHECK(RegressorConfig::layers_for_count(3) == std::vector<int>{64, 32, 8});
  CHECK(RegressorConfig::layers_for_count(6) == std::vector<int>{512, 256, 128, 64, 32, 8});
  CHECK_THROWS_AS(RegressorConfig::layers_for_count(7), ConfigError);
  RegressorConfig c;
  c.layer_sizes = {8, 8};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.layer_sizes = {8};
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(RegressorConfig::from_layer_count(3, 0.05, 0.1, "vpd").label() == "L3/d0.05/l2=0.1/drop=vpd");
}

TEST_CASE("normalization is fit on the given rows") {
  const auto schema = small_schema();
  auto rows = random_rows(20, schema, 9);
  for (auto& r : rows) r.climate[0] = 3.0;  // zero variance column
  const auto n = fit_normalization(rows, schema.size() + kExtraInputs);
  CHECK(n.location[0] == 3.0);
  CHECK(n.scale[0] == 1.0);
  double mean = 0.0, ss = 0.0;
  for (const auto& r : rows) mean += r.climate[1] / 20.0;
  for (const auto& r : rows) ss += (r.climate[1] - mean) * (r.climate[1] - mean) / 20.0;
  CHECK(n.location[1] == doctest::Approx(mean));
  CHECK(n.scale[1] == doctest::Approx(std::sqrt(ss)));
}

TEST_CASE("constant targets fit to near zero error") {
  const auto schema = small_schema();
  auto rows = random_rows(200, schema, 10);
  for (auto& r : rows) {
    r.target_mean = 0.05;
    r.target_std = 0.1;
  }
  RegressorConfig cfg;
  cfg.layer_sizes = {8};
  TrainOptions opts;
  opts.max_epochs = 1500;
  opts.patience = 1500;
  opts.batch_size = 64;
  opts.learning_rate = 1e-2;
  const auto model = train(cfg, schema, rows, rows, opts);
  const auto m = evaluate(model, rows);
  CHECK(m.mae_mean <= 1e-3);
  CHECK(m.mae_std <= 1e-3);
}

TEST_CASE("training is reproducible for a seed") {
  const auto rows = synthetic_rows(6, 2);
  RegressorConfig cfg;
  cfg.layer_sizes = {16, 8};
  cfg.dropout = 0.1;
  cfg.seed = 42;
  TrainOptions opts;
  opts.max_epochs = 15;
  const auto a = train(cfg, small_schema(), rows, rows, opts);
  const auto b = train(cfg, small_schema(), rows, rows, opts);
  CHECK(a.network().flatten() == b.network().flatten());
  cfg.seed = 43;
  CHECK(train(cfg, small_schema(), rows, rows, opts).network().flatten() != a.network().flatten());
}

TEST_CASE("evaluate and residual sign convention") {
  const auto rows0 = synthetic_rows(4, 3);
  RegressorConfig cfg;
  cfg.layer_sizes = {8};
  TrainOptions opts;
  opts.max_epochs = 2;
  const auto model = train(cfg, small_schema(), rows0, rows0, opts);
  auto rows = rows0;
  for (auto& r : rows) {
    const auto p = model.predict(r);
    r.target_mean = p.mean_pred;
    r.target_std = p.std_pred;
  }
  auto m = evaluate(model, rows);
  CHECK(std::abs(m.mae_mean) < 1e-12);
  CHECK(std::abs(m.mae_std) < 1e-12);
  CHECK(m.n == rows.size());
  for (auto& r : rows) r.target_mean -= 0.05;  // model over-predicts by 0.05
  m = evaluate(model, rows);
  CHECK(m.mae_mean == doctest::Approx(0.05));
  const auto res = extract_residuals(model, rows);
  REQUIRE(res.mean_residuals.size() == rows.size());
  for (double v : res.mean_residuals) CHECK(v == doctest::Approx(-0.05));
  for (double v : res.std_residuals) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("model files round trip") {
  const auto rows = synthetic_rows(4, 4);
  auto cfg = RegressorConfig::from_layer_count(2, 0.0, 0.05, "precipitation", 3);
  TrainOptions opts;
  opts.max_epochs = 3;
  auto model = train(cfg, small_schema(), rows, rows, opts);
  model.residuals = extract_residuals(model, rows);
  model.metrics.emplace_back("validation", evaluate(model, rows));
  std::stringstream s;
  save_model(s, model);
  const auto back = load_model(s);
  CHECK(back.config().label() == model.config().label());
  CHECK(back.schema() == model.schema());
  CHECK(back.residuals.mean_residuals == model.residuals.mean_residuals);
  CHECK(back.best_epoch == model.best_epoch);
  for (const auto& r : rows) {
    CHECK(back.predict(r).mean_pred == model.predict(r).mean_pred);
    CHECK(back.predict(r).std_pred == model.predict(r).std_pred);
  }
  CHECK_THROWS_AS(model.predict(std::vector<double>(3, 0.0)), ShapeError);

  auto j = nlohmann::json::parse([&] {
    std::stringstream t;
    save_model(t, model);
    return t.str();
  }());
  j["schema_version"] = kModelSchemaVersion + 1;
  std::stringstream bad(j.dump());
  CHECK_THROWS_AS(load_model(bad), SchemaError);
  std::stringstream junk("not json");
  CHECK_THROWS_AS(load_model(junk), SchemaError);
}

TEST_CASE("dropped attributes do not influence predictions") {
  const auto schema = small_schema();
  const auto rows = synthetic_rows(4, 5);
  TrainOptions opts;
  opts.max_epochs = 3;
  const auto model = train(RegressorConfig::from_layer_count(1, 0, 0, "precipitation", 1), schema, rows, rows, opts);
  auto r = rows[0];
  const auto before = model.predict(r);
  for (auto c : attribute_columns(schema, "precipitation")) r.climate[c] += 10.0;
  CHECK(model.predict(r).mean_pred == before.mean_pred);
  r.climate[attribute_columns(schema, "tmax")[0]] += 10.0;
  CHECK(model.predict(r).mean_pred != before.mean_pred);
}

TEST_CASE("non-finite loss reports divergence with the epoch") {
  const auto schema = small_schema();
  auto rows = random_rows(30, schema, 11);
  rows[3].target_mean = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)train(RegressorConfig{}, schema, rows, rows);
    FAIL("expected divergence");
  } catch (const TrainingDivergence& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

}  // TEST_SUITE

TEST_SUITE("splits") {

std::vector<RegressionRow> grid_rows(const std::vector<std::string>& cells, int first, int last) {
  std::vector<RegressionRow> rows;
  for (const auto& c : cells)
    for (int y = first; y <= last; ++y) {
      RegressionRow r;
      r.geohash4 = Geohash(c);
      r.year = y;
      rows.push_back(r);
    }
  return rows;
}

TEST_CASE("sweep temporal split") {
  const auto rows = grid_rows({"9zqv", "9zqy", "dp8y"}, 1999, 2016);
  const auto s = make_split(SplitSpec::sweep_temporal(), rows);
  std::set<int> test, val, train;
  for (const auto& r : s.test) test.insert(r.year);
  for (const auto& r : s.validation) val.insert(r.year);
  for (const auto& r : s.train) train.insert(r.year);
  CHECK(test == std::set<int>{2013, 2015});
  CHECK(val == std::set<int>{2014, 2016});
  CHECK(*train.begin() == 1999);
  CHECK(*train.rbegin() == 2012);
  CHECK(s.test.size() == 6);
  CHECK(s.unassigned.empty());
}

TEST_CASE("temporal split") {
  const auto rows = grid_rows({"9zqv"}, 1999, 2016);
  const auto s = make_split(SplitSpec::temporal(), rows);
  CHECK(s.train.size() == 15);
  CHECK(s.test.size() == 3);
  CHECK(s.test.front().year == 2014);
  CHECK_THROWS_AS(make_split(SplitSpec::temporal(), grid_rows({"9zqv"}, 1999, 2014)), SplitError);
}

TEST_CASE("spatial split keeps regions whole") {
  const auto rows = grid_rows({"9zqv", "9zqy", "9zrb", "9zrc", "dp8y", "dp9b", "c2b0"}, 2000, 2002);
  const auto s = make_split(SplitSpec::spatial(3), rows);
  std::set<std::string> tr, te;
  for (const auto& r : s.train) tr.insert(r.geohash4.code().substr(0, 3));
  for (const auto& r : s.test) te.insert(r.geohash4.code().substr(0, 3));
  CHECK(tr.size() == 4);  // round(0.75 * 5 regions)
  CHECK(te.size() == 1);
  for (const auto& r : te) CHECK(tr.count(r) == 0);
  CHECK(s.train.size() + s.test.size() == rows.size());
}

TEST_CASE("spatial split with four regions is three to one") {
  const auto rows = grid_rows({"9zqv", "9zqy", "9zrb", "dp8y", "c2b0"}, 2000, 2001);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = make_split(SplitSpec::spatial(seed), rows);
    std::set<std::string> tr, te;
    for (const auto& r : s.train) tr.insert(r.geohash4.code().substr(0, 3));
    for (const auto& r : s.test) te.insert(r.geohash4.code().substr(0, 3));
    CHECK(tr.size() == 3);
    CHECK(te.size() == 1);
    for (const auto& r : te) CHECK(tr.count(r) == 0);
  }
  CHECK_THROWS_AS(make_split(SplitSpec::spatial(1), grid_rows({"9zqv", "9zqy"}, 2000, 2001)), SplitError);
}

TEST_CASE("random split is seeded") {
  const auto rows = grid_rows({"9zqv", "9zqy", "dp8y", "c2b0"}, 2000, 2009);
  const auto a = make_split(SplitSpec::random(5), rows), b = make_split(SplitSpec::random(5), rows);
  CHECK(a.train.size() == 30);
  CHECK(a.test.size() == 10);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].year == b.train[i].year);
    CHECK(a.train[i].geohash4 == b.train[i].geohash4);
  }
  const auto c = make_split(SplitSpec::random(6), rows);
  bool differs = false;
  for (std::size_t i = 0; i < a.test.size(); ++i)
    differs |= a.test[i].year != c.test[i].year || a.test[i].geohash4 != c.test[i].geohash4;
  CHECK(differs);
}

TEST_CASE("split kinds parse") {
  for (auto k : {SplitKind::SweepTemporal, SplitKind::Temporal, SplitKind::Spatial, SplitKind::Random})
    CHECK(split_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(split_kind_from_string("diagonal"), ConfigError);
}

}  // TEST_SUITE

TEST_SUITE("sweep") {

TEST_CASE("full grid has 1500 candidates") {
  const auto g = SweepGrid::full_default();
  CHECK(g.cardinality() == 6 * 5 * 5 * 10);
  const auto c = g.candidates();
  CHECK(c.size() == 1500);
  std::set<std::string> labels;
  for (const auto& r : c) labels.insert(r.label());
  CHECK(labels.size() == 1500);
}

TEST_CASE("grid JSON") {
  const auto g = sweep_grid_from_json(R"({"layer_counts": [1], "dropout": [0], "l2": [0, 0.1], "attribute_drops": ["none"]})");
  CHECK(g.cardinality() == 2);
  CHECK(sweep_grid_from_json(sweep_grid_to_json(g)).cardinality() == 2);
  CHECK_THROWS_AS(sweep_grid_from_json("[1]"), ConfigError);
  CHECK_THROWS_AS(sweep_grid_from_json(R"({"dropout": []})"), ConfigError);
}

TEST_CASE("ranking breaks ties by std error then size") {
  LeaderboardEntry a, b, c;
  a.validation = {0.1, 0.2, 1};
  b.validation = {0.1, 0.1, 1};
  c.validation = {0.1, 0.1, 1};
  b.parameters = 100;
  c.parameters = 50;
  CHECK(leaderboard_less(b, a));
  CHECK(leaderboard_less(c, b));
  LeaderboardEntry d = c;
  d.diverged = true;
  d.validation = {0.0, 0.0, 0};
  CHECK(leaderboard_less(a, d));
}

TEST_CASE("single candidate sweep, leaderboard files and retrain") {
  const auto rows = synthetic_rows(8, 6);
  const auto split = make_split(SplitSpec::sweep_temporal(), rows);
  SweepGrid g;
  g.layer_counts = {1};
  g.dropout = {0.0};
  g.l2 = {0.05};
  g.attribute_drops = {"none"};
  TrainOptions opts;
  opts.max_epochs = 10;
  const auto r = run_sweep(g, small_schema(), split, opts);
  REQUIRE(r.leaderboard.size() == 1);
  CHECK(r.winner().rank == 1);
  CHECK(r.winner().config.layer_sizes == std::vector<int>{8});

  std::stringstream s;
  write_leaderboard_json(s, r);
  const auto back = read_leaderboard_json(s);
  REQUIRE(back.leaderboard.size() == 1);
  CHECK(back.leaderboard[0].validation.mae_mean == r.leaderboard[0].validation.mae_mean);
  std::ostringstream c;
  write_leaderboard_csv(c, r);
  CHECK(c.str().rfind("rank,", 0) == 0);

  const auto rt = retrain_winner(r.winner(), small_schema(), split, opts);
  CHECK(rt.test_before.n == split.test.size());
  CHECK(rt.test_after.n == split.test.size());
}

TEST_CASE("leaderboard is sorted and multi-threaded runs agree") {
  const auto rows = synthetic_rows(8, 7);
  const auto split = make_split(SplitSpec::sweep_temporal(), rows);
  SweepGrid g;
  g.layer_counts = {1, 2};
  g.dropout = {0.0};
  g.l2 = {0.0, 0.05};
  g.attribute_drops = {"none", "year"};
  TrainOptions opts;
  opts.max_epochs = 8;
  const auto a = run_sweep(g, small_schema(), split, opts, 1);
  const auto b = run_sweep(g, small_schema(), split, opts, 3);
  REQUIRE(a.leaderboard.size() == 8);
  for (std::size_t i = 0; i < a.leaderboard.size(); ++i) {
    CHECK(a.leaderboard[i].rank == i + 1);
    CHECK(a.leaderboard[i].config.label() == b.leaderboard[i].config.label());
    CHECK(a.leaderboard[i].validation.mae_mean == b.leaderboard[i].validation.mae_mean);
    if (i) CHECK_FALSE(leaderboard_less(a.leaderboard[i], a.leaderboard[i - 1]));
  }
}

TEST_CASE("divergence is recorded, not fatal") {
  auto rows = synthetic_rows(6, 8);
  for (auto& r : rows) r.target_mean = std::numeric_limits<double>::quiet_NaN();
  const auto split = make_split(SplitSpec::sweep_temporal(), rows);
  SweepGrid g;
  g.layer_counts = {1};
  g.dropout = {0.0};
  g.l2 = {0.0};
  g.attribute_drops = {"none"};
  TrainOptions opts;
  opts.max_epochs = 2;
  const auto r = run_sweep(g, small_schema(), split, opts);
  REQUIRE(r.leaderboard.size() == 1);
  CHECK(r.leaderboard[0].diverged);
  CHECK(r.leaderboard[0].error.find("epoch") != std::string::npos);
  CHECK_THROWS_AS(r.winner(), TrainingDivergence);
}

TEST_CASE("unknown attribute in the grid is a config error") {
  SweepGrid g;
  g.attribute_drops = {"soil"};
  const auto rows = synthetic_rows(4, 9);
  const auto split = make_split(SplitSpec::sweep_temporal(), rows);
  CHECK_THROWS_AS(run_sweep(g, small_schema(), split), ConfigError);
}

}  // TEST_SUITE
