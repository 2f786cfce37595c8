// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "csv_util.hpp"
#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

using json = nlohmann::json;

// Diverged entries sort last; NaN metrics never reach the comparison.
auto sort_key(const LeaderboardEntry& e) {
  return std::make_tuple(e.diverged, e.validation.mae_mean, e.validation.mae_std, e.parameters);
}

json entry_to_json(const LeaderboardEntry& e) {
  return {{"rank", e.rank},
          {"label", e.config.label()},
          {"layer_sizes", e.config.layer_sizes},
          {"dropout", e.config.dropout},
          {"l2", e.config.l2},
          {"dropped_attribute", e.config.dropped_attribute},
          {"seed", e.config.seed},
          {"train_mae_mean", e.train.mae_mean},
          {"train_mae_std", e.train.mae_std},
          {"val_mae_mean", e.validation.mae_mean},
          {"val_mae_std", e.validation.mae_std},
          {"best_epoch", e.best_epoch},
          {"parameters", e.parameters},
          {"diverged", e.diverged},
          {"error", e.error}};
}

}  // namespace

std::size_t SweepGrid::cardinality() const noexcept {
  return layer_counts.size() * dropout.size() * l2.size() * attribute_drops.size();
}

void SweepGrid::validate() const {
  if (cardinality() == 0) throw ConfigError("sweep grid is empty");
  for (int n : layer_counts) RegressorConfig::layers_for_count(n);
  for (double d : dropout) {
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("sweep dropout values must be in [0, 1)");
  }
  for (double v : l2) {
    if (!(v >= 0.0)) throw ConfigError("sweep l2 values must be >= 0");
  }
}

std::vector<RegressorConfig> SweepGrid::candidates() const {
  validate();
  std::vector<RegressorConfig> out;
  out.reserve(cardinality());
  for (int n : layer_counts)
    for (double d : dropout)
      for (double l : l2)
        for (const auto& a : attribute_drops) out.push_back(RegressorConfig::from_layer_count(n, d, l, a, seed));
  return out;
}

SweepGrid sweep_grid_from_json(const std::string& text) {
  SweepGrid g;
  try {
    const auto j = json::parse(text);
    if (!j.is_object()) throw ConfigError("sweep grid must be a JSON object");
    if (j.contains("layer_counts")) g.layer_counts = j["layer_counts"].get<std::vector<int>>();
    if (j.contains("dropout")) g.dropout = j["dropout"].get<std::vector<double>>();
    if (j.contains("l2")) g.l2 = j["l2"].get<std::vector<double>>();
    if (j.contains("attribute_drops")) g.attribute_drops = j["attribute_drops"].get<std::vector<std::string>>();
    if (j.contains("seed")) g.seed = j["seed"].get<uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid sweep grid: ") + e.what());
  }
  g.validate();
  return g;
}

std::string sweep_grid_to_json(const SweepGrid& grid) {
  return json{{"layer_counts", grid.layer_counts},
              {"dropout", grid.dropout},
              {"l2", grid.l2},
              {"attribute_drops", grid.attribute_drops},
              {"seed", grid.seed}}
      .dump(2);
}

bool leaderboard_less(const LeaderboardEntry& a, const LeaderboardEntry& b) {
  return sort_key(a) < sort_key(b);
}

const LeaderboardEntry& SweepResult::winner() const {
  for (const auto& e : leaderboard) {
    if (!e.diverged) return e;
  }
  throw TrainingDivergence("every sweep candidate diverged");
}

SweepResult run_sweep(const SweepGrid& grid, const FeatureSchema& schema, const Split& split,
                      const TrainOptions& options, int threads) {
  const auto configs = grid.candidates();
  if (split.train.empty()) throw SplitError("sweep needs training rows");
  if (split.validation.empty()) throw SplitError("sweep needs validation rows");
  // Attribute names are checked up front: a typo is a config error, not a divergence.
  for (const auto& a : grid.attribute_drops) attribute_columns(schema, a);

  std::vector<LeaderboardEntry> entries(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      auto& e = entries[i];
      e.config = configs[i];
      try {
        const auto model = train(configs[i], schema, split.train, split.validation, options);
        e.train = evaluate(model, split.train);
        e.validation = evaluate(model, split.validation);
        e.best_epoch = model.best_epoch;
        e.parameters = model.network().parameter_count();
      } catch (const TrainingDivergence& err) {
        e.diverged = true;
        e.error = err.what();
      }
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(configs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Stable sort over the deterministic candidate order keeps ties reproducible.
  std::stable_sort(entries.begin(), entries.end(), leaderboard_less);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
  return {std::move(entries)};
}

RetrainResult retrain_winner(const LeaderboardEntry& winner, const FeatureSchema& schema,
                             const Split& split, const TrainOptions& options) {
  if (winner.diverged) throw TrainingDivergence("cannot retrain a diverged candidate");
  const auto selected = train(winner.config, schema, split.train, split.validation, options);

  std::vector<RegressionRow> combined = split.train;
  combined.insert(combined.end(), split.validation.begin(), split.validation.end());
  TrainOptions fixed = options;
  fixed.fixed_epochs = std::max(1, selected.best_epoch);
  RetrainResult r{train(winner.config, schema, combined, {}, fixed), {}, {}};
  if (!split.test.empty()) {
    r.test_before = evaluate(selected, split.test);
    r.test_after = evaluate(r.model, split.test);
    r.model.metrics.emplace_back("test", r.test_after);
  }
  return r;
}

void write_leaderboard_json(std::ostream& out, const SweepResult& result) {
  json rows = json::array();
  for (const auto& e : result.leaderboard) rows.push_back(entry_to_json(e));
  out << json{{"format", "yieldrisk-leaderboard"}, {"schema_version", 1}, {"entries", rows}}.dump(2)
      << '\n';
  if (!out) throw IoError("failed writing leaderboard");
}

SweepResult read_leaderboard_json(std::istream& in) {
  SweepResult r;
  try {
    const auto j = json::parse(in);
    if (j.value("format", "") != "yieldrisk-leaderboard") throw SchemaError("not a leaderboard file");
    for (const auto& row : j.at("entries")) {
      LeaderboardEntry e;
      e.rank = row.at("rank").get<std::size_t>();
      e.config.layer_sizes = row.at("layer_sizes").get<std::vector<int>>();
      e.config.dropout = row.at("dropout").get<double>();
      e.config.l2 = row.at("l2").get<double>();
      e.config.dropped_attribute = row.at("dropped_attribute").get<std::string>();
      e.config.seed = row.at("seed").get<uint64_t>();
      e.train = {row.at("train_mae_mean").get<double>(), row.at("train_mae_std").get<double>(), 0};
      e.validation = {row.at("val_mae_mean").get<double>(), row.at("val_mae_std").get<double>(), 0};
      e.best_epoch = row.at("best_epoch").get<int>();
      e.parameters = row.at("parameters").get<std::size_t>();
      e.diverged = row.at("diverged").get<bool>();
      e.error = row.value("error", "");
      r.leaderboard.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed leaderboard: ") + e.what());
  }
  return r;
}

void write_leaderboard_csv(std::ostream& out, const SweepResult& result) {
  out << "rank,label,layers,dropout,l2,dropped_attribute,train_mae_mean,train_mae_std,"
         "val_mae_mean,val_mae_std,best_epoch,parameters,diverged\n";
  for (const auto& e : result.leaderboard) {
    out << e.rank << ',' << e.config.label() << ',' << e.config.layer_sizes.size() << ','
        << detail::fmt6(e.config.dropout) << ',' << detail::fmt6(e.config.l2) << ','
        << e.config.dropped_attribute << ',' << detail::fmt6(e.train.mae_mean) << ','
        << detail::fmt6(e.train.mae_std) << ',' << detail::fmt6(e.validation.mae_mean) << ','
        << detail::fmt6(e.validation.mae_std) << ',' << e.best_epoch << ',' << e.parameters << ','
        << (e.diverged ? "true" : "false") << '\n';
  }
}

}  // namespace yieldrisk
