// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "yieldrisk/climate.hpp"
#include "yieldrisk/dataset.hpp"
#include "yieldrisk/error.hpp"
#include "yieldrisk/ingest.hpp"
#include "yieldrisk/summary.hpp"
#include "yieldrisk/synthetic.hpp"

using namespace yieldrisk;

namespace {

FeatureSchema july_precip() {
  FeatureSchema s;
  s.variables = {ClimateVariable::Precipitation};
  s.months = {7};
  return s;
}

DailySeries july(std::initializer_list<double> values) {
  DailySeries d;
  int day = 1;
  for (double v : values) d[ClimateVariable::Precipitation].push_back({2001, 7, day++, v});
  return d;
}

std::string csv(const std::vector<UnitYieldRecord>& rows) {
  std::ostringstream s;
  write_yield_csv(s, rows);
  return s.str();
}

}  // namespace

TEST_SUITE("data-pipeline") {

TEST_CASE("yield delta") {
  CHECK(compute_yield_delta(75, 100) == doctest::Approx(-0.25));
  CHECK(compute_yield_delta(100, 100) == 0.0);
  CHECK(compute_yield_delta(130, 100) == doctest::Approx(0.30));
  CHECK_THROWS_AS(compute_yield_delta(10, 0), DomainError);
}

TEST_CASE("neighborhood summary moments") {
  const Geohash g("9zqv");
  auto s = summarize_neighborhood(std::vector<double>{-0.1, 0.0, 0.1}, g, 2010, 100);
  CHECK(s.mean_delta == doctest::Approx(0.0));
  CHECK(s.std_delta == doctest::Approx(0.1));
  CHECK(s.skewness == doctest::Approx(0.0));

  s = summarize_neighborhood(std::vector<double>(50, 0.2), g, 2010, 100);
  CHECK(s.mean_delta == doctest::Approx(0.2));
  CHECK(s.std_delta == doctest::Approx(0.0));
  CHECK_FALSE(s.approx_normal);

  CHECK_THROWS_AS(summarize_neighborhood(std::vector<double>{}, g, 2010, 1), DomainError);
}

TEST_CASE("summary skewness and kurtosis match the adjusted estimators") {
  std::mt19937_64 rng(4);
  std::gamma_distribution<double> gd(2.0, 0.1);
  std::vector<double> x(40);
  for (auto& v : x) v = gd(rng) - 0.2;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    m2 += std::pow(v - mean, 2) / n;
    m3 += std::pow(v - mean, 3) / n;
    m4 += std::pow(v - mean, 4) / n;
  }
  const double g1 = m3 / std::pow(m2, 1.5) * std::sqrt(n * (n - 1)) / (n - 2);
  const double g2 = ((n + 1) * (m4 / (m2 * m2) - 3) + 6) * (n - 1) / ((n - 2) * (n - 3));
  const auto s = summarize_neighborhood(x, Geohash("9zqv"), 2000, 1);
  CHECK(s.skewness == doctest::Approx(g1).epsilon(1e-10));
  CHECK(s.excess_kurtosis == doctest::Approx(g2).epsilon(1e-10));
  CHECK(s.std_delta == doctest::Approx(std::sqrt(m2 * n / (n - 1))).epsilon(1e-12));
}

TEST_CASE("normal draws pass the screen") {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd(0.0, 0.15);
  std::vector<double> x(10000);
  for (auto& v : x) v = nd(rng);
  const auto s = summarize_neighborhood(x, Geohash("9zqv"), 2000, 1);
  CHECK(std::abs(s.mean_delta) <= 0.005);
  CHECK(std::abs(s.std_delta - 0.15) <= 0.005);
  CHECK(s.approx_normal);
}

TEST_CASE("normality screen thresholds") {
  auto f = normality_screen(0, 0);
  CHECK((f.approx_normal && f.approx_symmetric));
  f = normality_screen(2.5, 1);
  CHECK_FALSE(f.approx_normal);
  CHECK_FALSE(f.approx_symmetric);
  f = normality_screen(1.0, 8.0);
  CHECK_FALSE(f.approx_normal);
  CHECK(f.approx_symmetric);
}

TEST_CASE("monthly climate statistics") {
  const auto schema = july_precip();
  const auto c = monthly_stats(Geohash("9zqv"), 2001, july({5, 5, 5, 5}), schema);
  CHECK(c.features[schema.index(ClimateVariable::Precipitation, 7, ClimateStat::Min)] == 5.0);
  CHECK(c.features[schema.index(ClimateVariable::Precipitation, 7, ClimateStat::Max)] == 5.0);
  CHECK(c.features[schema.index(ClimateVariable::Precipitation, 7, ClimateStat::Mean)] == 5.0);
  CHECK(c.features[schema.index(ClimateVariable::Precipitation, 7, ClimateStat::Std)] == 0.0);
  CHECK_THROWS_AS(monthly_stats(Geohash("9zqv"), 2001, DailySeries{}, schema), MissingDataError);
  CHECK(monthly_stats(Geohash("9zqv"), 2001, DailySeries{}, schema, MissingPolicy::Sentinel).has_missing());
}

TEST_CASE("climate deltas against a baseline") {
  const auto schema = july_precip();
  const Geohash g("9zqv");
  const auto base_year = monthly_stats(g, 2000, july({4, 4, 4, 4}), schema);
  const std::vector<ClimateFeatureSet> raw{base_year};
  const std::vector<int> years{2000};
  const auto baseline = build_climate_baseline(raw, years);
  const auto same = summarize_climate(g, 2000, july({4, 4, 4, 4}), schema, baseline);
  for (double v : same.features) CHECK(v == 0.0);
  const auto delta = summarize_climate(g, 2001, july({0, 0, 10, 2}), schema, baseline);
  CHECK(delta.features[schema.index(ClimateVariable::Precipitation, 7, ClimateStat::Mean)] == doctest::Approx(-1.0));
}

TEST_CASE("feature schema") {
  const auto s = FeatureSchema::default_schema();
  CHECK(s.variables.size() == 9);
  CHECK(s.months == std::vector<int>{4, 5, 6, 7, 8, 9});
  CHECK(s.size() == 9 * 6 * 4);
  CHECK(s.feature_names().size() == s.size());
  std::set<std::size_t> idx;
  for (auto v : s.variables)
    for (int m : s.months)
      for (auto st : {ClimateStat::Min, ClimateStat::Max, ClimateStat::Mean, ClimateStat::Std})
        idx.insert(s.index(v, m, st));
  CHECK(idx.size() == s.size());
  CHECK_THROWS_AS(s.index(ClimateVariable::Vpd, 1, ClimateStat::Min), DomainError);
}

TEST_CASE("yield CSV ingest") {
  const std::string header = "unit_id,geohash4,year,y_actual,acres,h1,h2\n";
  std::istringstream ok(header + "a,9zqv,2010,100,50,90,110\nb,9zqv,2010,80,60,100,100\nc,9zqy,2011,70,10,60,80\n");
  const auto rows = read_yield_csv(ok);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].y_history == std::vector<double>{90, 110});
  CHECK(rows[2].unit_acres == 10.0);

  std::istringstream bad(header + "a,9zqv,2010,100,50,90,110\nb,9zqv,2010,80,-5,100,100\n");
  try {
    (void)read_yield_csv(bad);
    FAIL("expected an ingest error");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  std::istringstream empty(header);
  CHECK(read_yield_csv(empty).empty());
  std::istringstream missing("unit_id,year\n");
  CHECK_THROWS_AS(read_yield_csv(missing), IngestError);
}

TEST_CASE("yield CSV round trip is exact") {
  SyntheticConfig cfg;
  cfg.n_neighborhoods = 3;
  cfg.n_years = 2;
  const auto ds = generate_synthetic(cfg);
  std::istringstream in(csv(ds.yields));
  const auto back = read_yield_csv(in);
  REQUIRE(back.size() == ds.yields.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].y_actual == ds.yields[i].y_actual);
    CHECK(back[i].y_history == ds.yields[i].y_history);
  }
}

TEST_CASE("summaries round trip") {
  SyntheticConfig cfg;
  cfg.n_neighborhoods = 4;
  cfg.n_years = 3;
  const auto ds = generate_synthetic(cfg);
  const auto sums = summarize_records(ds.yields, 10);
  std::ostringstream jl, cs;
  write_summaries_jsonl(jl, sums);
  write_summaries_csv(cs, sums);
  std::istringstream jin(jl.str()), cin(cs.str());
  const auto j = read_summaries_jsonl(jin);
  const auto c = read_summaries_csv(cin);
  REQUIRE(j.size() == sums.size());
  REQUIRE(c.size() == sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) {
    // Both forms carry six significant digits and agree exactly.
    CHECK(j[i].mean_delta == c[i].mean_delta);
    CHECK(j[i].std_delta == c[i].std_delta);
    CHECK(j[i].skewness == c[i].skewness);
    CHECK(j[i].geohash4 == sums[i].geohash4);
    CHECK(c[i].mean_delta == doctest::Approx(sums[i].mean_delta).epsilon(1e-5).scale(1e-6));
    CHECK(c[i].std_delta == doctest::Approx(sums[i].std_delta).epsilon(1e-5));
    CHECK(c[i].approx_normal == sums[i].approx_normal);
  }
}

TEST_CASE("climate CSV and bundle round trip") {
  RawClimate raw;
  raw[{"9zqv", 2001}] = july({1, 2, 3});
  std::ostringstream out;
  write_climate_csv(out, raw);
  std::istringstream in(out.str());
  const auto back = read_climate_csv(in);
  CHECK(back.at({"9zqv", 2001}).at(ClimateVariable::Precipitation).size() == 3);

  SyntheticConfig cfg;
  cfg.n_neighborhoods = 2;
  cfg.n_years = 2;
  const auto ds = generate_synthetic(cfg);
  std::ostringstream b;
  write_climate_bundle(b, ds.climate);
  std::istringstream bin(b.str());
  const auto bundle = read_climate_bundle(bin);
  CHECK(bundle.schema == ds.climate.schema);
  REQUIRE(bundle.series.size() == ds.climate.series.size());
  for (const auto& s : ds.climate.series) {
    const auto* b2 = bundle.find(s.id);
    REQUIRE(b2 != nullptr);
    REQUIRE(b2->climate.size() == s.climate.size());
    CHECK(b2->climate[0].features == s.climate[0].features);
  }
  std::istringstream junk("{\"format\": 3}");
  CHECK_THROWS(read_climate_bundle(junk));
}

TEST_CASE("climate CSV to features with a baseline") {
  RawClimate raw;
  raw[{"9zqv", 2000}] = july({4, 4, 4, 4});
  raw[{"9zqv", 2001}] = july({0, 0, 10, 2});
  for (auto& [k, s] : raw)
    for (auto& [v, obs] : s)
      for (auto& o : obs) o.year = k.second;
  const std::vector<int> ref{2000};
  const auto sets = climate_features_from_raw(raw, july_precip(), ref, MissingPolicy::Fail);
  REQUIRE(sets.size() == 2);
  CHECK(sets[1].features[2] == doctest::Approx(-1.0));
}

TEST_CASE("synthetic generator shape and determinism") {
  SyntheticConfig cfg;
  cfg.n_neighborhoods = 50;
  cfg.n_years = 17;
  cfg.seed = 7;
  const auto a = generate_synthetic(cfg);
  const auto sums = summarize_records(a.yields, 10);
  CHECK(sums.size() == 50 * 17);
  const auto b = generate_synthetic(cfg);
  CHECK(csv(a.yields) == csv(b.yields));
  cfg.seed = 8;
  CHECK(csv(generate_synthetic(cfg).yields) != csv(a.yields));
  CHECK(a.climate.series.size() == 5);
}

TEST_CASE("noiseless synthetic targets are recoverable exactly") {
  SyntheticConfig cfg;
  cfg.n_neighborhoods = 10;
  cfg.n_years = 5;
  const auto ds = generate_synthetic(cfg);
  const auto sums = summarize_records(ds.yields, 10);
  const auto* hist = ds.climate.find(ScenarioId::Historic);
  REQUIRE(hist);
  for (const auto& s : sums) {
    const auto& m = ds.truth.moments.at({s.geohash4.code(), s.year});
    CHECK(s.mean_delta == doctest::Approx(m.first).epsilon(1e-12).scale(1e-12));
    CHECK(s.std_delta == doctest::Approx(m.second).epsilon(1e-12));
    for (const auto& c : hist->climate) {
      if (c.geohash4 == s.geohash4 && c.year == s.year) {
        CHECK(s.mean_delta == doctest::Approx(ds.truth.mean_response(c.features, s.year)).scale(1e-9));
        CHECK(s.std_delta == doctest::Approx(ds.truth.std_response(c.features)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("regression rows use strictly earlier history") {
  std::vector<NeighborhoodSummary> sums;
  const Geohash g("9zqv");
  for (int y = 2000; y < 2004; ++y) {
    NeighborhoodSummary s;
    s.geohash4 = g;
    s.year = y;
    s.mean_delta = 0.01 * (y - 1999);
    s.std_delta = 0.1 + 0.01 * (y - 2000);
    s.maize_acres = 100.0 * (y - 1999);
    sums.push_back(s);
  }
  const NeighborhoodHistory h(sums);
  CHECK(h.before(g, 2000).z_mu == 0.0);
  CHECK(h.before(g, 2001).z_mu == doctest::Approx(0.01));
  CHECK(h.before(g, 2003).z_mu == doctest::Approx((0.01 + 0.02 + 0.03) / 3));
  CHECK(h.before(g, 2003).z_sigma == doctest::Approx((0.10 + 0.11 + 0.12) / 3));
  CHECK(h.mean_acres(g) == doctest::Approx(250.0));

  auto schema = july_precip();
  std::vector<ClimateFeatureSet> climate;
  for (int y = 2000; y < 2003; ++y) climate.push_back({g, y, std::vector<double>(schema.size(), 0.5)});
  const auto ds = build_regression_dataset(sums, climate, schema);
  CHECK(ds.rows.size() == 3);
  CHECK(ds.warnings.size() == 1);  // 2003 has no climate
  CHECK(ds.input_size() == schema.size() + 3);
  const auto x = ds.rows[2].inputs();
  CHECK(x[schema.size()] == 2002.0);
  CHECK(x[schema.size() + 1] == doctest::Approx(0.015));
}

TEST_CASE("attribute drop menu") {
  const auto menu = default_attribute_drop_menu();
  CHECK(menu.size() == 10);
  CHECK(menu.front() == "none");
  const auto schema = FeatureSchema::default_schema();
  CHECK(attribute_columns(schema, "none").empty());
  CHECK(attribute_columns(schema, "vpd").size() == 6 * 4);
  CHECK_THROWS_AS(attribute_columns(schema, "soil"), ConfigError);
}

}  // TEST_SUITE
