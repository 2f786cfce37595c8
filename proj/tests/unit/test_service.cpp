// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "yieldrisk/error.hpp"
#include "yieldrisk/jobs.hpp"
#include "yieldrisk/service.hpp"
#include "yieldrisk/version.hpp"

// After the engine headers: httplib drags in resolv.h, whose _res macro breaks Eigen.
#include <httplib.h>

using namespace yieldrisk;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// One small pipeline fixture shared by every service test.
const std::string& fixture_dir() {
  static const std::string dir = [] {
    const auto d = fs::temp_directory_path() / "yieldrisk_service_fixture";
    fs::remove_all(d);
    json cfg = {{"seed", 5},
                {"synthetic", {{"n_neighborhoods", 10}, {"n_years", 18}, {"first_year", 1999}}},
                {"pipeline", {{"training", {{"max_epochs", 30}}}, {"simulation", {{"trials", 300}}}}}};
    run_job_config("generate", cfg, d.string(), d.string());
    return d.string();
  }();
  return dir;
}

const Service& service() {
  static const Service svc(load_service_data(fixture_dir()), ServiceOptions{.trial_cap = 5000});
  return svc;
}

struct Reply {
  int status;
  json body;
};

Reply get(const std::string& path, std::map<std::string, std::string> q = {}) {
  const auto r = service().handle("GET", path, q, "");
  return {r.status, json::parse(r.body)};
}

Reply post(const std::string& path, const json& body) {
  const auto r = service().handle("POST", path, {}, body.dump());
  return {r.status, json::parse(r.body)};
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("meta describes the data directory") {
  const auto r = get("/api/meta");
  REQUIRE(r.status == 200);
  CHECK(r.body["version"] == kVersion);
  CHECK(r.body["api_schema_version"] == kApiSchemaVersion);
  CHECK(r.body["neighborhoods"] == 10);
  CHECK(r.body["has_leaderboard"] == true);
  CHECK(r.body["seed"] == 5);
  CHECK(r.body["scenarios"].size() == 5);
  CHECK(r.body["outcome_scenarios"].size() == 4);
  CHECK(r.body["model"].is_string());
}

TEST_CASE("neighborhood rows filter by scenario and year") {
  const auto all = get("/api/neighborhoods");
  REQUIRE(all.status == 200);
  CHECK(all.body["count"] == 4 * 5 * 10);
  const auto one = get("/api/neighborhoods", {{"scenario", "ssp245_2050"}, {"year", "2050"}});
  CHECK(one.body["count"] == 50);  // aggregate year covers the five-year window
  const auto cal = get("/api/neighborhoods", {{"scenario", "ssp245_2050"}, {"year", "2049"}});
  CHECK(cal.body["count"] == 10);
  for (const auto& row : cal.body["rows"]) {
    CHECK(row["scenario"] == "ssp245_2050");
    CHECK(row["year"] == 2049);
    CHECK(row.contains("p_value"));
  }
  CHECK(get("/api/neighborhoods", {{"scenario", "ssp585_2100"}}).status == 404);
  CHECK(get("/api/neighborhoods", {{"year", "twenty"}}).status == 400);
}

TEST_CASE("histogram counts are conserved") {
  const auto r = get("/api/histogram", {{"scenario", "ssp245_2030"}});
  REQUIRE(r.status == 200);
  std::size_t sum = r.body["underflow"].get<std::size_t>() + r.body["overflow"].get<std::size_t>();
  for (const auto& c : r.body["counts"]) sum += c.get<std::size_t>();
  CHECK(sum == r.body["total"].get<std::size_t>());
  CHECK(r.body["total"] == 5 * 10 * 300);
  CHECK(r.body["counts"].size() == 40);
  CHECK(get("/api/histogram").status == 400);
  CHECK(get("/api/histogram", {{"scenario", "nope"}}).status == 404);
  CHECK(get("/api/histogram", {{"scenario", "ssp245_2030"}, {"year", "2050"}}).status == 404);
  CHECK(get("/api/histogram", {{"scenario", "historic"}}).status == 404);
}

TEST_CASE("claims under both loss formulas") {
  const auto r = post("/api/claims", {{"history", std::vector<double>(10, 100.0)}, {"y_actual", 70}, {"c_pct", 0.75}});
  REQUIRE(r.status == 200);
  const auto& cur = r.body["current"];
  CHECK(cur["expected_yield"] == doctest::Approx(100));
  CHECK(cur["guarantee"] == doctest::Approx(75));
  CHECK(cur["y_delta"] == doctest::Approx(-0.30));
  CHECK(cur["percent"]["claim"] == true);
  CHECK(cur["percent"]["loss"] == doctest::Approx(5));
  // Zero spread: the sigma guarantee sits at the mean.
  CHECK(cur["sigma"]["threshold"] == doctest::Approx(100));
  CHECK(cur["sigma"]["loss"] == doctest::Approx(30));
  const auto printed = post("/api/claims", {{"history", std::vector<double>(10, 100.0)}, {"y_actual", 70},
                                            {"sigma_formula", "as_printed_ratio"}});
  REQUIRE(printed.status == 200);
  CHECK(printed.body["current"]["sigma"].contains("error"));  // ratio form divides by zero spread

  // A stable unit: small spread puts the sigma threshold close to the mean.
  std::vector<double> stable;
  for (int i = 0; i < 10; ++i) stable.push_back(i % 2 ? 105.0 : 95.0);
  const double sd = std::sqrt(10 * 25.0 / 9);
  const auto s = post("/api/claims", {{"history", stable}, {"y_actual", 85}, {"c_sigma", 2.0}});
  REQUIRE(s.status == 200);
  CHECK(s.body["current"]["y_sigma"] == doctest::Approx(sd));
  CHECK(s.body["current"]["sigma"]["threshold"] == doctest::Approx(100 - 2 * sd));
  CHECK(s.body["current"]["sigma"]["claim"] == true);
  CHECK(s.body["current"]["percent"]["claim"] == false);

  const auto series = post("/api/claims", {{"history", {100, 100, 100}},
                                           {"series", {{{"year", 2030}, {"y_actual", 60}}, {{"year", 2031}, {"y_actual", 100}}}}});
  REQUIRE(series.status == 200);
  REQUIRE(series.body["per_year"].size() == 2);
  CHECK(series.body["per_year"][0]["year"] == 2030);
  CHECK(series.body["per_year"][1]["expected_yield"] == doctest::Approx(90));  // 2030 joins the history

  CHECK(post("/api/claims", {{"y_actual", 70}}).status == 400);
  const auto bad = post("/api/claims", {{"history", {100, -1}}, {"y_actual", 70}});
  CHECK(bad.status == 400);
  CHECK(bad.body["field"] == "history");
  CHECK(service().handle("POST", "/api/claims", {}, "{not json").status == 400);
}

TEST_CASE("simulate validates, caps and is deterministic") {
  const json req = {{"scenario", "ssp245_2030"}, {"trials", 200}, {"seed", 3}};
  const auto a = service().handle("POST", "/api/simulate", {}, req.dump());
  const auto b = service().handle("POST", "/api/simulate", {}, req.dump());
  REQUIRE(a.status == 200);
  CHECK(a.body == b.body);
  const auto j = json::parse(a.body);
  CHECK(j["trials"] == 200);
  CHECK(j["outcomes"].size() == 2 * 5 * 10);
  CHECK(j["n_tests"] == 50);
  CHECK(j["threshold"] == doctest::Approx(0.05 / 50));
  CHECK(j["histograms"].size() == 2);

  const auto code = get("/api/neighborhoods").body["rows"][0]["geohash4"].get<std::string>();
  const auto only = post("/api/simulate", {{"scenario", "ssp245_2030"}, {"trials", 50}, {"compare", false},
                                           {"geohashes", {code}}});
  REQUIRE(only.status == 200);
  CHECK(only.body["outcomes"].size() == 5);

  CHECK(post("/api/simulate", {{"trials", 10}}).status == 400);
  CHECK(post("/api/simulate", {{"scenario", "mars"}}).status == 404);
  const auto capped = post("/api/simulate", {{"scenario", "ssp245_2030"}, {"trials", 5001}});
  CHECK(capped.status == 422);
  CHECK(capped.body["field"] == "trials");
  CHECK(post("/api/simulate", {{"scenario", "ssp245_2030"}, {"trials", 10}, {"geohashes", {"zzzz"}}}).status == 404);

  ServiceData no_model = load_service_data(fixture_dir());
  no_model.model.reset();
  const Service bare(std::move(no_model));
  CHECK(bare.handle("POST", "/api/simulate", {}, req.dump()).status == 503);
}

TEST_CASE("sweep surface slices the leaderboard") {
  const auto all = post("/api/sweep-surface", json::object());
  REQUIRE(all.status == 200);
  CHECK(all.body["total"] == 4);
  CHECK(all.body["count"] == 4);
  const auto sub = post("/api/sweep-surface", {{"layer_counts", {2}}, {"l2", {0.05}}});
  REQUIRE(sub.body["count"] == 1);
  CHECK(sub.body["rows"][0]["layers"] == 2);
  CHECK(sub.body["rows"][0]["l2"] == doctest::Approx(0.05));
  CHECK(post("/api/sweep-surface", {{"limit", 1}}).body["rows"][0]["rank"] == 1);
  const Service empty(ServiceData{});
  CHECK(empty.handle("POST", "/api/sweep-surface", {}, "{}").status == 404);
}

TEST_CASE("rate stub is monotone in coverage") {
  const auto r = post("/api/rates", {{"coverage_levels", {0.5, 0.6, 0.7, 0.8, 0.9}}, {"mean", 0.0}, {"std", 0.2}});
  REQUIRE(r.status == 200);
  CHECK(r.body["illustrative"] == true);
  double prev = -1;
  for (const auto& row : r.body["rows"]) {
    CHECK(row["premium_proxy"].get<double>() > prev);
    prev = row["premium_proxy"].get<double>();
  }
  // E[max(-Y - 0.25, 0)] for Y ~ N(0, 0.2) at c = .75.
  const auto one = post("/api/rates", {{"coverage_levels", {0.75}}, {"std", 0.2}});
  const double d = -1.25, pdf = std::exp(-0.5 * d * d) / std::sqrt(2 * M_PI);
  const double cdf = 0.5 * std::erfc(-d / std::sqrt(2.0));
  CHECK(one.body["rows"][0]["premium_proxy"] == doctest::Approx(-0.25 * cdf + 0.2 * pdf));
  CHECK(post("/api/rates", {{"std", 0}}).status == 400);
}

TEST_CASE("unknown endpoints and missing data") {
  CHECK(get("/api/nothing").status == 404);
  CHECK(service().handle("DELETE", "/api/meta", {}, "").status == 404);
  CHECK_THROWS_AS(load_service_data("/nonexistent/yieldrisk"), IoError);
}

TEST_CASE("serves over a real socket") {
  Service svc(load_service_data(fixture_dir()));
  const int port = svc.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { svc.listen_after_bind(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_connection_timeout(5);
  auto res = cli.Get("/api/meta");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["neighborhoods"] == 10);
  auto bad = cli.Post("/api/claims", "{}", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  svc.stop();
  server.join();
}

}  // TEST_SUITE
