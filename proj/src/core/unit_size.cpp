// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/unit_size.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "csv_util.hpp"
#include "yieldrisk/error.hpp"

namespace yieldrisk {

UnitSizeTable::UnitSizeTable(std::vector<double> acres, std::vector<double> probability) {
  if (acres.empty() || acres.size() != probability.size()) {
    throw ConfigError("unit size table needs matching, nonempty acres and probability columns");
  }
  std::vector<std::size_t> order(acres.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return acres[a] < acres[b]; });
  double total = 0.0;
  for (auto i : order) {
    if (!(acres[i] > 0.0)) throw ConfigError("unit size table: acres must be positive");
    if (!(probability[i] >= 0.0)) throw ConfigError("unit size table: negative probability");
    acres_.push_back(acres[i]);
    probability_.push_back(probability[i]);
    total += probability[i];
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ConfigError("unit size table probabilities sum to " + std::to_string(total) +
                      ", expected 1");
  }
  double c = 0.0;
  for (double& p : probability_) {
    p /= total;
    c += p;
    cumulative_.push_back(c);
  }
  cumulative_.back() = 1.0;
}

UnitSizeTable UnitSizeTable::default_table() {
  return UnitSizeTable({20, 40, 80, 160, 320, 640, 1280},
                       {0.10, 0.15, 0.20, 0.22, 0.17, 0.10, 0.06});
}

UnitSizeTable UnitSizeTable::without_smallest(double quantile) const {
  if (!(quantile >= 0.0 && quantile < 1.0)) {
    throw ConfigError("optional-unit removal quantile must be in [0, 1)");
  }
  std::vector<double> acres, prob;
  for (std::size_t i = 0; i < acres_.size(); ++i) {
    if (cumulative_[i] <= quantile + 1e-12) continue;
    acres.push_back(acres_[i]);
    prob.push_back(probability_[i]);
  }
  const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
  for (double& p : prob) p /= total;
  return UnitSizeTable(std::move(acres), std::move(prob));
}

double UnitSizeTable::sample(Rng& rng) const {
  if (acres_.empty()) throw ConfigError("unit size table is empty");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                       acres_.size() - 1);
  return acres_[i];
}

double UnitSizeTable::mean_acres() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < acres_.size(); ++i) m += acres_[i] * probability_[i];
  return m;
}

UnitSizeTable UnitSizeTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("unit size CSV is empty");
  const auto header = detail::split_csv(line);
  if (header.size() < 2 || header[0] != "acres" || header[1] != "probability") {
    throw ConfigError("unit size CSV header must be 'acres,probability'");
  }
  std::vector<double> acres, prob;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    const auto a = cells.size() > 0 ? detail::parse_double(cells[0]) : std::nullopt;
    const auto p = cells.size() > 1 ? detail::parse_double(cells[1]) : std::nullopt;
    if (!a || !p) throw ConfigError("unit size CSV row " + std::to_string(line_no) + " unparseable");
    acres.push_back(*a);
    prob.push_back(*p);
  }
  return UnitSizeTable(std::move(acres), std::move(prob));
}

UnitSizeTable UnitSizeTable::load_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_csv(in);
}

void UnitSizeTable::write_csv(std::ostream& out) const {
  out << "acres,probability\n";
  for (std::size_t i = 0; i < acres_.size(); ++i) {
    out << detail::fmt_exact(acres_[i]) << ',' << detail::fmt_exact(probability_[i]) << '\n';
  }
}

int samples_for_unit(double unit_acres, double sample_granularity_km) {
  if (!(unit_acres > 0.0)) throw DomainError("unit acres must be positive");
  if (!(sample_granularity_km > 0.0)) throw DomainError("sample granularity must be positive");
  const double per_sample = sample_granularity_km * sample_granularity_km * kAcresPerSquareKm;
  return std::max(1, static_cast<int>(std::lround(unit_acres / per_sample)));
}

}  // namespace yieldrisk
