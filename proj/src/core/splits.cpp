// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "yieldrisk/error.hpp"
#include "yieldrisk/rng.hpp"

namespace yieldrisk {
namespace {

std::vector<int> year_range(int first, int last) {
  std::vector<int> out;
  for (int y = first; y <= last; ++y) out.push_back(y);
  return out;
}

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

Split temporal_split(const SplitSpec& spec, std::span<const RegressionRow> rows) {
  std::set<int> present;
  for (const auto& r : rows) present.insert(r.year);
  for (const auto* list : {&spec.validation_years, &spec.test_years}) {
    for (int y : *list) {
      if (!present.count(y)) throw SplitError("requested year " + std::to_string(y) + " has no rows");
    }
  }
  Split s;
  for (const auto& r : rows) {
    if (contains(spec.test_years, r.year)) s.test.push_back(r);
    else if (contains(spec.validation_years, r.year)) s.validation.push_back(r);
    else if (contains(spec.train_years, r.year)) s.train.push_back(r);
    else s.unassigned.push_back(r);
  }
  if (s.train.empty()) throw SplitError("no rows fall in the training years");
  return s;
}

std::size_t train_count(std::size_t total, double fraction) {
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  return std::clamp<std::size_t>(n, 1, total - 1);
}

}  // namespace

std::string_view to_string(SplitKind k) noexcept {
  switch (k) {
    case SplitKind::SweepTemporal: return "sweep_temporal";
    case SplitKind::Temporal: return "temporal";
    case SplitKind::Spatial: return "spatial";
    case SplitKind::Random: return "random";
  }
  return "?";
}

SplitKind split_kind_from_string(std::string_view name) {
  for (auto k : {SplitKind::SweepTemporal, SplitKind::Temporal, SplitKind::Spatial, SplitKind::Random}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown split kind '" + std::string(name) + "'");
}

SplitSpec SplitSpec::sweep_temporal() {
  SplitSpec s;
  s.kind = SplitKind::SweepTemporal;
  s.train_years = year_range(1999, 2012);
  s.validation_years = {2014, 2016};
  s.test_years = {2013, 2015};
  return s;
}

SplitSpec SplitSpec::temporal() {
  SplitSpec s;
  s.kind = SplitKind::Temporal;
  s.train_years = year_range(1999, 2013);
  s.test_years = year_range(2014, 2016);
  return s;
}

SplitSpec SplitSpec::spatial(uint64_t seed) {
  SplitSpec s;
  s.kind = SplitKind::Spatial;
  s.seed = seed;
  return s;
}

SplitSpec SplitSpec::random(uint64_t seed) {
  SplitSpec s;
  s.kind = SplitKind::Random;
  s.seed = seed;
  return s;
}

SplitSpec SplitSpec::of_kind(SplitKind kind, uint64_t seed) {
  switch (kind) {
    case SplitKind::SweepTemporal: return sweep_temporal();
    case SplitKind::Temporal: return temporal();
    case SplitKind::Spatial: return spatial(seed);
    case SplitKind::Random: return random(seed);
  }
  return sweep_temporal();
}

Split make_split(const SplitSpec& spec, std::span<const RegressionRow> rows) {
  if (rows.empty()) throw SplitError("cannot split an empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw SplitError("train_fraction must be in (0, 1)");
  }
  switch (spec.kind) {
    case SplitKind::SweepTemporal:
    case SplitKind::Temporal: return temporal_split(spec, rows);

    case SplitKind::Spatial: {
      std::set<std::string> region_set;
      for (const auto& r : rows) region_set.insert(region_of(r.geohash4).code);
      std::vector<std::string> regions(region_set.begin(), region_set.end());
      if (regions.size() < 2) throw SplitError("spatial split needs at least 2 regions");
      Rng rng(derive_seed(spec.seed, "split-spatial", 0));
      std::shuffle(regions.begin(), regions.end(), rng);
      const std::set<std::string> train_regions(
          regions.begin(), regions.begin() + static_cast<long>(train_count(regions.size(), spec.train_fraction)));
      Split s;
      for (const auto& r : rows) {
        (train_regions.count(region_of(r.geohash4).code) ? s.train : s.test).push_back(r);
      }
      return s;
    }

    case SplitKind::Random: {
      if (rows.size() < 2) throw SplitError("random split needs at least 2 rows");
      std::vector<std::size_t> idx(rows.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      Rng rng(derive_seed(spec.seed, "split-random", 0));
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto n_train = train_count(rows.size(), spec.train_fraction);
      std::sort(idx.begin(), idx.begin() + static_cast<long>(n_train));
      std::sort(idx.begin() + static_cast<long>(n_train), idx.end());
      Split s;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < n_train ? s.train : s.test).push_back(rows[idx[i]]);
      }
      return s;
    }
  }
  throw SplitError("unknown split kind");
}

}  // namespace yieldrisk
