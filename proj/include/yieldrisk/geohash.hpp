// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Geohash cells for the two-tier spatial grid: 4-character neighborhoods
// aggregated into 3-character regions.

#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace yieldrisk {

inline constexpr int kMinGeohashPrecision = 1;
inline constexpr int kMaxGeohashPrecision = 12;
inline constexpr int kNeighborhoodPrecision = 4;
inline constexpr int kRegionPrecision = 3;

// Half-open latitude/longitude box [lat_min, lat_max) x [lon_min, lon_max).
struct GeoBounds {
  double lat_min = 0, lat_max = 0, lon_min = 0, lon_max = 0;

  double lat_center() const noexcept { return 0.5 * (lat_min + lat_max); }
  double lon_center() const noexcept { return 0.5 * (lon_min + lon_max); }
  // Closed containment; the top/right edges of the globe belong to the last cell.
  bool contains(double lat, double lon) const noexcept {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
  bool contains(const GeoBounds& inner) const noexcept {
    return inner.lat_min >= lat_min && inner.lat_max <= lat_max &&
           inner.lon_min >= lon_min && inner.lon_max <= lon_max;
  }
};

class Geohash {
 public:
  Geohash() = default;
  // Validates alphabet and length; throws ParseError.
  explicit Geohash(std::string_view code);

  const std::string& code() const noexcept { return code_; }
  int precision() const noexcept { return static_cast<int>(code_.size()); }
  bool empty() const noexcept { return code_.empty(); }

  Geohash prefix(int precision) const;

  auto operator<=>(const Geohash&) const = default;

 private:
  std::string code_;
};

struct RegionId {
  std::string code;
  auto operator<=>(const RegionId&) const = default;
};

Geohash encode_geohash(double lat, double lon, int precision);
GeoBounds decode_bounds(const Geohash& g);
RegionId region_of(const Geohash& g);

bool is_geohash_char(char c) noexcept;

}  // namespace yieldrisk
