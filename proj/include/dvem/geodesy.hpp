#pragma once

#include <cmath>

#include "dvem/types.hpp"

namespace dvem {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in kilometers (haversine, fixed Earth radius).
inline double haversine_km(const GeoPoint& p1, const GeoPoint& p2) {
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  const double lat1 = p1.lat * kDegToRad;
  const double lat2 = p2.lat * kDegToRad;
  const double dlat = (p2.lat - p1.lat) * kDegToRad;
  const double dlon = (p2.lon - p1.lon) * kDegToRad;
  const double sin_lat = std::sin(dlat / 2.0);
  const double sin_lon = std::sin(dlon / 2.0);
  const double a = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

}  // namespace dvem
