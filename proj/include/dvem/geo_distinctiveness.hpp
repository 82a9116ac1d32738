#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>

#include "dvem/element_cloud.hpp"
#include "dvem/region_grid.hpp"
#include "dvem/types.hpp"

namespace dvem {

struct RegionStat {
  int location_count = 0;  // n(r)
  double weight = 0.0;     // geo-distinctiveness of the region
};

/// Query-specific distinctiveness of every populated region of the
/// distinctiveness grid. Regions touched by no element are absent.
struct DistinctivenessMap {
  int total_locations = 0;  // N, the number of candidate locations
  std::map<RegionKey, RegionStat> regions;

  const RegionStat& stat_for(const RegionKey& r) const {
    auto it = regions.find(r);
    if (it == regions.end()) {
      throw Error(Errc::kInternal, "distinctiveness lookup for a region with no elements");
    }
    return it->second;
  }
};

/// n(r): how many candidate locations have at least one image corresponding
/// with any element that falls in region r. The count is a union over all
/// elements of the region, not per element.
inline std::map<RegionKey, int> count_region_locations(const RegionGrid& grid,
                                                       std::span<const ElementCloud> clouds) {
  std::map<RegionKey, int> counts;
  std::map<RegionKey, bool> touched;
  for (const ElementCloud& cloud : clouds) {
    touched.clear();
    for (const auto& [element, weights] : cloud.entries) {
      touched.emplace(grid.region_of(element), true);
    }
    for (const auto& [region, unused] : touched) counts[region] += 1;
  }
  return counts;
}

/// Thresholded inverse location frequency. Regions matched by theta or more
/// locations carry no weight at all.
inline double geo_weight(int n_r, int total_locations, int theta, double log_base) {
  if (total_locations < 1) throw Error(Errc::kInternal, "geo_weight: no candidate locations");
  if (n_r < 1 || n_r > total_locations) {
    throw Error(Errc::kInternal, "geo_weight: location count " + std::to_string(n_r) +
                                     " outside [1, " + std::to_string(total_locations) + "]");
  }
  if (n_r >= theta) return 0.0;
  const double w = std::log(static_cast<double>(total_locations) / n_r);
  if (log_base == std::numbers::e) return w;
  return w / std::log(log_base);
}

inline DistinctivenessMap build_distinctiveness(const RegionGrid& grid,
                                                std::span<const ElementCloud> clouds,
                                                int theta,
                                                double log_base) {
  DistinctivenessMap map;
  map.total_locations = static_cast<int>(clouds.size());
  for (const auto& [region, n_r] : count_region_locations(grid, clouds)) {
    map.regions[region] = RegionStat{n_r, geo_weight(n_r, map.total_locations, theta, log_base)};
  }
  return map;
}

}  // namespace dvem
