#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dvem/location_extraction.hpp"
#include "dvem/types.hpp"

namespace dvem {

/// Per-location aggregation of query elements: for every element with at
/// least one surviving correspondence into the location's image set, the
/// multiset of smoothed per-image weights. Weight lists are kept sorted
/// descending; only their multiset content is meaningful.
struct ElementCloud {
  std::string location_id;
  std::map<ElementKey, std::vector<double>> entries;
  // Sum of all surviving correspondence weights, accumulated in input order.
  // Used as the ranking tie-break key.
  double total_weight = 0.0;
  std::size_t correspondence_count = 0;
};

/// Gaussian smoothing of a raw correspondence score into [0, 1).
/// Strictly increasing, 0 at 0, saturating towards 1.
inline double smooth_score(double ini_score, double delta) {
  return 1.0 - std::exp(-(ini_score * ini_score) / (delta * delta));
}

struct CloudDiagnostics {
  std::size_t unassigned = 0;       // correspondences into images outside every location
  std::size_t below_min_score = 0;  // correspondences dropped by the score filter
};

namespace detail {

inline void append_to_cloud(ElementCloud& cloud, const CorrespondenceRecord& c, double delta) {
  const double w = smooth_score(c.ini_score, delta);
  cloud.entries[c.element].push_back(w);
  cloud.total_weight += w;
  cloud.correspondence_count += 1;
}

inline void finalize_cloud(ElementCloud& cloud) {
  for (auto& [element, weights] : cloud.entries) {
    std::sort(weights.begin(), weights.end(), std::greater<>());
  }
}

}  // namespace detail

/// Builds the element cloud of a single location. Correspondences must be
/// pre-filtered to the owning query; records into images outside the
/// location's image set are ignored here (the multi-location overload counts
/// them). Zero-weight entries are retained.
inline ElementCloud build_cloud(const CandidateLocation& location,
                                std::span<const CorrespondenceRecord> correspondences,
                                const Config& config) {
  std::unordered_map<std::string_view, bool> member;
  member.reserve(location.members.size());
  for (const std::string& id : location.members) member.emplace(id, true);

  ElementCloud cloud;
  cloud.location_id = location.location_id;
  for (const CorrespondenceRecord& c : correspondences) {
    if (c.ini_score < config.min_ini_score) continue;
    if (!member.count(c.image_id)) continue;
    detail::append_to_cloud(cloud, c, config.smooth_delta);
  }
  detail::finalize_cloud(cloud);
  return cloud;
}

/// Builds the clouds of every candidate location in one pass. Locations with
/// no surviving correspondence get an empty cloud, keeping the output aligned
/// index-for-index with the input.
inline std::vector<ElementCloud> build_clouds(std::span<const CandidateLocation> locations,
                                              std::span<const CorrespondenceRecord> correspondences,
                                              const Config& config,
                                              CloudDiagnostics* diagnostics = nullptr) {
  std::unordered_map<std::string_view, std::size_t> owner;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (const std::string& id : locations[i].members) owner.emplace(id, i);
  }

  std::vector<ElementCloud> clouds(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    clouds[i].location_id = locations[i].location_id;
  }
  for (const CorrespondenceRecord& c : correspondences) {
    if (c.ini_score < config.min_ini_score) {
      if (diagnostics) diagnostics->below_min_score += 1;
      continue;
    }
    auto it = owner.find(c.image_id);
    if (it == owner.end()) {
      if (diagnostics) diagnostics->unassigned += 1;
      continue;
    }
    detail::append_to_cloud(clouds[it->second], c, config.smooth_delta);
  }
  for (ElementCloud& cloud : clouds) detail::finalize_cloud(cloud);
  return clouds;
}

}  // namespace dvem
