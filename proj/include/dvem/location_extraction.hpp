#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dvem/geodesy.hpp"
#include "dvem/types.hpp"

namespace dvem {

/// A candidate location: a group of top-ranked images assumed to show the
/// same place, together with the images that form its image set.
struct CandidateLocation {
  std::string location_id;
  std::vector<std::string> members;  // nonempty, in retrieval-rank order
  std::optional<GeoPoint> centroid;  // set when geo-clustered
  std::optional<std::string> label;  // set when label-grouped
};

/// Cuts the ranked candidate list to the first top_n entries.
/// Pre: images sorted by retrieval_rank ascending.
inline std::span<const ImageMeta> select_candidates(std::span<const ImageMeta> ranked, int top_n) {
  if (top_n < 1) throw Error(Errc::kConfig, "top_n must be >= 1");
  const std::size_t n = std::min(ranked.size(), static_cast<std::size_t>(top_n));
  return ranked.first(n);
}

/// Groups candidates by their discrete location label, one location per
/// distinct label. Locations come out ordered by their best-ranked member.
inline std::vector<CandidateLocation> extract_locations_by_label(std::span<const ImageMeta> candidates) {
  std::vector<CandidateLocation> locations;
  std::map<std::string, std::size_t> index;  // label -> position
  for (const ImageMeta& img : candidates) {
    if (!img.label) {
      throw Error(Errc::kValidation, "image " + img.image_id + " has no location label");
    }
    auto [it, fresh] = index.emplace(*img.label, locations.size());
    if (fresh) {
      CandidateLocation loc;
      loc.location_id = *img.label;
      loc.label = *img.label;
      locations.push_back(std::move(loc));
    }
    locations[it->second].members.push_back(img.image_id);
  }
  return locations;
}

/// Greedy leader clustering in retrieval-rank order: each image joins the
/// first existing cluster whose centroid lies within cluster_radius_km,
/// otherwise it founds a new cluster. Centroids are the arithmetic mean of
/// member coordinates, recomputed on every join. Deterministic given the
/// input order. Stands in for an externally defined geo-clustering step.
inline std::vector<CandidateLocation> extract_locations_by_geo(std::span<const ImageMeta> candidates,
                                                               double cluster_radius_km) {
  if (!(cluster_radius_km > 0.0)) {
    throw Error(Errc::kConfig, "cluster_radius_km must be > 0");
  }
  std::vector<CandidateLocation> locations;
  std::vector<double> sum_lat, sum_lon;
  for (const ImageMeta& img : candidates) {
    if (!img.geo) {
      throw Error(Errc::kValidation, "image " + img.image_id + " has no coordinates");
    }
    std::size_t target = locations.size();
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (haversine_km(*locations[i].centroid, *img.geo) <= cluster_radius_km) {
        target = i;
        break;
      }
    }
    if (target == locations.size()) {
      char id[16];
      std::snprintf(id, sizeof(id), "g%04zu", locations.size());
      CandidateLocation loc;
      loc.location_id = id;
      locations.push_back(std::move(loc));
      sum_lat.push_back(0.0);
      sum_lon.push_back(0.0);
    }
    CandidateLocation& loc = locations[target];
    loc.members.push_back(img.image_id);
    sum_lat[target] += img.geo->lat;
    sum_lon[target] += img.geo->lon;
    const double n = static_cast<double>(loc.members.size());
    loc.centroid = GeoPoint{sum_lat[target] / n, sum_lon[target] / n};
  }
  return locations;
}

/// Dispatches on the configured grouping; kAuto picks label grouping when
/// every candidate carries a label and geo clustering otherwise.
inline std::vector<CandidateLocation> extract_locations(std::span<const ImageMeta> candidates,
                                                        Grouping grouping,
                                                        double cluster_radius_km) {
  if (grouping == Grouping::kAuto) {
    const bool all_labeled =
        std::all_of(candidates.begin(), candidates.end(),
                    [](const ImageMeta& img) { return img.label.has_value(); });
    grouping = all_labeled ? Grouping::kLabel : Grouping::kGeo;
  }
  return grouping == Grouping::kLabel ? extract_locations_by_label(candidates)
                                      : extract_locations_by_geo(candidates, cluster_radius_km);
}

}  // namespace dvem
