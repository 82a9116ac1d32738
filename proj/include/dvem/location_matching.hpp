#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dvem/element_cloud.hpp"
#include "dvem/geo_distinctiveness.hpp"
#include "dvem/region_grid.hpp"
#include "dvem/types.hpp"

namespace dvem {

enum class Method { kDvem, kGvr, kVisnn };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kDvem: return "dvem";
    case Method::kGvr: return "gvr";
    case Method::kVisnn: return "visnn";
  }
  return "?";
}

inline Method method_by_name(const std::string& name) {
  if (name == "dvem") return Method::kDvem;
  if (name == "gvr") return Method::kGvr;
  if (name == "visnn") return Method::kVisnn;
  throw Error(Errc::kUsage, "unknown method: " + name);
}

/// The strongest element of one matching region for one location.
struct RegionSelection {
  ElementKey element;
  double weight = 0.0;  // max over the element's per-image weights
};

struct Contribution {
  RegionKey region;  // matching-grid region the element was selected from
  ElementKey element;
  double match_weight = 0.0;
  double geo_weight = 0.0;
};

struct LocationScore {
  std::string location_id;
  double score = 0.0;
  int matched_regions = 0;  // k
  std::vector<Contribution> contributions;
  double tie_break_weight = 0.0;  // total surviving correspondence weight
};

/// For every matching-grid region containing at least one cloud element,
/// picks the element with the strongest per-image weight. Ties go to the
/// lexicographically smaller element position (not part of the method
/// definition; fixed here for determinism).
inline std::map<RegionKey, RegionSelection> select_region_maxima(const ElementCloud& cloud,
                                                                 const RegionGrid& match_grid) {
  std::map<RegionKey, RegionSelection> maxima;
  for (const auto& [element, weights] : cloud.entries) {
    const double best = weights.front();  // weight lists are sorted descending
    const RegionKey region = match_grid.region_of(element);
    auto [it, fresh] = maxima.try_emplace(region, RegionSelection{element, best});
    if (!fresh && best > it->second.weight) {
      it->second = RegionSelection{element, best};
    }
    // Equal weights never displace the incumbent: cloud entries iterate in
    // ascending element order, so the incumbent already has the smaller key.
  }
  return maxima;
}

/// Combines the selected elements with the squared distinctiveness of their
/// own regions on the distinctiveness grid. The two grids are independent
/// even when built with the same parameter.
inline LocationScore score_location(const std::string& location_id,
                                    const std::map<RegionKey, RegionSelection>& maxima,
                                    const DistinctivenessMap& distinct,
                                    const RegionGrid& distinct_grid,
                                    double tie_break_weight) {
  LocationScore result;
  result.location_id = location_id;
  result.tie_break_weight = tie_break_weight;
  result.matched_regions = static_cast<int>(maxima.size());
  result.contributions.reserve(maxima.size());
  for (const auto& [region, selection] : maxima) {
    const double w_geo = distinct.stat_for(distinct_grid.region_of(selection.element)).weight;
    result.score += selection.weight * w_geo * w_geo;
    result.contributions.push_back({region, selection.element, selection.weight, w_geo});
  }
  return result;
}

/// Descending by score; ties broken by larger total surviving correspondence
/// weight, then by lexicographically smaller location id.
inline std::vector<LocationScore> rank_locations(std::vector<LocationScore> scores) {
  std::sort(scores.begin(), scores.end(), [](const LocationScore& a, const LocationScore& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tie_break_weight != b.tie_break_weight) return a.tie_break_weight > b.tie_break_weight;
    return a.location_id < b.location_id;
  });
  return scores;
}

/// The whole scoring stage for one query: clouds, distinctiveness, per-region
/// selection, scores, ranking. Candidate locations must already be extracted.
inline std::vector<LocationScore> score_query(const QueryMeta& query,
                                              std::span<const CandidateLocation> locations,
                                              std::span<const CorrespondenceRecord> correspondences,
                                              const Config& config,
                                              CloudDiagnostics* diagnostics = nullptr) {
  const std::vector<ElementCloud> clouds =
      build_clouds(locations, correspondences, config, diagnostics);
  const RegionGrid distinct_grid =
      RegionGrid::build(query.width, query.height, config.distinct_grid);
  const DistinctivenessMap distinct =
      build_distinctiveness(distinct_grid, clouds, config.freq_cutoff, config.log_base);
  const RegionGrid match_grid = RegionGrid::build(query.width, query.height, config.match_grid);

  std::vector<LocationScore> scores;
  scores.reserve(clouds.size());
  for (const ElementCloud& cloud : clouds) {
    scores.push_back(score_location(cloud.location_id, select_region_maxima(cloud, match_grid),
                                    distinct, distinct_grid, cloud.total_weight));
  }
  return rank_locations(std::move(scores));
}

}  // namespace dvem
