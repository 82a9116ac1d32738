#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dvem/location_extraction.hpp"
#include "dvem/types.hpp"

namespace dvem {

/// Brute-force reference scorer. Recomputes element clouds, region location
/// counts, distinctiveness weights, per-region maxima and final scores by
/// direct nested loops over the raw records, sharing only the core types with
/// the engine. Intentionally naive and quadratic; meant for desk-scale
/// cross-checks, not production use.
struct OracleEntry {
  std::string location_id;
  double score = 0.0;
  double tie_break_weight = 0.0;
};

inline std::vector<OracleEntry> oracle_rank(const QueryMeta& query,
                                            std::span<const CorrespondenceRecord> correspondences,
                                            std::span<const CandidateLocation> locations,
                                            const Config& config) {
  const int n_locations = static_cast<int>(locations.size());

  auto cell_side = [](int w, int h, int param) {
    if (param == 0) return 1;
    const double side = std::min(static_cast<double>(w) / param, static_cast<double>(h) / param);
    const int floored = static_cast<int>(std::floor(side));
    return floored < 1 ? 1 : floored;
  };
  const int cell_a = cell_side(query.width, query.height, config.distinct_grid);
  const int cell_b = cell_side(query.width, query.height, config.match_grid);

  auto is_member = [&](const CandidateLocation& loc, const std::string& image_id) {
    for (const std::string& m : loc.members) {
      if (m == image_id) return true;
    }
    return false;
  };

  // Per-location element clouds: distinct elements in first-seen order, each
  // with the list of surviving smoothed weights.
  struct OracleElement {
    ElementKey key;
    std::vector<double> weights;
  };
  std::vector<std::vector<OracleElement>> clouds(locations.size());
  std::vector<double> tie_weight(locations.size(), 0.0);
  for (std::size_t g = 0; g < locations.size(); ++g) {
    for (const CorrespondenceRecord& c : correspondences) {
      if (c.ini_score < config.min_ini_score) continue;
      if (!is_member(locations[g], c.image_id)) continue;
      const double w =
          1.0 - std::exp(-(c.ini_score * c.ini_score) / (config.smooth_delta * config.smooth_delta));
      bool found = false;
      for (OracleElement& e : clouds[g]) {
        if (e.key == c.element) {
          e.weights.push_back(w);
          found = true;
          break;
        }
      }
      if (!found) clouds[g].push_back({c.element, {w}});
      tie_weight[g] += w;
    }
  }

  // n(r) on the distinctiveness grid: how many locations touch each region.
  struct RegionCount {
    int rx, ry;
    int count;
  };
  std::vector<RegionCount> region_counts;
  for (std::size_t g = 0; g < locations.size(); ++g) {
    std::vector<std::pair<int, int>> seen;
    for (const OracleElement& e : clouds[g]) {
      const std::pair<int, int> region{e.key.x / cell_a, e.key.y / cell_a};
      if (std::find(seen.begin(), seen.end(), region) == seen.end()) seen.push_back(region);
    }
    for (const auto& [rx, ry] : seen) {
      bool found = false;
      for (RegionCount& rc : region_counts) {
        if (rc.rx == rx && rc.ry == ry) {
          rc.count += 1;
          found = true;
          break;
        }
      }
      if (!found) region_counts.push_back({rx, ry, 1});
    }
  }

  auto distinctiveness = [&](const ElementKey& e) {
    const int rx = e.x / cell_a;
    const int ry = e.y / cell_a;
    for (const RegionCount& rc : region_counts) {
      if (rc.rx == rx && rc.ry == ry) {
        if (rc.count >= config.freq_cutoff) return 0.0;
        const double w = std::log(static_cast<double>(n_locations) / rc.count);
        if (config.log_base == std::numbers::e) return w;
        return w / std::log(config.log_base);
      }
    }
    throw Error(Errc::kInternal, "oracle: element region has no location count");
  };

  std::vector<OracleEntry> entries;
  for (std::size_t g = 0; g < locations.size(); ++g) {
    // Per matching-grid region, the strongest element; equal strengths keep
    // the lexicographically smaller element position.
    struct Pick {
      int rx, ry;
      ElementKey element;
      double weight;
    };
    std::vector<Pick> picks;
    for (const OracleElement& e : clouds[g]) {
      double best = 0.0;
      for (double w : e.weights) best = std::max(best, w);
      const int rx = e.key.x / cell_b;
      const int ry = e.key.y / cell_b;
      bool found = false;
      for (Pick& p : picks) {
        if (p.rx == rx && p.ry == ry) {
          if (best > p.weight || (best == p.weight && e.key < p.element)) {
            p.element = e.key;
            p.weight = best;
          }
          found = true;
          break;
        }
      }
      if (!found) picks.push_back({rx, ry, e.key, best});
    }
    double score = 0.0;
    for (const Pick& p : picks) {
      const double w_geo = distinctiveness(p.element);
      score += p.weight * w_geo * w_geo;
    }
    entries.push_back({locations[g].location_id, score, tie_weight[g]});
  }

  std::sort(entries.begin(), entries.end(), [](const OracleEntry& a, const OracleEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tie_break_weight != b.tie_break_weight) return a.tie_break_weight > b.tie_break_weight;
    return a.location_id < b.location_id;
  });
  return entries;
}

inline std::map<std::string, double> oracle_score(
    const QueryMeta& query, std::span<const CorrespondenceRecord> correspondences,
    std::span<const CandidateLocation> locations, const Config& config) {
  std::map<std::string, double> scores;
  for (const OracleEntry& e : oracle_rank(query, correspondences, locations, config)) {
    scores[e.location_id] = e.score;
  }
  return scores;
}

}  // namespace dvem
