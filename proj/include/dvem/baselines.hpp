#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dvem/location_extraction.hpp"
#include "dvem/location_matching.hpp"
#include "dvem/types.hpp"

namespace dvem {

struct RankedLocation {
  std::string location_id;
  double score = 0.0;
  int matched_regions = 0;  // always 0 for the baselines; regions are a DVEM concept
};

struct BaselineResult {
  Method method = Method::kVisnn;
  std::vector<RankedLocation> ranked;
};

namespace detail {

inline std::unordered_map<std::string_view, std::size_t> location_of_image(
    std::span<const CandidateLocation> locations) {
  std::unordered_map<std::string_view, std::size_t> owner;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (const std::string& id : locations[i].members) owner.emplace(id, i);
  }
  return owner;
}

}  // namespace detail

/// 1-NN baseline: the top-ranked candidate image decides the top location.
/// The rest of the ranking orders locations by their best member rank, an
/// extension kept only so hit rates beyond K=1 are comparable. The reported
/// score is the reciprocal best rank, a purely ordinal value.
inline BaselineResult visnn(std::span<const ImageMeta> candidates,
                            std::span<const CandidateLocation> locations) {
  BaselineResult result;
  result.method = Method::kVisnn;
  if (candidates.empty() || locations.empty()) return result;

  const auto owner = detail::location_of_image(locations);
  std::vector<int> best_rank(locations.size(), std::numeric_limits<int>::max());
  for (const ImageMeta& img : candidates) {
    auto it = owner.find(img.image_id);
    if (it == owner.end()) continue;
    best_rank[it->second] = std::min(best_rank[it->second], img.retrieval_rank);
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (best_rank[i] != std::numeric_limits<int>::max()) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (best_rank[a] != best_rank[b]) return best_rank[a] < best_rank[b];
    return locations[a].location_id < locations[b].location_id;
  });
  for (std::size_t i : order) {
    result.ranked.push_back({locations[i].location_id, 1.0 / best_rank[i], 0});
  }
  return result;
}

/// Location ranking by summed image-level similarity over each location's
/// image set. Ties broken by lexicographic location id.
inline BaselineResult gvr(std::span<const ImageMeta> candidates,
                          std::span<const CandidateLocation> locations) {
  BaselineResult result;
  result.method = Method::kGvr;
  if (locations.empty()) return result;

  const auto owner = detail::location_of_image(locations);
  std::vector<double> sums(locations.size(), 0.0);
  for (const ImageMeta& img : candidates) {
    auto it = owner.find(img.image_id);
    if (it == owner.end()) continue;
    if (!img.similarity) {
      throw Error(Errc::kValidation, "image " + img.image_id + " has no retrieval similarity");
    }
    sums[it->second] += *img.similarity;
  }

  std::vector<std::size_t> order(locations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sums[a] != sums[b]) return sums[a] > sums[b];
    return locations[a].location_id < locations[b].location_id;
  });
  for (std::size_t i : order) {
    result.ranked.push_back({locations[i].location_id, sums[i], 0});
  }
  return result;
}

}  // namespace dvem
