#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dvem/geodesy.hpp"
#include "dvem/location_extraction.hpp"
#include "dvem/types.hpp"

namespace dvem {

enum class Protocol { kLabel, kRadius };

inline const char* protocol_name(Protocol p) {
  return p == Protocol::kLabel ? "label" : "radius";
}

inline Protocol protocol_by_name(const std::string& name) {
  if (name == "label") return Protocol::kLabel;
  if (name == "radius") return Protocol::kRadius;
  throw Error(Errc::kConfig, "unknown protocol: " + name);
}

struct EvalConfig {
  Protocol protocol = Protocol::kLabel;
  double r_eval_km = 1.0;          // radius protocol only
  std::vector<int> k_values{1, 5, 10};

  void validate() const {
    if (protocol == Protocol::kRadius && !(r_eval_km > 0.0)) {
      throw Error(Errc::kConfig, "r_eval must be > 0");
    }
    if (k_values.empty()) throw Error(Errc::kConfig, "at least one K value is required");
    for (int k : k_values) {
      if (k < 1) throw Error(Errc::kConfig, "K values must be >= 1");
    }
  }
};

/// Map from image id to its discrete location label, for resolving label
/// hits through a location's members. May be empty when locations carry
/// their label directly.
using ImageLabelLookup = std::unordered_map<std::string, std::string>;

namespace detail {

inline bool location_carries_label(const CandidateLocation& loc, const std::string& truth,
                                   const ImageLabelLookup& labels) {
  if (loc.label) return *loc.label == truth;
  for (const std::string& member : loc.members) {
    auto it = labels.find(member);
    if (it != labels.end() && it->second == truth) return true;
  }
  return false;
}

}  // namespace detail

/// Whether the true location appears among the first k ranked locations.
/// Label protocol: some top-k location carries the truth label. Radius
/// protocol: some top-k location centroid lies within r_eval of the truth
/// point; locations without a centroid cannot hit.
inline bool hit_at_k(std::span<const CandidateLocation> ranked, const QueryMeta& query, int k,
                     const EvalConfig& cfg, const ImageLabelLookup& labels = {}) {
  if (k < 1) throw Error(Errc::kConfig, "K must be >= 1");
  const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(k));
  if (cfg.protocol == Protocol::kLabel) {
    if (!query.truth_label) return false;
    for (std::size_t i = 0; i < limit; ++i) {
      if (detail::location_carries_label(ranked[i], *query.truth_label, labels)) return true;
    }
  } else {
    if (!query.truth_point) return false;
    for (std::size_t i = 0; i < limit; ++i) {
      if (ranked[i].centroid &&
          haversine_km(*ranked[i].centroid, *query.truth_point) <= cfg.r_eval_km) {
        return true;
      }
    }
  }
  return false;
}

inline double hit_rate(std::span<const bool> hits) {
  if (hits.empty()) throw Error(Errc::kConfig, "hit rate over zero queries is undefined");
  std::size_t n = 0;
  for (bool h : hits) n += h ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(hits.size());
}

struct QueryOutcome {
  std::string query_id;
  bool has_estimate = false;
  std::map<int, bool> hit;  // per requested K
};

struct EvalReport {
  std::map<int, double> hit_rate;  // per requested K
  std::vector<QueryOutcome> per_query;
  std::size_t no_estimate = 0;  // counted as misses at every K
};

/// One query's ranked output, resolved to full location records.
struct RankedQuery {
  const QueryMeta* query = nullptr;
  std::vector<CandidateLocation> ranked;
};

inline EvalReport evaluate(std::span<const RankedQuery> queries, const EvalConfig& cfg,
                           const ImageLabelLookup& labels = {}) {
  cfg.validate();
  if (queries.empty()) throw Error(Errc::kConfig, "evaluation requires at least one query");

  EvalReport report;
  std::map<int, std::size_t> hits_per_k;
  for (const RankedQuery& rq : queries) {
    QueryOutcome outcome;
    outcome.query_id = rq.query->query_id;
    outcome.has_estimate = !rq.ranked.empty();
    if (!outcome.has_estimate) report.no_estimate += 1;
    for (int k : cfg.k_values) {
      const bool hit = outcome.has_estimate && hit_at_k(rq.ranked, *rq.query, k, cfg, labels);
      outcome.hit[k] = hit;
      if (hit) hits_per_k[k] += 1;
    }
    report.per_query.push_back(std::move(outcome));
  }
  for (int k : cfg.k_values) {
    report.hit_rate[k] = static_cast<double>(hits_per_k[k]) / static_cast<double>(queries.size());
  }
  return report;
}

}  // namespace dvem
