#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dvem/baselines.hpp"
#include "dvem/dataset.hpp"
#include "dvem/element_cloud.hpp"
#include "dvem/evaluation.hpp"
#include "dvem/io.hpp"
#include "dvem/location_extraction.hpp"
#include "dvem/location_matching.hpp"
#include "dvem/types.hpp"

namespace dvem {

/// One query's ranked output plus the candidate locations it was ranked over.
struct QueryRanking {
  std::string query_id;
  std::vector<CandidateLocation> locations;  // the candidate set G
  std::vector<RankedLocation> ranked;
  std::vector<LocationScore> detail;  // populated for the element-cloud ranker only
  CloudDiagnostics diagnostics;
};

/// Runs candidate selection, location extraction and the chosen ranker for
/// one query. Pure function of its inputs; images must be sorted by rank.
inline QueryRanking rank_one(const QueryData& query, Method method, const Config& config) {
  QueryRanking result;
  result.query_id = query.meta.query_id;
  const std::span<const ImageMeta> candidates = select_candidates(query.images, config.top_n);
  if (candidates.empty()) return result;
  result.locations = extract_locations(candidates, config.grouping, config.cluster_radius_km);

  switch (method) {
    case Method::kDvem: {
      result.detail = score_query(query.meta, result.locations, query.correspondences, config,
                                  &result.diagnostics);
      result.ranked.reserve(result.detail.size());
      for (const LocationScore& s : result.detail) {
        result.ranked.push_back({s.location_id, s.score, s.matched_regions});
      }
      break;
    }
    case Method::kGvr:
      result.ranked = gvr(candidates, result.locations).ranked;
      break;
    case Method::kVisnn:
      result.ranked = visnn(candidates, result.locations).ranked;
      break;
  }
  return result;
}

/// Ranks every query with a pool of `workers` threads. Output order follows
/// the dataset order regardless of scheduling, so runs are deterministic.
inline std::vector<QueryRanking> rank_all(const Dataset& dataset, Method method,
                                          const Config& config, int workers = 1) {
  config.validate();
  if (workers < 1) workers = 1;
  std::vector<QueryRanking> results(dataset.queries.size());
  if (dataset.queries.empty()) return results;

  workers = std::min<int>(workers, static_cast<int>(dataset.queries.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < dataset.queries.size(); ++i) {
      results[i] = rank_one(dataset.queries[i], method, config);
    }
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dataset.queries.size() || failed.load()) return;
      try {
        results[i] = rank_one(dataset.queries[i], method, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

namespace detail {

inline const CandidateLocation* find_location(const std::vector<CandidateLocation>& locations,
                                              const std::string& id) {
  for (const CandidateLocation& loc : locations) {
    if (loc.location_id == id) return &loc;
  }
  return nullptr;
}

}  // namespace detail

/// Assembles the evaluation input from ranked outputs, resolving location ids
/// back to full records. Label lookups are per query; image ids only need to
/// be unique within one query.
inline EvalReport evaluate_rankings(const Dataset& dataset, std::span<const QueryRanking> rankings,
                                    const EvalConfig& eval_config) {
  if (rankings.size() != dataset.queries.size()) {
    throw Error(Errc::kInternal, "one ranking per query expected");
  }
  EvalReport report;
  std::map<int, std::size_t> hits_per_k;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const QueryData& query = dataset.queries[i];
    ImageLabelLookup labels;
    for (const ImageMeta& img : query.images) {
      if (img.label) labels.emplace(img.image_id, *img.label);
    }
    RankedQuery rq;
    rq.query = &query.meta;
    for (const RankedLocation& row : rankings[i].ranked) {
      const CandidateLocation* loc = detail::find_location(rankings[i].locations, row.location_id);
      if (!loc) throw Error(Errc::kInternal, "ranked location " + row.location_id + " not in G");
      rq.ranked.push_back(*loc);
    }

    QueryOutcome outcome;
    outcome.query_id = query.meta.query_id;
    outcome.has_estimate = !rq.ranked.empty();
    if (!outcome.has_estimate) report.no_estimate += 1;
    for (int k : eval_config.k_values) {
      const bool hit =
          outcome.has_estimate && hit_at_k(rq.ranked, query.meta, k, eval_config, labels);
      outcome.hit[k] = hit;
      if (hit) hits_per_k[k] += 1;
    }
    report.per_query.push_back(std::move(outcome));
  }
  for (int k : eval_config.k_values) {
    report.hit_rate[k] =
        static_cast<double>(hits_per_k[k]) / static_cast<double>(dataset.queries.size());
  }
  return report;
}

struct PipelineOutput {
  std::string rankings_path;
  std::string estimates_path;
  std::string locations_path;
  std::optional<EvalReport> report;
};

/// End-to-end run: rank every query, write rankings/estimates/locations under
/// out_dir, and evaluate when an evaluation config is given. Deterministic
/// for fixed inputs: two runs produce byte-identical files.
inline PipelineOutput run_pipeline(const Dataset& dataset, Method method, const Config& config,
                                   const std::string& out_dir,
                                   const std::optional<EvalConfig>& eval_config = std::nullopt,
                                   int workers = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::vector<QueryRanking> rankings = rank_all(dataset, method, config, workers);

  std::vector<io::RankingRow> rows;
  std::vector<io::EstimateRow> estimates;
  std::vector<std::pair<std::string, std::vector<CandidateLocation>>> locations;
  for (const QueryRanking& qr : rankings) {
    int rank = 1;
    for (const RankedLocation& loc : qr.ranked) {
      rows.push_back({qr.query_id, method_name(method), rank++, loc.location_id, loc.score,
                      loc.matched_regions});
    }
    io::EstimateRow estimate;
    estimate.query_id = qr.query_id;
    estimate.method = method_name(method);
    if (!qr.ranked.empty()) {
      const CandidateLocation* top =
          detail::find_location(qr.locations, qr.ranked.front().location_id);
      estimate.location_id = top->location_id;
      estimate.point = top->centroid;
      estimate.label = top->label;
    }
    estimates.push_back(std::move(estimate));
    locations.emplace_back(qr.query_id, qr.locations);
  }

  PipelineOutput output;
  output.rankings_path = (fs::path(out_dir) / "rankings.tsv").string();
  output.estimates_path = (fs::path(out_dir) / "estimates.tsv").string();
  output.locations_path = (fs::path(out_dir) / "locations.tsv").string();
  io::write_rankings(output.rankings_path, rows);
  io::write_estimates(output.estimates_path, estimates);
  io::write_locations(output.locations_path, locations);

  if (eval_config) {
    output.report = evaluate_rankings(dataset, rankings, *eval_config);
    io::write_eval_report((fs::path(out_dir) / "report.csv").string(),
                          (fs::path(out_dir) / "detail.csv").string(), *output.report);
  }
  return output;
}

}  // namespace dvem
