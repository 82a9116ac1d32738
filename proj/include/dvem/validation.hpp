#pragma once

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dvem/dataset.hpp"
#include "dvem/types.hpp"

namespace dvem {

struct Violation {
  std::string category;
  std::string message;

  auto operator<=>(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool accepted() const { return violations.empty(); }

  std::string to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) {
      out << v.category << ": " << v.message << '\n';
    }
    return out.str();
  }
};

namespace detail {

inline void add(ValidationReport& report, std::string category, std::string message) {
  report.violations.push_back({std::move(category), std::move(message)});
}

}  // namespace detail

/// Checks one query block against the domain invariants. Violations are
/// reported, never thrown; the block is acceptable iff none are found.
inline void validate_query(const QueryData& q, ValidationReport& report) {
  const std::string& qid = q.meta.query_id;
  if (q.meta.width < 1 || q.meta.height < 1) {
    detail::add(report, "frame",
                "query " + qid + ": frame must be at least 1x1 pixel, got " +
                    std::to_string(q.meta.width) + "x" + std::to_string(q.meta.height));
  }
  if (q.meta.truth_point && !valid_latlon(*q.meta.truth_point)) {
    detail::add(report, "latlon_range", "query " + qid + ": ground-truth coordinates out of range");
  }
  if (q.meta.truth_label && q.meta.truth_point) {
    detail::add(report, "ground_truth", "query " + qid + ": ground truth must be a label or coordinates, not both");
  }

  std::unordered_map<std::string, const ImageMeta*> by_id;
  std::unordered_set<int> seen_ranks;
  for (const ImageMeta& img : q.images) {
    if (!by_id.emplace(img.image_id, &img).second) {
      detail::add(report, "duplicate_image", "query " + qid + ": image " + img.image_id + " listed twice");
    }
    if (img.retrieval_rank < 1) {
      detail::add(report, "rank", "query " + qid + ": image " + img.image_id + " has rank < 1");
    } else if (!seen_ranks.insert(img.retrieval_rank).second) {
      detail::add(report, "duplicate_rank",
                  "query " + qid + ": retrieval rank " + std::to_string(img.retrieval_rank) +
                      " assigned more than once (image " + img.image_id + ")");
    }
    if (img.geo.has_value() == img.label.has_value()) {
      detail::add(report, "geo_or_label",
                  "query " + qid + ": image " + img.image_id +
                      " must carry exactly one of coordinates or location label");
    }
    if (img.geo && !valid_latlon(*img.geo)) {
      detail::add(report, "latlon_range", "query " + qid + ": image " + img.image_id + " coordinates out of range");
    }
    if (img.similarity && *img.similarity < 0.0) {
      detail::add(report, "similarity", "query " + qid + ": image " + img.image_id + " has negative similarity");
    }
  }

  std::set<std::pair<ElementKey, std::string>> seen_pairs;
  for (const CorrespondenceRecord& c : q.correspondences) {
    if (c.query_id != qid) {
      detail::add(report, "query_mismatch",
                  "query " + qid + ": correspondence carries foreign query id " + c.query_id);
    }
    if (c.element.x < 0 || c.element.y < 0 || c.element.x >= q.meta.width ||
        c.element.y >= q.meta.height) {
      detail::add(report, "element_out_of_frame",
                  "query " + qid + ": element (" + std::to_string(c.element.x) + "," +
                      std::to_string(c.element.y) + ") outside " + std::to_string(q.meta.width) +
                      "x" + std::to_string(q.meta.height) + " frame (image " + c.image_id + ")");
    }
    if (!by_id.count(c.image_id)) {
      detail::add(report, "missing_image",
                  "query " + qid + ": correspondence references image " + c.image_id +
                      " with no metadata");
    }
    if (!seen_pairs.insert({c.element, c.image_id}).second) {
      detail::add(report, "one_to_one",
                  "query " + qid + ": element (" + std::to_string(c.element.x) + "," +
                      std::to_string(c.element.y) + ") matched twice into image " + c.image_id);
    }
    if (c.ini_score < 0.0) {
      detail::add(report, "ini_score", "query " + qid + ": negative ini_score for image " + c.image_id);
    }
  }
}

/// Full-dataset validation. Idempotent; the violation set does not depend on
/// record order (the report is sorted).
inline ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  std::unordered_set<std::string> query_ids;
  for (const QueryData& q : dataset.queries) {
    if (!query_ids.insert(q.meta.query_id).second) {
      detail::add(report, "duplicate_query", "query id " + q.meta.query_id + " appears more than once");
    }
    validate_query(q, report);
  }
  std::sort(report.violations.begin(), report.violations.end());
  return report;
}

}  // namespace dvem
