#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dvem/baselines.hpp"
#include "dvem/dataset.hpp"
#include "dvem/evaluation.hpp"
#include "dvem/geo_distinctiveness.hpp"
#include "dvem/location_extraction.hpp"
#include "dvem/synth.hpp"
#include "dvem/types.hpp"
#include "dvem/validation.hpp"

namespace dvem::io {

// Record files are tab-separated, one record per line, no header. Blank lines
// and lines starting with '#' are skipped. Absent optional fields are written
// as "-". Field orders are documented in the README and are part of the
// format contract.

inline constexpr std::string_view kAbsent = "-";

inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace detail {

[[noreturn]] inline void fail(const std::string& path, std::size_t line, const std::string& what) {
  throw Error(Errc::kParse, path + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double(std::string_view token, const std::string& path, std::size_t line,
                           const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    fail(path, line, std::string("expected a number for ") + what + ", got '" + std::string(token) + "'");
  }
  return v;
}

inline int parse_int(std::string_view token, const std::string& path, std::size_t line,
                     const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    fail(path, line, std::string("expected an integer for ") + what + ", got '" + std::string(token) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = '\t') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline void expect_fields(const std::vector<std::string_view>& fields, std::size_t n,
                          const std::string& path, std::size_t line) {
  if (fields.size() != n) {
    fail(path, line, "expected " + std::to_string(n) + " tab-separated fields, got " +
                         std::to_string(fields.size()));
  }
}

inline std::string parse_id(std::string_view token, const std::string& path, std::size_t line,
                            const char* what) {
  if (token.empty() || token == kAbsent) {
    fail(path, line, std::string(what) + " must not be empty or '-'");
  }
  for (char c : token) {
    if (c == ' ' || c == '\t' || c == ',') {
      fail(path, line, std::string(what) + " '" + std::string(token) + "' contains whitespace or a comma");
    }
  }
  return std::string(token);
}

inline const std::string& check_id(const std::string& id, const char* what) {
  if (id.empty() || id == kAbsent || id.find_first_of(" \t,") != std::string::npos) {
    throw Error(Errc::kInternal, std::string(what) + " '" + id + "' is not writable");
  }
  return id;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kParse, "cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kParse, "cannot open " + path + " for writing");
  return out;
}

}  // namespace detail

/// Reads physical lines, skipping blanks and '#' comments, tracking line
/// numbers for error messages.
class LineReader {
 public:
  explicit LineReader(std::string path) : path_(std::move(path)), in_(detail::open_input(path_)) {}

  bool next(std::string& out) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty() || line_[0] == '#') continue;
      out = line_;
      return true;
    }
    return false;
  }

  const std::string& path() const { return path_; }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

// ---------------------------------------------------------------------------
// queries file: query_id  width  height  truth_label  truth_lat  truth_lon

inline QueryMeta parse_query_line(std::string_view line, const std::string& path, std::size_t line_no) {
  const auto f = detail::split_fields(line);
  detail::expect_fields(f, 6, path, line_no);
  QueryMeta q;
  q.query_id = detail::parse_id(f[0], path, line_no, "query_id");
  q.width = detail::parse_int(f[1], path, line_no, "width");
  q.height = detail::parse_int(f[2], path, line_no, "height");
  if (f[3] != kAbsent) q.truth_label = detail::parse_id(f[3], path, line_no, "truth_label");
  const bool has_lat = f[4] != kAbsent;
  const bool has_lon = f[5] != kAbsent;
  if (has_lat != has_lon) detail::fail(path, line_no, "truth coordinates must both be present or both absent");
  if (has_lat) {
    q.truth_point = GeoPoint{detail::parse_double(f[4], path, line_no, "truth_lat"),
                             detail::parse_double(f[5], path, line_no, "truth_lon")};
  }
  return q;
}

inline std::string format_query_line(const QueryMeta& q) {
  std::string out = detail::check_id(q.query_id, "query_id");
  out += '\t';
  out += std::to_string(q.width);
  out += '\t';
  out += std::to_string(q.height);
  out += '\t';
  out += q.truth_label ? detail::check_id(*q.truth_label, "truth_label") : std::string(kAbsent);
  out += '\t';
  out += q.truth_point ? format_double(q.truth_point->lat) : std::string(kAbsent);
  out += '\t';
  out += q.truth_point ? format_double(q.truth_point->lon) : std::string(kAbsent);
  return out;
}

// ---------------------------------------------------------------------------
// images file: query_id  image_id  rank  similarity  lat  lon  label

inline std::pair<std::string, ImageMeta> parse_image_line(std::string_view line,
                                                          const std::string& path,
                                                          std::size_t line_no) {
  const auto f = detail::split_fields(line);
  detail::expect_fields(f, 7, path, line_no);
  ImageMeta img;
  std::string query_id = detail::parse_id(f[0], path, line_no, "query_id");
  img.image_id = detail::parse_id(f[1], path, line_no, "image_id");
  img.retrieval_rank = detail::parse_int(f[2], path, line_no, "rank");
  if (f[3] != kAbsent) img.similarity = detail::parse_double(f[3], path, line_no, "similarity");
  const bool has_lat = f[4] != kAbsent;
  const bool has_lon = f[5] != kAbsent;
  if (has_lat != has_lon) detail::fail(path, line_no, "coordinates must both be present or both absent");
  if (has_lat) {
    img.geo = GeoPoint{detail::parse_double(f[4], path, line_no, "lat"),
                       detail::parse_double(f[5], path, line_no, "lon")};
  }
  if (f[6] != kAbsent) img.label = detail::parse_id(f[6], path, line_no, "label");
  return {std::move(query_id), std::move(img)};
}

inline std::string format_image_line(const std::string& query_id, const ImageMeta& img) {
  std::string out = detail::check_id(query_id, "query_id");
  out += '\t';
  out += detail::check_id(img.image_id, "image_id");
  out += '\t';
  out += std::to_string(img.retrieval_rank);
  out += '\t';
  out += img.similarity ? format_double(*img.similarity) : std::string(kAbsent);
  out += '\t';
  out += img.geo ? format_double(img.geo->lat) : std::string(kAbsent);
  out += '\t';
  out += img.geo ? format_double(img.geo->lon) : std::string(kAbsent);
  out += '\t';
  out += img.label ? detail::check_id(*img.label, "label") : std::string(kAbsent);
  return out;
}

// ---------------------------------------------------------------------------
// correspondences file: query_id  x  y  image_id  ini_score
// Detector output may be sub-pixel; positions are rounded half-up here.

inline CorrespondenceRecord parse_correspondence_line(std::string_view line, const std::string& path,
                                                      std::size_t line_no) {
  const auto f = detail::split_fields(line);
  detail::expect_fields(f, 5, path, line_no);
  CorrespondenceRecord c;
  c.query_id = detail::parse_id(f[0], path, line_no, "query_id");
  c.element = make_element(detail::parse_double(f[1], path, line_no, "x"),
                           detail::parse_double(f[2], path, line_no, "y"));
  c.image_id = detail::parse_id(f[3], path, line_no, "image_id");
  c.ini_score = detail::parse_double(f[4], path, line_no, "ini_score");
  return c;
}

inline std::string format_correspondence_line(const CorrespondenceRecord& c) {
  std::string out = detail::check_id(c.query_id, "query_id");
  out += '\t';
  out += std::to_string(c.element.x);
  out += '\t';
  out += std::to_string(c.element.y);
  out += '\t';
  out += detail::check_id(c.image_id, "image_id");
  out += '\t';
  out += format_double(c.ini_score);
  return out;
}

// ---------------------------------------------------------------------------
// locations file: query_id  location_id  centroid_lat  centroid_lon  label  members
// members is a comma-joined list of image ids in retrieval-rank order.

inline std::pair<std::string, CandidateLocation> parse_location_line(std::string_view line,
                                                                     const std::string& path,
                                                                     std::size_t line_no) {
  const auto f = detail::split_fields(line);
  detail::expect_fields(f, 6, path, line_no);
  std::string query_id = detail::parse_id(f[0], path, line_no, "query_id");
  CandidateLocation loc;
  loc.location_id = detail::parse_id(f[1], path, line_no, "location_id");
  const bool has_lat = f[2] != kAbsent;
  const bool has_lon = f[3] != kAbsent;
  if (has_lat != has_lon) detail::fail(path, line_no, "centroid coordinates must both be present or both absent");
  if (has_lat) {
    loc.centroid = GeoPoint{detail::parse_double(f[2], path, line_no, "centroid_lat"),
                            detail::parse_double(f[3], path, line_no, "centroid_lon")};
  }
  if (f[4] != kAbsent) loc.label = detail::parse_id(f[4], path, line_no, "label");
  if (f[5].empty()) detail::fail(path, line_no, "location has no members");
  for (std::string_view member : detail::split_fields(f[5], ',')) {
    loc.members.push_back(detail::parse_id(member, path, line_no, "member image_id"));
  }
  return {std::move(query_id), std::move(loc)};
}

inline std::string format_location_line(const std::string& query_id, const CandidateLocation& loc) {
  std::string out = detail::check_id(query_id, "query_id");
  out += '\t';
  out += detail::check_id(loc.location_id, "location_id");
  out += '\t';
  out += loc.centroid ? format_double(loc.centroid->lat) : std::string(kAbsent);
  out += '\t';
  out += loc.centroid ? format_double(loc.centroid->lon) : std::string(kAbsent);
  out += '\t';
  out += loc.label ? detail::check_id(*loc.label, "label") : std::string(kAbsent);
  out += '\t';
  for (std::size_t i = 0; i < loc.members.size(); ++i) {
    if (i) out += ',';
    out += detail::check_id(loc.members[i], "member image_id");
  }
  return out;
}

// ---------------------------------------------------------------------------
// rankings file: query_id  method  rank  location_id  score  k
// estimates file: query_id  method  location_id  lat  lon  label

struct RankingRow {
  std::string query_id;
  std::string method;
  int rank = 0;
  std::string location_id;
  double score = 0.0;
  int matched_regions = 0;

  friend bool operator==(const RankingRow&, const RankingRow&) = default;
};

inline RankingRow parse_ranking_line(std::string_view line, const std::string& path,
                                     std::size_t line_no) {
  const auto f = detail::split_fields(line);
  detail::expect_fields(f, 6, path, line_no);
  RankingRow row;
  row.query_id = detail::parse_id(f[0], path, line_no, "query_id");
  row.method = detail::parse_id(f[1], path, line_no, "method");
  row.rank = detail::parse_int(f[2], path, line_no, "rank");
  row.location_id = detail::parse_id(f[3], path, line_no, "location_id");
  row.score = detail::parse_double(f[4], path, line_no, "score");
  row.matched_regions = detail::parse_int(f[5], path, line_no, "k");
  return row;
}

inline std::string format_ranking_line(const RankingRow& row) {
  std::string out = detail::check_id(row.query_id, "query_id");
  out += '\t';
  out += row.method;
  out += '\t';
  out += std::to_string(row.rank);
  out += '\t';
  out += detail::check_id(row.location_id, "location_id");
  out += '\t';
  out += format_double(row.score);
  out += '\t';
  out += std::to_string(row.matched_regions);
  return out;
}

inline std::vector<RankingRow> read_rankings(const std::string& path) {
  LineReader reader(path);
  std::vector<RankingRow> rows;
  std::string line;
  while (reader.next(line)) {
    rows.push_back(parse_ranking_line(line, reader.path(), reader.line_no()));
  }
  return rows;
}

inline void write_rankings(const std::string& path, std::span<const RankingRow> rows) {
  auto out = detail::open_output(path);
  for (const RankingRow& row : rows) out << format_ranking_line(row) << '\n';
}

struct EstimateRow {
  std::string query_id;
  std::string method;
  std::optional<std::string> location_id;  // absent = no estimate
  std::optional<GeoPoint> point;
  std::optional<std::string> label;

  friend bool operator==(const EstimateRow&, const EstimateRow&) = default;
};

inline EstimateRow parse_estimate_line(std::string_view line, const std::string& path,
                                       std::size_t line_no) {
  const auto f = detail::split_fields(line);
  detail::expect_fields(f, 6, path, line_no);
  EstimateRow row;
  row.query_id = detail::parse_id(f[0], path, line_no, "query_id");
  row.method = detail::parse_id(f[1], path, line_no, "method");
  if (f[2] != kAbsent) row.location_id = detail::parse_id(f[2], path, line_no, "location_id");
  const bool has_lat = f[3] != kAbsent;
  const bool has_lon = f[4] != kAbsent;
  if (has_lat != has_lon) detail::fail(path, line_no, "coordinates must both be present or both absent");
  if (has_lat) {
    row.point = GeoPoint{detail::parse_double(f[3], path, line_no, "lat"),
                         detail::parse_double(f[4], path, line_no, "lon")};
  }
  if (f[5] != kAbsent) row.label = detail::parse_id(f[5], path, line_no, "label");
  return row;
}

inline std::string format_estimate_line(const EstimateRow& row) {
  std::string out = detail::check_id(row.query_id, "query_id");
  out += '\t';
  out += row.method;
  out += '\t';
  out += row.location_id ? *row.location_id : std::string(kAbsent);
  out += '\t';
  out += row.point ? format_double(row.point->lat) : std::string(kAbsent);
  out += '\t';
  out += row.point ? format_double(row.point->lon) : std::string(kAbsent);
  out += '\t';
  out += row.label ? *row.label : std::string(kAbsent);
  return out;
}

inline std::vector<EstimateRow> read_estimates(const std::string& path) {
  LineReader reader(path);
  std::vector<EstimateRow> rows;
  std::string line;
  while (reader.next(line)) {
    rows.push_back(parse_estimate_line(line, reader.path(), reader.line_no()));
  }
  return rows;
}

inline void write_estimates(const std::string& path, std::span<const EstimateRow> rows) {
  auto out = detail::open_output(path);
  for (const EstimateRow& row : rows) out << format_estimate_line(row) << '\n';
}

// ---------------------------------------------------------------------------
// Dataset reading. The images and correspondences files must be grouped by
// query_id, with groups in the same order as the queries file; this is what
// lets the reader hold only one query's records at a time.

struct DatasetPaths {
  std::string queries;
  std::string images;
  std::string correspondences;
};

namespace detail {

template <typename Record>
class GroupedReader {
 public:
  GroupedReader(std::string path,
                std::function<std::pair<std::string, Record>(std::string_view, const std::string&, std::size_t)> parse)
      : reader_(std::move(path)), parse_(std::move(parse)) {}

  /// Appends all records of query_id's group (if it is next) to out. Returns
  /// the line number of each appended record in lines.
  void take_group(const std::string& query_id, std::vector<Record>& out,
                  std::vector<std::size_t>* lines) {
    for (;;) {
      if (!pending_) {
        std::string line;
        if (!reader_.next(line)) return;
        auto [qid, record] = parse_(line, reader_.path(), reader_.line_no());
        pending_.emplace(std::move(qid), std::move(record));
        pending_line_ = reader_.line_no();
      }
      if (pending_->first != query_id) {
        if (seen_.count(pending_->first)) {
          fail(reader_.path(), pending_line_,
               "records for query " + pending_->first + " are not contiguous");
        }
        return;
      }
      out.push_back(std::move(pending_->second));
      if (lines) lines->push_back(pending_line_);
      pending_.reset();
    }
  }

  void finish_group(const std::string& query_id) { seen_.insert(query_id); }

  void expect_exhausted() {
    if (pending_) {
      fail(reader_.path(), pending_line_, "records for unknown or out-of-order query " + pending_->first);
    }
    std::string line;
    if (reader_.next(line)) {
      auto [qid, record] = parse_(line, reader_.path(), reader_.line_no());
      fail(reader_.path(), reader_.line_no(), "records for unknown or out-of-order query " + qid);
    }
  }

 private:
  LineReader reader_;
  std::function<std::pair<std::string, Record>(std::string_view, const std::string&, std::size_t)> parse_;
  std::optional<std::pair<std::string, Record>> pending_;
  std::size_t pending_line_ = 0;
  std::unordered_set<std::string> seen_;
};

}  // namespace detail

struct LoadOptions {
  // When set, a correspondence referencing an image with no metadata raises
  // immediately with its line number instead of surfacing later through
  // validation. Off for the validate command, which wants the full report.
  bool strict_references = true;
};

/// Streams the dataset one query block at a time. Each block arrives with its
/// images sorted by retrieval rank.
inline void for_each_query_block(const DatasetPaths& paths,
                                 const std::function<void(QueryData&&)>& fn,
                                 const LoadOptions& options = {}) {
  std::vector<QueryMeta> queries;
  {
    LineReader reader(paths.queries);
    std::string line;
    std::unordered_set<std::string> seen;
    while (reader.next(line)) {
      QueryMeta q = parse_query_line(line, reader.path(), reader.line_no());
      if (!seen.insert(q.query_id).second) {
        detail::fail(reader.path(), reader.line_no(), "duplicate query_id " + q.query_id);
      }
      queries.push_back(std::move(q));
    }
  }

  detail::GroupedReader<ImageMeta> images(paths.images, parse_image_line);
  detail::GroupedReader<CorrespondenceRecord> correspondences(
      paths.correspondences,
      [](std::string_view line, const std::string& path, std::size_t line_no) {
        CorrespondenceRecord c = parse_correspondence_line(line, path, line_no);
        std::string qid = c.query_id;
        return std::pair<std::string, CorrespondenceRecord>(std::move(qid), std::move(c));
      });

  for (QueryMeta& meta : queries) {
    QueryData block;
    block.meta = std::move(meta);
    images.take_group(block.meta.query_id, block.images, nullptr);
    std::vector<std::size_t> lines;
    correspondences.take_group(block.meta.query_id, block.correspondences, &lines);
    images.finish_group(block.meta.query_id);
    correspondences.finish_group(block.meta.query_id);

    if (options.strict_references) {
      std::unordered_set<std::string_view> known;
      for (const ImageMeta& img : block.images) known.insert(img.image_id);
      for (std::size_t i = 0; i < block.correspondences.size(); ++i) {
        if (!known.count(block.correspondences[i].image_id)) {
          throw Error(Errc::kValidation,
                      paths.correspondences + ":" + std::to_string(lines[i]) +
                          ": correspondence references unknown image " +
                          block.correspondences[i].image_id);
        }
      }
    }
    std::sort(block.images.begin(), block.images.end(),
              [](const ImageMeta& a, const ImageMeta& b) { return a.retrieval_rank < b.retrieval_rank; });
    fn(std::move(block));
  }
  images.expect_exhausted();
  correspondences.expect_exhausted();
}

/// Loads and validates the whole dataset. Throws Errc::kValidation carrying
/// the full report when any invariant is violated.
inline Dataset load(const DatasetPaths& paths, const LoadOptions& options = {}) {
  Dataset dataset;
  for_each_query_block(paths, [&](QueryData&& block) { dataset.queries.push_back(std::move(block)); },
                       options);
  const ValidationReport report = validate_dataset(dataset);
  if (!report.accepted()) {
    throw Error(Errc::kValidation, "dataset rejected:\n" + report.to_string());
  }
  return dataset;
}

inline void write_dataset(const DatasetPaths& paths, std::span<const QueryData> queries) {
  auto q_out = detail::open_output(paths.queries);
  auto i_out = detail::open_output(paths.images);
  auto c_out = detail::open_output(paths.correspondences);
  for (const QueryData& q : queries) {
    q_out << format_query_line(q.meta) << '\n';
    for (const ImageMeta& img : q.images) i_out << format_image_line(q.meta.query_id, img) << '\n';
    for (const CorrespondenceRecord& c : q.correspondences) {
      c_out << format_correspondence_line(c) << '\n';
    }
  }
}

inline void write_locations(const std::string& path,
                            std::span<const std::pair<std::string, std::vector<CandidateLocation>>> per_query) {
  auto out = detail::open_output(path);
  for (const auto& [query_id, locations] : per_query) {
    for (const CandidateLocation& loc : locations) {
      out << format_location_line(query_id, loc) << '\n';
    }
  }
}

inline std::vector<std::pair<std::string, std::vector<CandidateLocation>>> read_locations(
    const std::string& path) {
  LineReader reader(path);
  std::vector<std::pair<std::string, std::vector<CandidateLocation>>> per_query;
  std::string line;
  while (reader.next(line)) {
    auto [query_id, loc] = parse_location_line(line, reader.path(), reader.line_no());
    if (per_query.empty() || per_query.back().first != query_id) {
      per_query.emplace_back(query_id, std::vector<CandidateLocation>{});
    }
    per_query.back().second.push_back(std::move(loc));
  }
  return per_query;
}

// ---------------------------------------------------------------------------
// Evaluation reports. report.csv is k,hit_rate; detail.csv is one row per
// query with a hit flag per requested K.

inline void write_eval_report(const std::string& report_path, const std::string& detail_path,
                              const EvalReport& report) {
  {
    auto out = detail::open_output(report_path);
    out << "k,hit_rate\n";
    for (const auto& [k, rate] : report.hit_rate) {
      out << k << ',' << format_double(rate) << '\n';
    }
  }
  {
    auto out = detail::open_output(detail_path);
    out << "query_id,has_estimate";
    for (const auto& [k, rate] : report.hit_rate) out << ",hit_at_" << k;
    out << '\n';
    for (const QueryOutcome& outcome : report.per_query) {
      out << outcome.query_id << ',' << (outcome.has_estimate ? 1 : 0);
      for (const auto& [k, hit] : outcome.hit) out << ',' << (hit ? 1 : 0);
      out << '\n';
    }
  }
}

// Diagnostic dumps for inspecting clouds and distinctiveness heatmaps.

inline void write_cloud_dump(std::ostream& out, const std::string& query_id,
                             std::span<const ElementCloud> clouds) {
  for (const ElementCloud& cloud : clouds) {
    for (const auto& [element, weights] : cloud.entries) {
      out << query_id << ',' << cloud.location_id << ',' << element.x << ',' << element.y << ','
          << weights.size() << ',' << format_double(weights.front()) << '\n';
    }
  }
}

inline void write_heatmap_dump(std::ostream& out, const std::string& query_id,
                               const DistinctivenessMap& map) {
  for (const auto& [region, stat] : map.regions) {
    out << query_id << ',' << region.rx << ',' << region.ry << ',' << stat.location_count << ','
        << format_double(stat.weight) << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON configuration. Unknown keys are rejected to keep typos loud.

inline Grouping grouping_by_name(const std::string& name) {
  if (name == "auto") return Grouping::kAuto;
  if (name == "label") return Grouping::kLabel;
  if (name == "geo") return Grouping::kGeo;
  throw Error(Errc::kConfig, "unknown grouping: " + name);
}

namespace detail {

inline nlohmann::json parse_json_file(const std::string& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, path + ": " + e.what());
  }
  return j;
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                                const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw Error(Errc::kConfig, path + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

/// Loads engine and evaluation settings from one JSON file. A "profile" key
/// applies a named preset first; any other key then overrides it.
inline void load_config_file(const std::string& path, Config& config, EvalConfig& eval) {
  const nlohmann::json j = detail::parse_json_file(path);
  if (!j.is_object()) throw Error(Errc::kConfig, path + ": expected a JSON object");
  detail::reject_unknown_keys(j,
                              {"profile", "a", "b", "theta", "delta", "top_n", "min_ini_score",
                               "cluster_radius_km", "log_base", "grouping", "eval"},
                              path);
  try {
    if (j.contains("profile")) config = profile_by_name(j["profile"].get<std::string>());
    if (j.contains("a")) config.distinct_grid = j["a"].get<int>();
    if (j.contains("b")) config.match_grid = j["b"].get<int>();
    if (j.contains("theta")) config.freq_cutoff = j["theta"].get<int>();
    if (j.contains("delta")) config.smooth_delta = j["delta"].get<double>();
    if (j.contains("top_n")) config.top_n = j["top_n"].get<int>();
    if (j.contains("min_ini_score")) config.min_ini_score = j["min_ini_score"].get<double>();
    if (j.contains("cluster_radius_km")) config.cluster_radius_km = j["cluster_radius_km"].get<double>();
    if (j.contains("log_base")) config.log_base = j["log_base"].get<double>();
    if (j.contains("grouping")) config.grouping = grouping_by_name(j["grouping"].get<std::string>());
    if (j.contains("eval")) {
      const nlohmann::json& e = j["eval"];
      detail::reject_unknown_keys(e, {"protocol", "r_eval_km", "k_values"}, path);
      if (e.contains("protocol")) eval.protocol = protocol_by_name(e["protocol"].get<std::string>());
      if (e.contains("r_eval_km")) eval.r_eval_km = e["r_eval_km"].get<double>();
      if (e.contains("k_values")) eval.k_values = e["k_values"].get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kConfig, path + ": " + e.what());
  }
  config.validate();
  eval.validate();
}

/// Scenario spec schema, all keys optional except where noted:
///   seed, query_id, n_locations, images_per_location [lo, hi],
///   true_location, n_distinctive_elements, n_confusing_elements, theta,
///   ini_score {min, max}, frame [w, h], mode ("label"|"geo"),
///   decoy {location, near_duplicates}
inline ScenarioSpec load_scenario_file(const std::string& path) {
  const nlohmann::json j = detail::parse_json_file(path);
  if (!j.is_object()) throw Error(Errc::kConfig, path + ": expected a JSON object");
  detail::reject_unknown_keys(j,
                              {"seed", "query_id", "n_locations", "images_per_location",
                               "true_location", "n_distinctive_elements", "n_confusing_elements",
                               "theta", "ini_score", "frame", "mode", "decoy"},
                              path);
  ScenarioSpec spec;
  try {
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("query_id")) spec.query_id = j["query_id"].get<std::string>();
    if (j.contains("n_locations")) spec.n_locations = j["n_locations"].get<int>();
    if (j.contains("images_per_location")) {
      const auto range = j["images_per_location"].get<std::vector<int>>();
      if (range.size() != 2) throw Error(Errc::kConfig, path + ": images_per_location must be [lo, hi]");
      spec.images_per_location_min = range[0];
      spec.images_per_location_max = range[1];
    }
    if (j.contains("true_location")) spec.true_location = j["true_location"].get<std::string>();
    if (j.contains("n_distinctive_elements")) spec.n_distinctive_elements = j["n_distinctive_elements"].get<int>();
    if (j.contains("n_confusing_elements")) spec.n_confusing_elements = j["n_confusing_elements"].get<int>();
    if (j.contains("theta")) spec.spread_theta = j["theta"].get<int>();
    if (j.contains("ini_score")) {
      const nlohmann::json& s = j["ini_score"];
      detail::reject_unknown_keys(s, {"min", "max"}, path);
      if (s.contains("min")) spec.ini_score_min = s["min"].get<double>();
      if (s.contains("max")) spec.ini_score_max = s["max"].get<double>();
    }
    if (j.contains("frame")) {
      const auto frame = j["frame"].get<std::vector<int>>();
      if (frame.size() != 2) throw Error(Errc::kConfig, path + ": frame must be [width, height]");
      spec.frame_width = frame[0];
      spec.frame_height = frame[1];
    }
    if (j.contains("mode")) {
      spec.mode = grouping_by_name(j["mode"].get<std::string>());
    }
    if (j.contains("decoy")) {
      const nlohmann::json& d = j["decoy"];
      detail::reject_unknown_keys(d, {"location", "near_duplicates"}, path);
      ScenarioSpec::Decoy decoy;
      decoy.location = d.at("location").get<std::string>();
      if (d.contains("near_duplicates")) decoy.near_duplicates = d["near_duplicates"].get<int>();
      spec.decoy = decoy;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kConfig, path + ": " + e.what());
  }
  return spec;
}

}  // namespace dvem::io
