#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace dvem {

// Error categories, mapped 1:1 to CLI exit codes.
enum class Errc : int {
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kConfig = 4,
  kInternal = 5,
  kMismatch = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool valid_latlon(const GeoPoint& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

/// Identity of a query visual element: its pixel position in the query frame.
/// Sub-pixel detector output is rounded half-up once, at ingestion.
struct ElementKey {
  std::int32_t x = 0;
  std::int32_t y = 0;

  auto operator<=>(const ElementKey&) const = default;
};

inline ElementKey make_element(double x, double y) {
  return ElementKey{static_cast<std::int32_t>(std::floor(x + 0.5)),
                    static_cast<std::int32_t>(std::floor(y + 0.5))};
}

struct ElementKeyHash {
  std::size_t operator()(const ElementKey& e) const {
    std::uint64_t v = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.x)) << 32) |
                      static_cast<std::uint32_t>(e.y);
    return std::hash<std::uint64_t>{}(v);
  }
};

struct QueryMeta {
  std::string query_id;
  int width = 0;   // pixels, >= 1
  int height = 0;  // pixels, >= 1
  std::optional<std::string> truth_label;
  std::optional<GeoPoint> truth_point;

  bool has_truth() const { return truth_label.has_value() || truth_point.has_value(); }
};

/// One entry of a query's ranked candidate list. Geo coordinates and a
/// discrete location label are alternatives; exactly one must be present.
struct ImageMeta {
  std::string image_id;
  std::optional<GeoPoint> geo;
  std::optional<std::string> label;
  int retrieval_rank = 0;  // 1-based position in the initial visual ranking
  std::optional<double> similarity;  // image-level similarity to the query
};

/// One geometrically verified match between a query element and a database
/// image. At most one correspondence per (element, image) pair.
struct CorrespondenceRecord {
  std::string query_id;
  ElementKey element;
  std::string image_id;
  double ini_score = 0.0;  // raw verifier score, >= 0
};

enum class Grouping {
  kAuto,   // label when every candidate carries one, geo otherwise
  kLabel,
  kGeo,
};

struct Config {
  int distinct_grid = 10;   // region parameter a; 0 = per-element regions
  int match_grid = 20;      // region parameter b; 0 = all elements kept
  int freq_cutoff = 5;      // theta; regions matched by >= theta locations score zero
  double smooth_delta = 5.0;
  int top_n = 1000;
  double min_ini_score = 0.0;
  double cluster_radius_km = 1.0;
  double log_base = std::numbers::e;  // affects absolute scores only, never ranking
  Grouping grouping = Grouping::kAuto;

  void validate() const {
    if (distinct_grid < 0) throw Error(Errc::kConfig, "a must be >= 0");
    if (match_grid < 0) throw Error(Errc::kConfig, "b must be >= 0");
    if (freq_cutoff < 1) throw Error(Errc::kConfig, "theta must be >= 1");
    if (!(smooth_delta > 0.0)) throw Error(Errc::kConfig, "delta must be > 0");
    if (top_n < 1) throw Error(Errc::kConfig, "top_n must be >= 1");
    if (min_ini_score < 0.0) throw Error(Errc::kConfig, "min_ini_score must be >= 0");
    if (!(cluster_radius_km > 0.0)) throw Error(Errc::kConfig, "cluster_radius_km must be > 0");
    if (!(log_base > 0.0) || log_base == 1.0) throw Error(Errc::kConfig, "log_base must be > 0 and != 1");
  }
};

// Named presets for the two operating points the engine ships with.
inline Config geo_constrained_profile() {
  Config c;
  c.distinct_grid = 10;
  c.match_grid = 20;
  c.freq_cutoff = 5;
  return c;
}

inline Config geo_unconstrained_profile() {
  Config c;
  c.distinct_grid = 0;
  c.match_grid = 30;
  c.freq_cutoff = 6;
  return c;
}

inline Config profile_by_name(const std::string& name) {
  if (name == "geo-constrained") return geo_constrained_profile();
  if (name == "geo-unconstrained") return geo_unconstrained_profile();
  throw Error(Errc::kConfig, "unknown profile: " + name);
}

}  // namespace dvem
