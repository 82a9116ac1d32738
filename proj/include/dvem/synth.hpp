#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dvem/dataset.hpp"
#include "dvem/types.hpp"

namespace dvem {

/// Parameterized synthetic query scenario. Distinctive elements correspond
/// only into the true location; confusing elements correspond into at least
/// `spread_theta` locations. The optional decoy concentrates every confusing
/// element, at high scores, into one wrong location padded with
/// near-duplicate images.
struct ScenarioSpec {
  std::uint64_t seed = 1;
  std::string query_id;  // defaults to "q<seed>"
  int n_locations = 5;
  int images_per_location_min = 2;
  int images_per_location_max = 4;
  std::string true_location = "loc_000";
  int n_distinctive_elements = 8;
  int n_confusing_elements = 4;
  int spread_theta = 3;  // minimum locations per confusing element
  double ini_score_min = 4.0;
  double ini_score_max = 20.0;
  int frame_width = 640;
  int frame_height = 480;
  Grouping mode = Grouping::kLabel;  // kLabel or kGeo

  struct Decoy {
    std::string location;
    int near_duplicates = 6;
  };
  std::optional<Decoy> decoy;
};

struct Scenario {
  QueryData data;
  std::string true_location_id;
};

namespace synth_detail {

// Hand-rolled draws over mt19937_64 so that identical seeds give identical
// scenarios on every platform.
inline std::uint64_t draw_u64(std::mt19937_64& rng) { return rng(); }

inline int draw_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(draw_u64(rng) % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double draw_real(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(draw_u64(rng) >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

inline void shuffle(std::mt19937_64& rng, std::vector<int>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(draw_int(rng, 0, static_cast<int>(i) - 1))]);
  }
}

inline std::string location_id(int i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "loc_%03d", i);
  return buf;
}

}  // namespace synth_detail

inline void validate_spec(const ScenarioSpec& s) {
  auto reject = [](const std::string& why) { throw Error(Errc::kConfig, "infeasible scenario: " + why); };
  if (s.n_locations < 1) reject("n_locations must be >= 1");
  if (s.spread_theta < 1) reject("theta must be >= 1");
  if (s.spread_theta > s.n_locations) reject("theta exceeds n_locations");
  if (s.images_per_location_min < 1) reject("images_per_location minimum must be >= 1");
  if (s.images_per_location_max < s.images_per_location_min) reject("images_per_location range is empty");
  if (s.n_distinctive_elements < 0 || s.n_confusing_elements < 0) reject("element counts must be >= 0");
  if (s.frame_width < 1 || s.frame_height < 1) reject("frame must be at least 1x1");
  if (s.ini_score_min < 0.0) reject("ini_score range must be nonnegative");
  if (s.ini_score_max < s.ini_score_min) reject("ini_score range is empty");
  if (s.mode == Grouping::kAuto) reject("mode must be label or geo");
  const long long cells = static_cast<long long>(s.frame_width) * s.frame_height;
  if (s.n_distinctive_elements + s.n_confusing_elements > cells) reject("more elements than frame pixels");

  bool true_found = false;
  bool decoy_found = false;
  for (int i = 0; i < s.n_locations; ++i) {
    const std::string id = synth_detail::location_id(i);
    if (id == s.true_location) true_found = true;
    if (s.decoy && id == s.decoy->location) decoy_found = true;
  }
  if (!true_found) reject("true_location " + s.true_location + " is not among the generated ids");
  if (s.decoy) {
    if (!decoy_found) reject("decoy location " + s.decoy->location + " is not among the generated ids");
    if (s.decoy->location == s.true_location) reject("decoy location must differ from the true location");
    if (s.decoy->near_duplicates < 1) reject("near_duplicates must be >= 1");
  }
}

/// Deterministically expands a spec into one query's dataset. Identical seeds
/// give byte-identical output.
inline Scenario generate(const ScenarioSpec& spec) {
  validate_spec(spec);
  std::mt19937_64 rng(spec.seed);
  using namespace synth_detail;

  Scenario out;
  out.true_location_id = spec.true_location;
  QueryData& data = out.data;
  data.meta.query_id = spec.query_id.empty() ? "q" + std::to_string(spec.seed) : spec.query_id;
  data.meta.width = spec.frame_width;
  data.meta.height = spec.frame_height;

  int true_index = 0;
  int decoy_index = -1;
  std::vector<GeoPoint> centers(spec.n_locations);
  for (int i = 0; i < spec.n_locations; ++i) {
    centers[i] = GeoPoint{-60.0 + (i % 120) * 1.0, -170.0 + (i / 120) * 10.0};
    if (location_id(i) == spec.true_location) true_index = i;
    if (spec.decoy && location_id(i) == spec.decoy->location) decoy_index = i;
  }
  if (spec.mode == Grouping::kLabel) {
    data.meta.truth_label = spec.true_location;
  } else {
    data.meta.truth_point = centers[true_index];
  }

  // Images per location; the decoy gets its near-duplicates on top.
  std::vector<std::vector<std::string>> members(spec.n_locations);
  for (int i = 0; i < spec.n_locations; ++i) {
    int count = draw_int(rng, spec.images_per_location_min, spec.images_per_location_max);
    if (i == decoy_index) count += spec.decoy->near_duplicates;
    for (int j = 0; j < count; ++j) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "img_%03d_%02d", i, j);
      ImageMeta img;
      img.image_id = buf;
      if (spec.mode == Grouping::kLabel) {
        img.label = location_id(i);
      } else {
        img.geo = GeoPoint{centers[i].lat + draw_real(rng, -0.002, 0.002),
                           centers[i].lon + draw_real(rng, -0.002, 0.002)};
      }
      members[i].push_back(img.image_id);
      data.images.push_back(std::move(img));
    }
  }

  // Distinct element positions, drawn once for both element roles.
  std::set<ElementKey> used;
  auto draw_element = [&]() {
    for (;;) {
      ElementKey e{draw_int(rng, 0, spec.frame_width - 1), draw_int(rng, 0, spec.frame_height - 1)};
      if (used.insert(e).second) return e;
    }
  };

  std::unordered_map<std::string, double> score_sum;
  auto add_correspondence = [&](const ElementKey& e, const std::string& image_id, double score) {
    data.correspondences.push_back({data.meta.query_id, e, image_id, score});
    score_sum[image_id] += score;
  };

  // Distinctive elements: correspondences only into the true location.
  for (int d = 0; d < spec.n_distinctive_elements; ++d) {
    const ElementKey e = draw_element();
    bool any = false;
    for (const std::string& image_id : members[true_index]) {
      if (draw_real(rng, 0.0, 1.0) < 0.6) {
        add_correspondence(e, image_id, draw_real(rng, spec.ini_score_min, spec.ini_score_max));
        any = true;
      }
    }
    if (!any) {
      add_correspondence(e, members[true_index].front(),
                         draw_real(rng, spec.ini_score_min, spec.ini_score_max));
    }
  }

  // Confusing elements: each touches at least spread_theta locations. With a
  // decoy, every confusing element hits every decoy image with one shared
  // high score, making those images near-duplicates of each other.
  std::vector<int> location_order(spec.n_locations);
  for (int i = 0; i < spec.n_locations; ++i) location_order[i] = i;
  const double upper_band = spec.ini_score_min + 0.75 * (spec.ini_score_max - spec.ini_score_min);
  for (int c = 0; c < spec.n_confusing_elements; ++c) {
    const ElementKey e = draw_element();
    const int spread = draw_int(rng, spec.spread_theta, spec.n_locations);
    shuffle(rng, location_order);
    std::vector<int> chosen(location_order.begin(), location_order.begin() + spread);
    if (decoy_index >= 0 && std::find(chosen.begin(), chosen.end(), decoy_index) == chosen.end()) {
      chosen.back() = decoy_index;
    }
    for (int loc : chosen) {
      if (loc == decoy_index) {
        const double score = draw_real(rng, upper_band, spec.ini_score_max);
        for (const std::string& image_id : members[loc]) add_correspondence(e, image_id, score);
      } else {
        const int pick = draw_int(rng, 0, static_cast<int>(members[loc].size()) - 1);
        add_correspondence(e, members[loc][pick],
                           draw_real(rng, spec.ini_score_min, spec.ini_score_max));
      }
    }
  }

  // Image-level similarity follows the correspondence evidence; always
  // positive so every image can participate in similarity-sum ranking.
  for (ImageMeta& img : data.images) {
    img.similarity = 0.1 + score_sum[img.image_id] / 10.0;
  }
  std::sort(data.images.begin(), data.images.end(), [](const ImageMeta& a, const ImageMeta& b) {
    if (*a.similarity != *b.similarity) return *a.similarity > *b.similarity;
    return a.image_id < b.image_id;
  });
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    data.images[i].retrieval_rank = static_cast<int>(i) + 1;
  }
  return out;
}

}  // namespace dvem
