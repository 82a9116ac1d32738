#include <gtest/gtest.h>

#include <set>

#include "dvem/synth.hpp"
#include "test_util.hpp"

namespace dvem {
namespace {

TEST(Generate, SameSeedIsIdentical) {
  for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
    const ScenarioSpec spec = testutil::spec_for_seed(seed);
    const Scenario a = generate(spec);
    const Scenario b = generate(spec);
    ASSERT_EQ(a.data.images.size(), b.data.images.size());
    ASSERT_EQ(a.data.correspondences.size(), b.data.correspondences.size());
    for (std::size_t i = 0; i < a.data.images.size(); ++i) {
      EXPECT_EQ(a.data.images[i].image_id, b.data.images[i].image_id);
      EXPECT_EQ(a.data.images[i].retrieval_rank, b.data.images[i].retrieval_rank);
      EXPECT_EQ(a.data.images[i].similarity, b.data.images[i].similarity);
      EXPECT_EQ(a.data.images[i].geo, b.data.images[i].geo);
      EXPECT_EQ(a.data.images[i].label, b.data.images[i].label);
    }
    for (std::size_t i = 0; i < a.data.correspondences.size(); ++i) {
      EXPECT_EQ(a.data.correspondences[i].element, b.data.correspondences[i].element);
      EXPECT_EQ(a.data.correspondences[i].image_id, b.data.correspondences[i].image_id);
      EXPECT_EQ(a.data.correspondences[i].ini_score, b.data.correspondences[i].ini_score);
    }
  }
}

TEST(Generate, RejectsInfeasibleSpecs) {
  ScenarioSpec spec;
  spec.spread_theta = 6;
  spec.n_locations = 5;  // theta > n_locations
  EXPECT_THROW(generate(spec), Error);

  spec = ScenarioSpec{};
  spec.true_location = "loc_999";
  spec.n_locations = 3;
  EXPECT_THROW(generate(spec), Error);

  spec = ScenarioSpec{};
  spec.images_per_location_min = 3;
  spec.images_per_location_max = 2;
  EXPECT_THROW(generate(spec), Error);

  spec = ScenarioSpec{};
  spec.decoy = ScenarioSpec::Decoy{spec.true_location, 4};
  EXPECT_THROW(generate(spec), Error);
}

// Distinctive elements touch only the true location; confusing elements touch
// at least spread_theta locations, so under per-element regions their
// distinctiveness is zero whenever the cutoff is at most spread_theta.
TEST(Generate, ConfusingElementsAreFrequentByConstruction) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ScenarioSpec spec = testutil::spec_for_seed(seed);
    spec.n_confusing_elements = 5;
    spec.n_distinctive_elements = 5;
    const Scenario scenario = generate(spec);
    const auto locations = extract_locations(scenario.data.images, Grouping::kAuto, 1.0);

    Config config;
    config.distinct_grid = 0;  // per-element regions
    config.freq_cutoff = spec.spread_theta;
    const auto clouds = build_clouds(locations, scenario.data.correspondences, config);
    const RegionGrid grid = RegionGrid::build(spec.frame_width, spec.frame_height, 0);
    const DistinctivenessMap distinct =
        build_distinctiveness(grid, clouds, config.freq_cutoff, config.log_base);

    // Which elements correspond into which locations, from the raw records.
    std::map<ElementKey, std::set<std::string>> element_locations;
    std::unordered_map<std::string, std::string> owner;
    for (const CandidateLocation& loc : locations) {
      for (const std::string& m : loc.members) owner[m] = loc.location_id;
    }
    for (const CorrespondenceRecord& c : scenario.data.correspondences) {
      element_locations[c.element].insert(owner.at(c.image_id));
    }

    for (const auto& [element, locs] : element_locations) {
      const RegionStat& stat = distinct.stat_for(grid.region_of(element));
      EXPECT_EQ(stat.location_count, static_cast<int>(locs.size()));
      if (static_cast<int>(locs.size()) >= spec.spread_theta) {
        EXPECT_DOUBLE_EQ(stat.weight, 0.0);
      }
      // An element confined to the true location has count 1.
      if (locs.size() == 1 && *locs.begin() == scenario.true_location_id) {
        EXPECT_EQ(stat.location_count, 1);
      }
    }
  }
}

// Without confusing elements every ranker puts the true location first.
TEST(Generate, CleanScenarioRankedCorrectlyByAllMethods) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioSpec spec = testutil::spec_for_seed(seed);
    spec.n_confusing_elements = 0;
    spec.n_distinctive_elements = 6;
    spec.decoy.reset();
    const Scenario scenario = generate(spec);
    const Config config = testutil::config_for_seed(seed);
    const auto locations = extract_locations(scenario.data.images, Grouping::kAuto, 1.0);

    const auto dvem_scores =
        score_query(scenario.data.meta, locations, scenario.data.correspondences, config);
    ASSERT_FALSE(dvem_scores.empty());

    std::string true_id = scenario.true_location_id;
    if (spec.mode == Grouping::kGeo) {
      // Geo mode: the true location's id is the cluster holding its images.
      std::unordered_map<std::string, std::string> owner;
      for (const CandidateLocation& loc : locations) {
        for (const std::string& m : loc.members) owner[m] = loc.location_id;
      }
      for (const ImageMeta& img : scenario.data.images) {
        // All true-location images share the "img_<index>_" prefix of the
        // first correspondence target.
        if (img.image_id == scenario.data.correspondences.front().image_id) {
          true_id = owner.at(img.image_id);
        }
      }
    }
    EXPECT_EQ(dvem_scores.front().location_id, true_id) << "seed " << seed;
    EXPECT_EQ(visnn(scenario.data.images, locations).ranked.front().location_id, true_id);
    EXPECT_EQ(gvr(scenario.data.images, locations).ranked.front().location_id, true_id);
  }
}

// The decoy construction reproduces the documented failure mode of
// similarity-sum ranking: the decoy wins on summed similarity while the
// element-cloud ranker stays with the true location.
TEST(Generate, DecoyScenarioSplitsTheRankers) {
  ScenarioSpec spec;
  spec.seed = 20210;
  spec.n_locations = 8;
  spec.images_per_location_min = 2;
  spec.images_per_location_max = 4;
  spec.true_location = "loc_000";
  spec.n_distinctive_elements = 12;
  spec.n_confusing_elements = 6;
  spec.spread_theta = 5;
  spec.mode = Grouping::kLabel;
  spec.decoy = ScenarioSpec::Decoy{"loc_001", 8};

  const Scenario scenario = generate(spec);
  const auto locations = extract_locations(scenario.data.images, Grouping::kAuto, 1.0);
  const Config config = geo_constrained_profile();

  const auto dvem_scores =
      score_query(scenario.data.meta, locations, scenario.data.correspondences, config);
  const auto gvr_scores = gvr(scenario.data.images, locations);
  EXPECT_EQ(dvem_scores.front().location_id, "loc_000");
  EXPECT_EQ(gvr_scores.ranked.front().location_id, "loc_001");
}

}  // namespace
}  // namespace dvem
