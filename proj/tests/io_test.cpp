#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dvem/io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace dvem {
namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dvem_io_test_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  io::DatasetPaths paths() const {
    return {path("queries.tsv"), path("images.tsv"), path("correspondences.tsv")};
  }

  void write_file(const std::string& name, const std::string& content) {
    std::ofstream out(path(name));
    out << content;
  }

  fs::path dir_;
};

TEST_F(IoTest, DatasetRoundTrip) {
  std::vector<QueryData> queries;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    queries.push_back(generate(testutil::spec_for_seed(seed)).data);
  }
  io::write_dataset(paths(), queries);
  const Dataset loaded = io::load(paths());

  ASSERT_EQ(loaded.queries.size(), queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const QueryData& a = queries[i];
    const QueryData& b = loaded.queries[i];
    EXPECT_EQ(a.meta.query_id, b.meta.query_id);
    EXPECT_EQ(a.meta.width, b.meta.width);
    EXPECT_EQ(a.meta.truth_label, b.meta.truth_label);
    if (a.meta.truth_point) {
      EXPECT_EQ(a.meta.truth_point->lat, b.meta.truth_point->lat);  // exact round trip
      EXPECT_EQ(a.meta.truth_point->lon, b.meta.truth_point->lon);
    }
    ASSERT_EQ(a.images.size(), b.images.size());
    for (std::size_t j = 0; j < a.images.size(); ++j) {
      EXPECT_EQ(a.images[j].image_id, b.images[j].image_id);
      EXPECT_EQ(a.images[j].retrieval_rank, b.images[j].retrieval_rank);
      EXPECT_EQ(a.images[j].similarity, b.images[j].similarity);
      EXPECT_EQ(a.images[j].geo, b.images[j].geo);
      EXPECT_EQ(a.images[j].label, b.images[j].label);
    }
    ASSERT_EQ(a.correspondences.size(), b.correspondences.size());
    for (std::size_t j = 0; j < a.correspondences.size(); ++j) {
      EXPECT_EQ(a.correspondences[j].element, b.correspondences[j].element);
      EXPECT_EQ(a.correspondences[j].ini_score, b.correspondences[j].ini_score);
    }
  }
}

TEST_F(IoTest, RankingsRoundTripExactly) {
  std::vector<io::RankingRow> rows{
      {"q1", "dvem", 1, "loc_a", 1.9698573570646258, 3},
      {"q1", "dvem", 2, "loc_b", 0.0, 0},
      {"q2", "gvr", 1, "g0001", 123.456, 0},
      {"q2", "gvr", 2, "g0000", 1e-17, 0},
  };
  io::write_rankings(path("rankings.tsv"), rows);
  EXPECT_EQ(io::read_rankings(path("rankings.tsv")), rows);
}

TEST_F(IoTest, EstimatesRoundTrip) {
  std::vector<io::EstimateRow> rows{
      {"q1", "dvem", "loc_a", GeoPoint{52.0, 4.3}, std::nullopt},
      {"q2", "dvem", std::nullopt, std::nullopt, std::nullopt},  // no estimate
      {"q3", "visnn", "B", std::nullopt, "B"},
  };
  io::write_estimates(path("estimates.tsv"), rows);
  EXPECT_EQ(io::read_estimates(path("estimates.tsv")), rows);
}

TEST_F(IoTest, ParseErrorsCarryLineNumbers) {
  write_file("queries.tsv", "q1\t640\t480\t-\t-\t-\n");
  write_file("images.tsv", "q1\timg1\t1\t1.0\t-\t-\tA\n");
  write_file("correspondences.tsv", "q1\t10\t20\timg1\t5.0\nq1\tbroken\t20\timg1\t1.0\n");
  try {
    io::load(paths());
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kParse);
    EXPECT_NE(std::string(e.what()).find("correspondences.tsv:2"), std::string::npos);
  }
}

TEST_F(IoTest, UnknownImageReferenceNamesIdAndLine) {
  write_file("queries.tsv", "q1\t640\t480\t-\t-\t-\n");
  write_file("images.tsv", "q1\timg1\t1\t1.0\t-\t-\tA\n");
  write_file("correspondences.tsv", "q1\t10\t20\timg1\t5.0\nq1\t11\t21\timg_ghost\t1.0\n");
  try {
    io::load(paths());
    FAIL() << "expected reference error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kValidation);
    const std::string what = e.what();
    EXPECT_NE(what.find("img_ghost"), std::string::npos);
    EXPECT_NE(what.find(":2"), std::string::npos);
  }
}

TEST_F(IoTest, DuplicateQueryIdRejectedAtLoad) {
  write_file("queries.tsv", "q1\t640\t480\t-\t-\t-\nq1\t640\t480\t-\t-\t-\n");
  write_file("images.tsv", "");
  write_file("correspondences.tsv", "");
  EXPECT_THROW(io::load(paths()), Error);
}

TEST_F(IoTest, NonContiguousBlocksRejected) {
  write_file("queries.tsv", "q1\t640\t480\t-\t-\t-\nq2\t640\t480\t-\t-\t-\n");
  write_file("images.tsv",
             "q1\timg1\t1\t1.0\t-\t-\tA\n"
             "q2\timg2\t1\t1.0\t-\t-\tA\n"
             "q1\timg3\t2\t1.0\t-\t-\tA\n");
  write_file("correspondences.tsv", "");
  EXPECT_THROW(io::load(paths()), Error);
}

TEST_F(IoTest, ValidationFailuresSurfaceWithReport) {
  write_file("queries.tsv", "q1\t640\t480\t-\t-\t-\n");
  write_file("images.tsv", "q1\timg1\t1\t1.0\t-\t-\tA\n");
  // x = 640 is outside the frame.
  write_file("correspondences.tsv", "q1\t640\t20\timg1\t5.0\n");
  try {
    io::load(paths());
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kValidation);
    EXPECT_NE(std::string(e.what()).find("element_out_of_frame"), std::string::npos);
  }
}

TEST_F(IoTest, CommentsAndBlankLinesSkipped) {
  write_file("queries.tsv", "# comment\n\nq1\t640\t480\tA\t-\t-\n");
  write_file("images.tsv", "q1\timg1\t1\t1.0\t-\t-\tA\n");
  write_file("correspondences.tsv", "# none\n");
  const Dataset d = io::load(paths());
  ASSERT_EQ(d.queries.size(), 1u);
  EXPECT_EQ(d.queries[0].meta.truth_label, "A");
}

TEST_F(IoTest, SubPixelPositionsRoundHalfUp) {
  write_file("queries.tsv", "q1\t640\t480\t-\t-\t-\n");
  write_file("images.tsv", "q1\timg1\t1\t1.0\t-\t-\tA\n");
  write_file("correspondences.tsv", "q1\t10.5\t20.4\timg1\t5.0\n");
  const Dataset d = io::load(paths());
  EXPECT_EQ(d.queries[0].correspondences[0].element, (ElementKey{11, 20}));
}

TEST_F(IoTest, ScenarioSpecFromJson) {
  write_file("scenario.json", R"({
    "seed": 9,
    "n_locations": 4,
    "images_per_location": [2, 3],
    "true_location": "loc_002",
    "n_distinctive_elements": 5,
    "n_confusing_elements": 2,
    "theta": 3,
    "ini_score": {"min": 4.0, "max": 18.0},
    "frame": [800, 600],
    "mode": "geo",
    "decoy": {"location": "loc_001", "near_duplicates": 4}
  })");
  const ScenarioSpec spec = io::load_scenario_file(path("scenario.json"));
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_EQ(spec.n_locations, 4);
  EXPECT_EQ(spec.true_location, "loc_002");
  EXPECT_EQ(spec.spread_theta, 3);
  EXPECT_EQ(spec.frame_width, 800);
  EXPECT_EQ(spec.mode, Grouping::kGeo);
  ASSERT_TRUE(spec.decoy);
  EXPECT_EQ(spec.decoy->near_duplicates, 4);

  write_file("bad.json", R"({"seeed": 1})");
  EXPECT_THROW(io::load_scenario_file(path("bad.json")), Error);
}

TEST_F(IoTest, ConfigFileWithProfileAndOverrides) {
  write_file("config.json", R"({
    "profile": "geo-unconstrained",
    "theta": 4,
    "min_ini_score": 4.0,
    "eval": {"protocol": "radius", "r_eval_km": 2.5, "k_values": [1, 3]}
  })");
  Config config;
  EvalConfig eval;
  io::load_config_file(path("config.json"), config, eval);
  EXPECT_EQ(config.distinct_grid, 0);   // from the profile
  EXPECT_EQ(config.match_grid, 30);     // from the profile
  EXPECT_EQ(config.freq_cutoff, 4);     // overridden
  EXPECT_EQ(config.min_ini_score, 4.0);
  EXPECT_EQ(eval.protocol, Protocol::kRadius);
  EXPECT_EQ(eval.r_eval_km, 2.5);
  EXPECT_EQ(eval.k_values, (std::vector<int>{1, 3}));

  write_file("bad_key.json", R"({"theta_typo": 4})");
  EXPECT_THROW(io::load_config_file(path("bad_key.json"), config, eval), Error);

  write_file("bad_value.json", R"({"delta": 0.0})");
  EXPECT_THROW(io::load_config_file(path("bad_value.json"), config, eval), Error);
}

}  // namespace
}  // namespace dvem
