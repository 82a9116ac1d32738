#include <gtest/gtest.h>

#include "dvem/evaluation.hpp"
#include "test_util.hpp"

namespace dvem {
namespace {

CandidateLocation labeled(const std::string& id) {
  CandidateLocation loc;
  loc.location_id = id;
  loc.label = id;
  loc.members = {id + "_img"};
  return loc;
}

CandidateLocation located(const std::string& id, GeoPoint centroid) {
  CandidateLocation loc;
  loc.location_id = id;
  loc.centroid = centroid;
  loc.members = {id + "_img"};
  return loc;
}

TEST(HitAtK, LabelProtocolChecksTopK) {
  const std::vector<CandidateLocation> ranked{labeled("A"), labeled("B"), labeled("C")};
  QueryMeta query{"q", 100, 100, "B", std::nullopt};
  EvalConfig cfg;
  cfg.protocol = Protocol::kLabel;
  EXPECT_FALSE(hit_at_k(ranked, query, 1, cfg));
  EXPECT_TRUE(hit_at_k(ranked, query, 2, cfg));
  EXPECT_TRUE(hit_at_k(ranked, query, 3, cfg));
}

TEST(HitAtK, LabelThroughMemberImages) {
  CandidateLocation loc;  // geo-style location whose members carry labels
  loc.location_id = "g0";
  loc.members = {"img1", "img2"};
  QueryMeta query{"q", 100, 100, "B", std::nullopt};
  EvalConfig cfg;
  cfg.protocol = Protocol::kLabel;
  const ImageLabelLookup labels{{"img2", "B"}};
  EXPECT_TRUE(hit_at_k(std::vector<CandidateLocation>{loc}, query, 1, cfg, labels));
  EXPECT_FALSE(hit_at_k(std::vector<CandidateLocation>{loc}, query, 1, cfg, {}));
}

TEST(HitAtK, RadiusProtocolUsesCentroidDistance) {
  EvalConfig cfg;
  cfg.protocol = Protocol::kRadius;
  cfg.r_eval_km = 1.0;
  QueryMeta query{"q", 100, 100, std::nullopt, GeoPoint{10.0, 10.0}};

  // Truth exactly at the top-1 centroid.
  EXPECT_TRUE(hit_at_k(std::vector<CandidateLocation>{located("A", {10.0, 10.0})}, query, 1, cfg));

  // Centroid ~1.2 km away: 1.2 km along the equator-scaled parallel.
  const double deg = 1.2 / 111.19492664455873 / std::cos(10.0 * std::numbers::pi / 180.0);
  const std::vector<CandidateLocation> far{located("A", {10.0, 10.0 + deg})};
  EXPECT_FALSE(hit_at_k(far, query, 1, cfg));
  cfg.r_eval_km = 1.5;
  EXPECT_TRUE(hit_at_k(far, query, 1, cfg));
}

TEST(HitAtK, LocationWithoutCentroidCannotHitRadius) {
  EvalConfig cfg;
  cfg.protocol = Protocol::kRadius;
  QueryMeta query{"q", 100, 100, std::nullopt, GeoPoint{10.0, 10.0}};
  EXPECT_FALSE(hit_at_k(std::vector<CandidateLocation>{labeled("A")}, query, 1, cfg));
}

TEST(HitRate, MeanOfBooleans) {
  bool raw[4] = {true, false, true, false};
  EXPECT_DOUBLE_EQ(hit_rate(std::span<const bool>(raw, 4)), 0.5);
  bool all_miss[3] = {false, false, false};
  EXPECT_DOUBLE_EQ(hit_rate(std::span<const bool>(all_miss, 3)), 0.0);
  bool one_hit[1] = {true};
  EXPECT_DOUBLE_EQ(hit_rate(std::span<const bool>(one_hit, 1)), 1.0);
  EXPECT_THROW(hit_rate(std::span<const bool>()), Error);
}

// Hand-built four-query fixture: hits at ranks 1, 2, miss, and no estimate.
// HR@1 = 1/4, HR@2 = 2/4.
TEST(Evaluate, FourQueryFixtureByHand) {
  EvalConfig cfg;
  cfg.protocol = Protocol::kLabel;
  cfg.k_values = {1, 2};

  std::vector<QueryMeta> metas{
      {"q1", 10, 10, "A", std::nullopt},
      {"q2", 10, 10, "A", std::nullopt},
      {"q3", 10, 10, "A", std::nullopt},
      {"q4", 10, 10, "A", std::nullopt},
  };
  std::vector<RankedQuery> queries(4);
  queries[0].query = &metas[0];
  queries[0].ranked = {labeled("A"), labeled("B")};
  queries[1].query = &metas[1];
  queries[1].ranked = {labeled("B"), labeled("A")};
  queries[2].query = &metas[2];
  queries[2].ranked = {labeled("B"), labeled("C")};
  queries[3].query = &metas[3];
  queries[3].ranked = {};  // no estimate counts as a miss at every K

  const EvalReport report = evaluate(queries, cfg);
  EXPECT_DOUBLE_EQ(report.hit_rate.at(1), 0.25);
  EXPECT_DOUBLE_EQ(report.hit_rate.at(2), 0.5);
  EXPECT_EQ(report.no_estimate, 1u);
  ASSERT_EQ(report.per_query.size(), 4u);
  EXPECT_TRUE(report.per_query[0].hit.at(1));
  EXPECT_FALSE(report.per_query[1].hit.at(1));
  EXPECT_TRUE(report.per_query[1].hit.at(2));
  EXPECT_FALSE(report.per_query[3].has_estimate);
}

// HR@K never decreases in K, and radius hits never decrease in r_eval.
TEST(Evaluate, MonotoneInKAndRadius) {
  std::vector<QueryMeta> metas;
  std::vector<std::vector<CandidateLocation>> rankings;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioSpec spec = testutil::spec_for_seed(seed);
    spec.mode = Grouping::kGeo;
    const Scenario scenario = generate(spec);
    const auto locations = extract_locations(scenario.data.images, Grouping::kGeo, 1.0);
    const auto scores = score_query(scenario.data.meta, locations, scenario.data.correspondences,
                                    testutil::config_for_seed(seed));
    std::vector<CandidateLocation> ranked;
    for (const LocationScore& s : scores) {
      for (const CandidateLocation& loc : locations) {
        if (loc.location_id == s.location_id) ranked.push_back(loc);
      }
    }
    metas.push_back(scenario.data.meta);
    rankings.push_back(std::move(ranked));
  }
  std::vector<RankedQuery> queries(metas.size());
  for (std::size_t i = 0; i < metas.size(); ++i) {
    queries[i].query = &metas[i];
    queries[i].ranked = rankings[i];
  }

  EvalConfig cfg;
  cfg.protocol = Protocol::kRadius;
  cfg.k_values = {1, 2, 3, 5, 8, 13, 21};
  double previous_rate = -1.0;
  for (int k : cfg.k_values) {
    EvalConfig single = cfg;
    single.k_values = {k};
    const EvalReport report = evaluate(queries, single);
    EXPECT_GE(report.hit_rate.at(k), previous_rate);
    previous_rate = report.hit_rate.at(k);
  }

  double previous_radius_rate = -1.0;
  for (double r : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    EvalConfig single = cfg;
    single.k_values = {3};
    single.r_eval_km = r;
    const EvalReport report = evaluate(queries, single);
    EXPECT_GE(report.hit_rate.at(3), previous_radius_rate);
    previous_radius_rate = report.hit_rate.at(3);
  }
}

// When labels coincide with well-separated geo clusters, the two protocols
// agree for radii below the inter-cluster spacing.
TEST(Evaluate, ProtocolsAgreeOnSeparatedClusters) {
  // Three locations ~111 km apart; truth is B.
  std::vector<CandidateLocation> ranked_label{labeled("A"), labeled("B")};
  std::vector<CandidateLocation> ranked_geo{located("A", {0.0, 0.0}), located("B", {1.0, 0.0})};

  QueryMeta label_query{"q", 10, 10, "B", std::nullopt};
  QueryMeta geo_query{"q", 10, 10, std::nullopt, GeoPoint{1.0, 0.0}};

  EvalConfig label_cfg;
  label_cfg.protocol = Protocol::kLabel;
  EvalConfig radius_cfg;
  radius_cfg.protocol = Protocol::kRadius;
  radius_cfg.r_eval_km = 1.0;  // far below the 111 km spacing

  for (int k : {1, 2}) {
    EXPECT_EQ(hit_at_k(ranked_label, label_query, k, label_cfg),
              hit_at_k(ranked_geo, geo_query, k, radius_cfg))
        << "k=" << k;
  }
}

}  // namespace
}  // namespace dvem
