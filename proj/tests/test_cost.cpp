#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lanefit/cost.hpp"
#include "lanefit/ingest.hpp"
#include "lanefit/scenegen.hpp"
#include "support.hpp"

namespace lanefit {
namespace {

TEST(RoadCost, SinglePointOnCentralLine) {
  const std::vector<BevPoint> road{{eval_lane(0.4, {0.02, 0.001}, 12.0), 12.0}};
  EXPECT_DOUBLE_EQ(road_cost_j1(road, 0.4, {0.02, 0.001}, {}), -1.0);
}

TEST(RoadCost, ThreeMetresOff) {
  const std::vector<BevPoint> road{{3.0, 5.0}};
  EXPECT_NEAR(road_cost_j1(road, 0.0, {}, {}), -std::exp(-1.0), 1e-12);
  EXPECT_NEAR(road_cost_j1(road, 0.0, {}, {}), -0.36788, 1e-5);
}

TEST(RoadCost, EmptyAndBounds) {
  EXPECT_EQ(road_cost_j1({}, 0.0, {}, {}), 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-20, 20);
  std::vector<BevPoint> road(300);
  for (auto& p : road) p = {d(rng), d(rng) + 20.0};
  const double j = road_cost_j1(road, 1.0, {0.1, 0.0}, {});
  EXPECT_LE(j, 0.0);
  EXPECT_GE(j, -static_cast<double>(road.size()));
}

TEST(RoadCost, ImprovesTowardsCentroid) {
  std::vector<BevPoint> road;
  for (int i = 0; i < 40; ++i) road.push_back({1.2 + 0.1 * (i % 7 - 3), 5.0 + i});
  double prev = 1.0;
  for (double c : {-4.0, -2.0, 0.0, 1.0, 1.2}) {
    const double j = road_cost_j1(road, c, {}, {});
    EXPECT_LT(j, prev);
    prev = j;
  }
}

TEST(Histogram, EntropyBounds) {
  CostConfig cfg;
  cfg.bin_width = 0.2;
  std::vector<double> one(50, 1.71);
  EXPECT_EQ(offset_histogram(one, cfg).entropy, 0.0);
  std::vector<double> four;
  for (double c : {-3.0, -1.0, 1.0, 3.0}) four.insert(four.end(), 25, c + 0.05);
  EXPECT_NEAR(offset_histogram(four, cfg).entropy, std::log(4.0), 1e-12);
  EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-12, 12);
  std::vector<double> wide(5000);
  for (auto& v : wide) v = d(rng);
  const auto h = offset_histogram(wide, cfg);
  EXPECT_GE(h.entropy, 0.0);
  EXPECT_LE(h.entropy, std::log(cfg.bin_count()));
  std::shuffle(wide.begin(), wide.end(), rng);
  EXPECT_EQ(offset_histogram(wide, cfg).entropy, h.entropy);
}

TEST(Histogram, OutOfRangeCountedInTotalOnly) {
  CostConfig cfg;
  const std::vector<double> r{0.0, 1.0, 15.0, -13.0};
  const auto h = offset_histogram(r, cfg);
  EXPECT_EQ(h.total, 4);
  EXPECT_EQ(h.in_range, 2);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0), 2);
  EXPECT_EQ(static_cast<int>(h.counts.size()), cfg.bin_count());
}

TEST(Histogram, EntropyDirect) {
  const std::vector<int> counts{1, 3, 0, 4};
  const double e = histogram_entropy(counts, 8);
  const double oracle = -(1.0 / 8 * std::log(1.0 / 8) + 3.0 / 8 * std::log(3.0 / 8) +
                          4.0 / 8 * std::log(4.0 / 8));
  EXPECT_NEAR(e, oracle, 1e-12);
}

TEST(LaneCost, DeltaClusterEqualsKappa) {
  CostConfig cfg;
  const SharedParams a{0.03, 0.0005};
  const auto pts = sample_lane(1.73, a, 5.0, 30.0, 0.5);
  EXPECT_NEAR(lane_cost_j2(pts, a, cfg), 2.0, 1e-12);
  EXPECT_EQ(cfg.kappa, 2.0);
}

TEST(LaneCost, SentinelAndEmpty) {
  CostConfig cfg;
  const std::vector<BevPoint> far{{30.0, 5.0}, {-40.0, 6.0}};
  EXPECT_EQ(lane_cost_j2(far, {}, cfg), 1e6);
  EXPECT_EQ(lane_cost_j2({}, {}, cfg), 0.0);
}

TEST(LaneCost, PenaltyGrowsAsPointsLeaveRange) {
  CostConfig cfg;
  std::vector<BevPoint> pts(20, BevPoint{1.0, 10.0});
  double prev = lane_cost_j2(pts, {}, cfg);
  for (int k = 1; k < 10; ++k) {
    pts[k] = {50.0, 10.0};
    const double j = lane_cost_j2(pts, {}, cfg);
    EXPECT_GT(j, prev);
    EXPECT_NEAR(j, cfg.kappa * 20.0 / (20 - k), 1e-12);
    prev = j;
  }
}

TEST(TotalCost, ComposesTerms) {
  FramePoints f;
  f.road = {{0.0, 10.0}};
  f.lane = sample_lane(1.77, {}, 5.0, 20.0, 1.0);
  CostConfig cfg;
  EXPECT_NEAR(total_cost(f, {}, cfg), 1.999, 1e-12);
  cfg.lambda = 0.0;
  EXPECT_EQ(total_cost(f, {}, cfg), lane_cost_j2(f.lane, {}, cfg));
}

TEST(TotalCost, SlopeCorrectsBeforeScoring) {
  // Flat coordinates of a straight lane at x = 2.02 on a road with slope b.
  const double b = 0.04;
  const double h = 1.5;
  FramePoints f;
  f.camera_height = h;
  for (double y = 5.0; y < 25.0; y += 0.5) {
    const double scale = h / (h - b * y);
    f.lane.push_back({2.02 * scale, y * scale});
  }
  CostConfig cfg;
  cfg.lambda = 0.0;
  EXPECT_NEAR(total_cost(f, {0.0, 0.0, 0.0, b}, cfg), cfg.kappa, 1e-9);
  EXPECT_GT(total_cost(f, {0.0, 0.0, 0.0, 0.0}, cfg), cfg.kappa + 0.5);
}

TEST(TotalCost, DegenerateSlopeGivesSentinel) {
  FramePoints f;
  f.lane = {{0.0, 40.0}};
  CostConfig cfg;
  EXPECT_EQ(total_cost(f, {0.0, 0.0, 0.0, -0.05}, cfg), cfg.sentinel);
}

TEST(TotalCost, EvaluatorMatchesReference) {
  SceneSpec s = testing::straight_scene({-1.75, 1.75, 5.25}, 0.03);
  s.shared = {0.05, 0.002};
  s.point_noise = 0.05;
  const auto g = generate_scene(s);
  const auto f = extract_points(g.mask, s.camera, ClassMap::scenegen_default());
  CostEvaluator ev(f, {});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int i = 0; i < 50; ++i) {
    const LaneHypothesis h{d(rng), 0.1 * d(rng), 0.003 * d(rng), 0.05 * d(rng)};
    EXPECT_NEAR(ev(h), total_cost(f, h, {}), 1e-9);
  }
  EXPECT_EQ(ev.evaluations(), 50);
}

class SceneCost : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_ = testing::straight_scene({-1.75, 1.75, 5.25}, 0.03);
    spec_.shared = {0.05, 0.002};
    const auto g = generate_scene(spec_);
    frame_ = extract_points(g.mask, spec_.camera, ClassMap::scenegen_default());
    truth_ = {spec_.road_center, spec_.shared.a1, spec_.shared.a2, spec_.slope.b};
  }
  SceneSpec spec_;
  FramePoints frame_;
  LaneHypothesis truth_;
};

TEST_F(SceneCost, EntropyLowerAtTrueHeading) {
  CostConfig cfg;
  auto residual_entropy = [&](const SharedParams& a) {
    std::vector<BevPoint> corrected;
    for (const auto& p : frame_.lane) {
      corrected.push_back(slope_correct(p, spec_.slope, frame_.camera_height));
    }
    return offset_histogram(residual_offsets(corrected, a), cfg).entropy;
  };
  EXPECT_LT(residual_entropy(spec_.shared),
            residual_entropy({spec_.shared.a1 + 0.05, spec_.shared.a2}));
}

TEST_F(SceneCost, TruthBeatsRandomProbes) {
  CostConfig cfg;
  CostEvaluator ev(frame_, cfg);
  const double at_truth = ev(truth_);
  const HypothesisBox box;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const LaneHypothesis h{box.central_offset * d(rng), box.a1 * d(rng), box.a2 * d(rng),
                           box.b * d(rng)};
    EXPECT_LT(at_truth, ev(h));
  }
}

}  // namespace
}  // namespace lanefit
