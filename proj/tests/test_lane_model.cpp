#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

#include "lanefit/errors.hpp"
#include "lanefit/lane_model.hpp"
#include "lanefit/records.hpp"

namespace lanefit {
namespace {

TEST(EvalLane, Examples) {
  EXPECT_EQ(eval_lane(1.0, {0.0, 0.0}, 123.0), 1.0);
  EXPECT_NEAR(eval_lane(1.0, {0.1, 0.01}, 10.0), 3.0, 1e-12);
  EXPECT_EQ(eval_lane(0.0, {0.3, -0.02}, 0.0), 0.0);
}

TEST(EvalLane, OffsetSeparates) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double a0 = d(rng);
    const SharedParams a{d(rng) * 0.05, d(rng) * 0.001};
    const double y = 10.0 * (d(rng) + 5.0);
    EXPECT_NEAR(eval_lane(a0, a, y) - eval_lane(0.0, a, y), a0, 1e-12);
  }
}

TEST(SampleLane, InclusiveEndpoints) {
  const auto pts = sample_lane(0.0, {}, 0.0, 10.0, 5.0);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0], (BevPoint{0, 0}));
  EXPECT_EQ(pts[1], (BevPoint{0, 5}));
  EXPECT_EQ(pts[2], (BevPoint{0, 10}));
}

TEST(SampleLane, StepLongerThanSpan) {
  const auto pts = sample_lane(1.0, {}, 2.0, 3.0, 10.0);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts.front().y, 2.0);
  EXPECT_EQ(pts.back().y, 3.0);
}

TEST(SampleLane, EmptyRangeAndBadStep) {
  EXPECT_TRUE(sample_lane(0.0, {}, 5.0, 4.0, 1.0).empty());
  EXPECT_THROW(sample_lane(0.0, {}, 0.0, 4.0, 0.0), std::invalid_argument);
}

TEST(SampleLane, LeastSquaresRefit) {
  const SharedParams a{0.07, -0.0023};
  const auto pts = sample_lane(-1.4, a, 0.0, 50.0, 0.5);
  Eigen::MatrixXd m(pts.size(), 3);
  Eigen::VectorXd x(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m.row(i) << 1.0, pts[i].y, pts[i].y * pts[i].y;
    x(i) = pts[i].x;
  }
  const Eigen::Vector3d c = m.colPivHouseholderQr().solve(x);
  EXPECT_NEAR(c(0), -1.4, 1e-9);
  EXPECT_NEAR(c(1), 0.07, 1e-9);
  EXPECT_NEAR(c(2), -0.0023, 1e-9);
}

TEST(ResidualOffsets, ExactLaneAndIdentity) {
  const SharedParams a{0.05, 0.002};
  const auto pts = sample_lane(1.75, a, 1.0, 40.0, 1.0);
  for (double d : residual_offsets(pts, a)) EXPECT_NEAR(d, 1.75, 1e-12);
  const std::vector<BevPoint> raw{{1.0, 2.0}, {-3.0, 4.0}};
  const auto r = residual_offsets(raw, {});
  EXPECT_EQ(r, (std::vector<double>{1.0, -3.0}));
}

TEST(ResidualOffsets, SpreadBoundedByNoise) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.05);
  const SharedParams a{-0.03, 0.001};
  for (double a0 : {-3.5, 0.0, 3.5}) {
    auto pts = sample_lane(a0, a, 3.0, 60.0, 0.05);
    for (auto& p : pts) p.x += noise(rng);
    const auto r = residual_offsets(pts, a);
    double mean = 0.0;
    for (double d : r) mean += d;
    mean /= r.size();
    double var = 0.0;
    for (double d : r) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / (r.size() - 1));
    EXPECT_NEAR(mean, a0, 0.01);
    EXPECT_LE(sd, 0.055);
  }
}

TEST(LaneSetValidate, Rules) {
  LaneSet ok;
  ok.offsets = {-1.75, 1.75};
  ok.attributes.resize(2);
  ok.confidence = 0.8;
  EXPECT_NO_THROW(validate(ok));
  LaneSet unsorted = ok;
  unsorted.offsets = {1.75, -1.75};
  EXPECT_THROW(validate(unsorted), FormatError);
  LaneSet close = ok;
  close.offsets = {0.0, 1.0};
  EXPECT_THROW(validate(close), FormatError);
  LaneSet mismatch = ok;
  mismatch.attributes.resize(1);
  EXPECT_THROW(validate(mismatch), FormatError);
  LaneSet conf = ok;
  conf.confidence = 1.5;
  EXPECT_THROW(validate(conf), FormatError);
}

TEST(Records, RoundTrip) {
  LaneSet s;
  s.shared = {0.0123456789, -0.00098765};
  s.slope.b = 0.031;
  s.central_offset = -0.2;
  s.offsets = {-5.25, -1.75, 1.75};
  s.attributes = {{LaneColor::kYellow, LaneStyle::kSolid, {}},
                  {LaneColor::kWhite, LaneStyle::kDashed, {{3.0, 6.0}, {12.0, 15.0}}},
                  {LaneColor::kUnknown, LaneStyle::kUnknown, {}}};
  s.confidence = 0.75;
  const auto rec = to_record(4, s);
  EXPECT_EQ(rec["frame_id"], 4);
  EXPECT_FALSE(rec.contains("timing_ms"));
  EXPECT_TRUE(lane_set_from_record(nlohmann::json::parse(rec.dump())) == s);
  EXPECT_TRUE(to_record(0, s, 12.5).contains("timing_ms"));
}

TEST(Records, MalformedThrows) {
  EXPECT_THROW(lane_set_from_record(nlohmann::json{{"a1", 0.0}}), FormatError);
  auto rec = to_record(0, LaneSet{});
  rec["attributes"] = nlohmann::json::array({{{"color", "purple"}, {"style", "solid"}}});
  rec["offsets"] = {0.0};
  EXPECT_THROW(lane_set_from_record(rec), FormatError);
}

TEST(LaneColorNames, RoundTrip) {
  for (LaneColor c : {LaneColor::kUnknown, LaneColor::kWhite, LaneColor::kYellow}) {
    EXPECT_EQ(parse_lane_color(to_string(c)), c);
  }
  for (LaneStyle s : {LaneStyle::kUnknown, LaneStyle::kSolid, LaneStyle::kDashed}) {
    EXPECT_EQ(parse_lane_style(to_string(s)), s);
  }
  EXPECT_THROW(parse_lane_color("green"), FormatError);
}

}  // namespace
}  // namespace lanefit
