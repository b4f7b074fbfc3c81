#include <gtest/gtest.h>

#include <random>

#include "lanefit/errors.hpp"
#include "lanefit/geometry.hpp"
#include "support.hpp"

namespace lanefit {
namespace {

CameraModel nadir() {
  return CameraModel::from_angles({1000, 1000, 640, 360}, {0.0, 90.0, 0.0}, 1.5, 1280, 720);
}

CameraModel forward(double pitch = 1.5, double roll = 0.0, double yaw = 0.0) {
  return CameraModel::from_angles({1000, 1000, 640, 360}, {roll, pitch, yaw}, 1.5, 1280, 720);
}

TEST(BuildTransform, IdentityCase) {
  const Eigen::Matrix3d t = build_transform({1, 1, 0, 0}, Eigen::Matrix3d::Identity());
  EXPECT_TRUE(t.isApprox(Eigen::Matrix3d::Identity(), 0.0));
}

TEST(BuildTransform, NadirOpticalAxisPointsDown) {
  const Eigen::Vector3d r = nadir().ray({640, 360}).normalized();
  EXPECT_NEAR(r.x(), 0.0, 1e-12);
  EXPECT_NEAR(r.y(), 0.0, 1e-12);
  EXPECT_NEAR(r.z(), -1.0, 1e-12);
}

TEST(BuildTransform, RandomExtrinsicsInvert) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    const CameraIntrinsics k{800 + 10.0 * i, 900, 600, 350};
    const Eigen::Matrix3d r = rotation_from_angles({ang(rng), ang(rng) + 10.0, ang(rng)});
    const Eigen::Matrix3d t = build_transform(k, r);
    Eigen::Matrix3d kmat;
    kmat << k.fx, 0, k.cx, 0, k.fy, k.cy, 0, 0, 1;
    // The inverse of T is K * R.
    EXPECT_TRUE((t * (kmat * r)).isApprox(Eigen::Matrix3d::Identity(), 1e-9));
  }
}

TEST(BuildTransform, RejectsDegenerateModels) {
  EXPECT_THROW(build_transform({0, 1000, 0, 0}, Eigen::Matrix3d::Identity()), ConfigError);
  EXPECT_THROW(build_transform({1e-13, 1e3, 0, 0}, Eigen::Matrix3d::Identity()), ConfigError);
  EXPECT_THROW(CameraModel::from_angles({1000, 1000, 640, 360}, {}, 0.0, 1280, 720),
               ConfigError);
  Eigen::Matrix3d skew = Eigen::Matrix3d::Identity();
  skew(0, 1) = 0.5;
  EXPECT_THROW(CameraModel({1000, 1000, 640, 360}, skew, Eigen::Vector3d::Zero(), 1.5, 1280, 720),
               ConfigError);
}

TEST(ImageToFlatBev, NadirCentreIsOrigin) {
  const FlatBevPoint p = image_to_flat_bev(nadir(), {640, 360});
  EXPECT_NEAR(p.x, 0.0, 1e-12);
  EXPECT_NEAR(p.y, 0.0, 1e-12);
}

TEST(ImageToFlatBev, InvertsForwardProjection) {
  const CameraModel cam = forward();
  const Eigen::Vector2d px = testing::pinhole(cam, {2.0, 10.0, -1.5});
  const FlatBevPoint p = image_to_flat_bev(cam, {px.x(), px.y()});
  EXPECT_NEAR(p.x, 2.0, 1e-9);
  EXPECT_NEAR(p.y, 10.0, 1e-9);
  EXPECT_GT(p.depth_scale, 0.0);
}

TEST(ImageToFlatBev, HorizonRowThrows) {
  const CameraModel level = forward(0.0);
  EXPECT_THROW(image_to_flat_bev(level, {100, 360}), HorizonError);
  EXPECT_THROW(image_to_flat_bev(level, {100, 200}), HorizonError);
  EXPECT_FALSE(try_image_to_flat_bev(level, {100, 360}).has_value());
  EXPECT_TRUE(try_image_to_flat_bev(level, {100, 361}).has_value());
}

TEST(SlopeCorrect, ZeroSlopeIsExactIdentity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-10, 10);
  std::uniform_real_distribution<double> y(0.1, 200);
  for (int i = 0; i < 1000; ++i) {
    const BevPoint f{x(rng), y(rng)};
    const BevPoint c = slope_correct(f, SlopeModel{0.0}, 1.5);
    EXPECT_EQ(c.x, f.x);
    EXPECT_EQ(c.y, f.y);
  }
}

TEST(SlopeCorrect, HandSubstitution) {
  const BevPoint c = slope_correct(BevPoint{1.0, 10.0}, SlopeModel{0.05}, 1.5);
  EXPECT_NEAR(c.y, 7.5, 1e-12);
  EXPECT_NEAR(c.x, 0.75, 1e-12);
}

TEST(SlopeCorrect, DegenerateDenominatorThrows) {
  // 1 + y*b/h = 0 at y = 30 for b = -0.05.
  EXPECT_THROW(slope_correct(BevPoint{0.0, 30.0}, SlopeModel{-0.05}, 1.5), DegenerateSlopeError);
  EXPECT_THROW(slope_correct(BevPoint{0.0, 40.0}, SlopeModel{-0.05}, 1.5), DegenerateSlopeError);
  EXPECT_NO_THROW(slope_correct(BevPoint{0.0, 29.0}, SlopeModel{-0.05}, 1.5));
}

TEST(SlopeCorrect, MonotoneCompression) {
  for (double yf : {0.5, 5.0, 20.0, 80.0}) {
    EXPECT_LT(slope_correct(BevPoint{0, yf}, SlopeModel{0.04}, 1.5).y, yf);
    EXPECT_GT(slope_correct(BevPoint{0, yf}, SlopeModel{-0.01}, 1.5).y, yf);
  }
}

TEST(SlopeCorrect, RecoversPointsOnSlopedPlane) {
  const CameraModel cam = forward();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(-6, 6);
  std::uniform_real_distribution<double> y(4, 18);
  for (double b : {-0.06, -0.02, 0.03, 0.07}) {
    for (int i = 0; i < 200; ++i) {
      const double gx = x(rng);
      const double gy = y(rng);
      const Eigen::Vector2d px = testing::pinhole(cam, {gx, gy, b * gy - 1.5});
      const auto flat = try_image_to_flat_bev(cam, {px.x(), px.y()});
      ASSERT_TRUE(flat.has_value());
      const BevPoint c = slope_correct(*flat, SlopeModel{b}, 1.5);
      EXPECT_NEAR(c.x, gx, 1e-6);
      EXPECT_NEAR(c.y, gy, 1e-6);
    }
  }
}

TEST(BevToImage, NadirOriginIsPrincipalPoint) {
  const ImagePoint p = bev_to_image(nadir(), {0, 0}, {});
  EXPECT_NEAR(p.u, 640.0, 1e-9);
  EXPECT_NEAR(p.v, 360.0, 1e-9);
}

TEST(BevToImage, FlatCaseMatchesPinhole) {
  const CameraModel cam = forward(2.0, 0.5, -1.0);
  for (double y : {5.0, 12.0, 40.0}) {
    const ImagePoint p = bev_to_image(cam, {1.3, y}, SlopeModel{0.0});
    const Eigen::Vector2d q = testing::pinhole(cam, {1.3, y, -1.5});
    EXPECT_NEAR(p.u, q.x(), 1e-9);
    EXPECT_NEAR(p.v, q.y(), 1e-9);
  }
}

TEST(BevToImage, BehindCameraThrows) {
  EXPECT_THROW(bev_to_image(forward(), {0.0, -5.0}, {}), BehindCameraError);
  EXPECT_FALSE(try_bev_to_image(forward(), {0.0, -5.0}, {}).has_value());
}

TEST(BevToImage, RoundTripRandomPixels) {
  const CameraModel cam = forward(3.0, 0.7, 1.2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1279);
  std::uniform_real_distribution<double> v(420, 719);
  std::uniform_real_distribution<double> bd(-0.05, 0.08);
  int checked = 0;
  while (checked < 1000) {
    const ImagePoint px{u(rng), v(rng)};
    const SlopeModel s{bd(rng)};
    const auto flat = try_image_to_flat_bev(cam, px);
    if (!flat) continue;
    BevPoint g;
    if (!slope_correct_into(flat->x, flat->y, s.b, cam.height(), kDefaultSlopeEpsilon, g)) {
      continue;
    }
    const ImagePoint back = bev_to_image(cam, g, s);
    EXPECT_NEAR(back.u, px.u, 1e-6);
    EXPECT_NEAR(back.v, px.v, 1e-6);
    ++checked;
  }
}

TEST(BevToImage, FlatRoundTripEveryPixelBelowHorizon) {
  const CameraModel cam = forward();
  double worst = 0.0;
  for (int v = 0; v < 720; v += 3) {
    for (int u = 0; u < 1280; u += 7) {
      const auto flat = try_image_to_flat_bev(cam, {double(u), double(v)});
      if (!flat) continue;
      const ImagePoint back = bev_to_image(cam, {flat->x, flat->y}, {});
      worst = std::max({worst, std::abs(back.u - u), std::abs(back.v - v)});
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(SolveProfileRoot, MatchesLinearClosedForm) {
  const double h = 1.5;
  for (double b : {-0.03, 0.0, 0.05}) {
    for (double yf : {3.0, 15.0, 25.0}) {
      // Search below the slope horizon h/b, where f_z changes sign.
      const double y_max = b > 0.0 ? 0.99 * h / b : 500.0;
      const auto y = solve_profile_root(yf, h, [&](double s) { return b * s - h; }, y_max);
      ASSERT_TRUE(y.has_value());
      EXPECT_NEAR(*y, slope_correct(BevPoint{0, yf}, SlopeModel{b}, h).y, 1e-8);
    }
  }
}

}  // namespace
}  // namespace lanefit
