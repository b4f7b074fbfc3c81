#include "lanefit/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kOrthonormalTol = 1e-9;
constexpr double kHorizonTol = 1e-9;
constexpr double kBehindTol = 1e-9;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

Eigen::Matrix3d rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

}  // namespace

Eigen::Matrix3d rotation_from_angles(const MountAngles& angles) {
  const double pitch = deg2rad(angles.pitch_deg);
  const double sp = std::sin(pitch);
  const double cp = std::cos(pitch);
  // Rows are the camera axes expressed in the ground frame for a camera
  // looking forward and tilted down by `pitch`.
  Eigen::Matrix3d base;
  base << 1.0, 0.0, 0.0,  //
      0.0, -sp, -cp,      //
      0.0, cp, -sp;
  return rot_z(deg2rad(angles.roll_deg)) * base *
         rot_z(deg2rad(angles.yaw_deg)).transpose();
}

Eigen::Matrix3d build_transform(const CameraIntrinsics& intrinsics,
                                const Eigen::Matrix3d& rotation) {
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
    throw ConfigError("focal lengths must be positive");
  }
  Eigen::Matrix3d k_inv;
  k_inv << 1.0 / intrinsics.fx, 0.0, -intrinsics.cx / intrinsics.fx,  //
      0.0, 1.0 / intrinsics.fy, -intrinsics.cy / intrinsics.fy,       //
      0.0, 0.0, 1.0;
  const Eigen::Matrix3d t = rotation.transpose() * k_inv;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(t);
  const auto& sv = svd.singularValues();
  const double smin = sv(2);
  if (!(smin > 0.0) || sv(0) / smin > kMaxCondition) {
    std::ostringstream msg;
    msg << "pixel-to-ground transform is singular (condition "
        << (smin > 0.0 ? sv(0) / smin : INFINITY) << ")";
    throw ConfigError(msg.str());
  }
  return t;
}

CameraModel::CameraModel(const CameraIntrinsics& intrinsics,
                         const Eigen::Matrix3d& rotation,
                         const Eigen::Vector3d& translation, double height_m,
                         int image_width, int image_height)
    : intrinsics_(intrinsics),
      rotation_(rotation),
      translation_(translation),
      height_(height_m),
      image_width_(image_width),
      image_height_(image_height) {
  if (!(height_m > 0.0)) {
    throw ConfigError("camera height must be positive");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("image dimensions must be positive");
  }
  const double err =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (!(err <= kOrthonormalTol) || rotation.determinant() < 0.0) {
    throw ConfigError("camera rotation is not a proper orthonormal matrix");
  }
  transform_ = build_transform(intrinsics, rotation);
}

CameraModel CameraModel::from_angles(const CameraIntrinsics& intrinsics,
                                     const MountAngles& angles,
                                     double height_m, int image_width,
                                     int image_height,
                                     const Eigen::Vector3d& translation) {
  return CameraModel(intrinsics, rotation_from_angles(angles), translation,
                     height_m, image_width, image_height);
}

std::optional<FlatBevPoint> try_image_to_flat_bev(const CameraModel& camera,
                                                  const ImagePoint& p) {
  const Eigen::Vector3d r = camera.ray(p);
  if (!(r.z() < -kHorizonTol * r.norm())) return std::nullopt;
  const double s = -camera.height() / r.z();
  return FlatBevPoint{s * r.x(), s * r.y(), s};
}

FlatBevPoint image_to_flat_bev(const CameraModel& camera, const ImagePoint& p) {
  if (auto q = try_image_to_flat_bev(camera, p)) return *q;
  std::ostringstream msg;
  msg << "pixel (" << p.u << ", " << p.v << ") does not intersect the ground";
  throw HorizonError(msg.str());
}

BevPoint slope_correct(const BevPoint& flat, const SlopeModel& slope,
                       double camera_height, double epsilon) {
  BevPoint out;
  if (!slope_correct_into(flat.x, flat.y, slope.b, camera_height, epsilon,
                          out)) {
    std::ostringstream msg;
    msg << "point at y=" << flat.y << " lies beyond the horizon of slope b="
        << slope.b;
    throw DegenerateSlopeError(msg.str());
  }
  return out;
}

BevPoint slope_correct(const FlatBevPoint& p, const SlopeModel& slope,
                       double camera_height, double epsilon) {
  return slope_correct(BevPoint{p.x, p.y}, slope, camera_height, epsilon);
}

std::optional<ImagePoint> try_bev_to_image(const CameraModel& camera,
                                           const BevPoint& p,
                                           const SlopeModel& slope) {
  const Eigen::Vector3d ground(p.x, p.y, slope.height_at(p.y, camera.height()));
  const Eigen::Vector3d c = camera.rotation() * ground;
  if (!(c.z() > kBehindTol)) return std::nullopt;
  const auto& k = camera.intrinsics();
  return ImagePoint{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

ImagePoint bev_to_image(const CameraModel& camera, const BevPoint& p,
                        const SlopeModel& slope) {
  if (auto q = try_bev_to_image(camera, p, slope)) return *q;
  std::ostringstream msg;
  msg << "ground point (" << p.x << ", " << p.y << ") is behind the camera";
  throw BehindCameraError(msg.str());
}

}  // namespace lanefit
