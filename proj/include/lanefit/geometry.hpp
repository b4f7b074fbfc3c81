#pragma once

#include <Eigen/Core>

#include <optional>

namespace lanefit {

// Coordinate conventions used throughout the library:
//   image:   u = column (right), v = row (down), pixel centres at integers.
//   camera:  x right, y down, z along the optical axis.
//   ground:  origin at the camera centre, x lateral (right-positive),
//            y longitudinal (forward-positive), z up. The flat ground plane
//            is z = -h.

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
};

// Ground intersection computed under the flat-road assumption.
struct FlatBevPoint {
  double x = 0.0;
  double y = 0.0;
  // Camera-axis depth of the intersection (the scale eliminated by the
  // ground constraint).
  double depth_scale = 0.0;
};

// Metric ground coordinates after slope correction.
struct BevPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const BevPoint&, const BevPoint&) = default;
};

// Linear road-height profile f_z(y) = b*y - h.
struct SlopeModel {
  double b = 0.0;

  double height_at(double y, double camera_height) const {
    return b * y - camera_height;
  }
};

struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 640.0;
  double cy = 360.0;
};

// Mounting angles in degrees. pitch > 0 tilts the optical axis down towards
// the road, yaw > 0 turns the camera to the left (counter-clockwise seen from
// above), roll > 0 rotates the image clockwise about the optical axis.
struct MountAngles {
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
};

// Rotation taking ground-frame vectors into the camera frame.
Eigen::Matrix3d rotation_from_angles(const MountAngles& angles);

// Pinhole camera above the road. The pixel-to-ray transform is built once at
// construction and cached.
class CameraModel {
 public:
  // rotation: camera <- ground. translation: position of the camera centre in
  // the vehicle frame; ground coordinates produced by this library are
  // camera-centred, use to_vehicle_frame() to shift them.
  // Throws ConfigError on an invalid model.
  CameraModel(const CameraIntrinsics& intrinsics,
              const Eigen::Matrix3d& rotation,
              const Eigen::Vector3d& translation, double height_m,
              int image_width, int image_height);

  static CameraModel from_angles(const CameraIntrinsics& intrinsics,
                                 const MountAngles& angles, double height_m,
                                 int image_width, int image_height,
                                 const Eigen::Vector3d& translation =
                                     Eigen::Vector3d::Zero());

  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  double height() const { return height_; }
  int image_width() const { return image_width_; }
  int image_height() const { return image_height_; }

  // Maps homogeneous pixels (u, v, 1) to ground-frame rays scaled by the
  // inverse camera depth.
  const Eigen::Matrix3d& transform() const { return transform_; }
  Eigen::Vector3d ray(const ImagePoint& p) const {
    return transform_ * Eigen::Vector3d(p.u, p.v, 1.0);
  }

  BevPoint to_vehicle_frame(const BevPoint& p) const {
    return {p.x + translation_.x(), p.y + translation_.y()};
  }

  bool contains(const ImagePoint& p) const {
    return p.u >= -0.5 && p.v >= -0.5 && p.u < image_width_ - 0.5 &&
           p.v < image_height_ - 0.5;
  }

 private:
  CameraIntrinsics intrinsics_;
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
  double height_;
  int image_width_;
  int image_height_;
  Eigen::Matrix3d transform_;
};

// Pixel-to-ray transform K^-1 followed by the camera-to-ground rotation.
// Throws ConfigError when the transform is singular or its condition number
// exceeds 1e12.
Eigen::Matrix3d build_transform(const CameraIntrinsics& intrinsics,
                                const Eigen::Matrix3d& rotation);

// Intersects the pixel ray with the flat plane z = -h.
// Throws HorizonError for rays at or above the horizon.
FlatBevPoint image_to_flat_bev(const CameraModel& camera, const ImagePoint& p);
std::optional<FlatBevPoint> try_image_to_flat_bev(const CameraModel& camera,
                                                  const ImagePoint& p);

inline constexpr double kDefaultSlopeEpsilon = 1e-6;

// Non-throwing form of slope_correct, used in the cost hot loop.
inline bool slope_correct_into(double flat_x, double flat_y, double b,
                               double camera_height, double epsilon,
                               BevPoint& out) {
  const double denom = flat_y * b / camera_height + 1.0;
  if (!(denom > epsilon)) return false;
  const double y = flat_y / denom;
  // x = -x_flat * f_z(y) / h, written so that b = 0 is exact.
  out.x = flat_x * (1.0 - b * y / camera_height);
  out.y = y;
  return true;
}

// Recovers metric ground coordinates from a flat-ground estimate under the
// linear slope model. Throws DegenerateSlopeError when y*b/h + 1 <= epsilon.
BevPoint slope_correct(const FlatBevPoint& p, const SlopeModel& slope,
                       double camera_height,
                       double epsilon = kDefaultSlopeEpsilon);
BevPoint slope_correct(const BevPoint& flat, const SlopeModel& slope,
                       double camera_height,
                       double epsilon = kDefaultSlopeEpsilon);

// Projects a ground point on z = b*y - h into the image.
// Throws BehindCameraError for points not in front of the camera.
ImagePoint bev_to_image(const CameraModel& camera, const BevPoint& p,
                        const SlopeModel& slope);
std::optional<ImagePoint> try_bev_to_image(const CameraModel& camera,
                                           const BevPoint& p,
                                           const SlopeModel& slope);

// Hook for higher-order road profiles: solves y_flat + h*y/f_z(y) = 0 for y
// by bisection on (0, y_max]. Returns nullopt when no sign change is found.
// Only the linear profile is used by the rest of the library.
template <typename Profile>
std::optional<double> solve_profile_root(double flat_y, double camera_height,
                                         Profile&& f_z, double y_max,
                                         int iterations = 200) {
  auto g = [&](double y) { return flat_y + camera_height * y / f_z(y); };
  double lo = 1e-9;
  double hi = y_max;
  double g_lo = g(lo);
  if (g_lo * g(hi) > 0.0) return std::nullopt;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace lanefit
