#pragma once

#include <Eigen/Dense>

#include <vector>

#include "lanefit/geometry.hpp"
#include "lanefit/scenegen.hpp"

namespace lanefit::testing {

// Pinhole projection written out from the intrinsics and rotation, without
// the library's cached transform.
inline Eigen::Vector2d pinhole(const CameraModel& cam, const Eigen::Vector3d& ground) {
  const Eigen::Vector3d c = cam.rotation() * ground;
  const auto& k = cam.intrinsics();
  return {k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

inline SceneSpec straight_scene(std::vector<double> offsets, double b = 0.0) {
  SceneSpec s;
  s.slope.b = b;
  double lo = 0.0;
  double hi = 0.0;
  for (double o : offsets) {
    s.lanes.push_back({o, LaneColor::kWhite, {}});
    lo = std::min(lo, o);
    hi = std::max(hi, o);
  }
  s.road_center = 0.5 * (lo + hi);
  s.road_half_width = 0.5 * (hi - lo) + 1.0;
  return s;
}

}  // namespace lanefit::testing
