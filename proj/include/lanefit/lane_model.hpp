#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanefit/geometry.hpp"

namespace lanefit {

// Shared lane coefficients. Every lane line is x = a0 + a1*y + a2*y^2 with a
// per-lane offset a0. a1 is dimensionless (heading), a2 is in 1/m.
struct SharedParams {
  double a1 = 0.0;
  double a2 = 0.0;

  friend bool operator==(const SharedParams&, const SharedParams&) = default;
};

enum class LaneColor : std::uint8_t { kUnknown, kWhite, kYellow };
enum class LaneStyle : std::uint8_t { kUnknown, kSolid, kDashed };

std::string_view to_string(LaneColor c);
std::string_view to_string(LaneStyle s);
LaneColor parse_lane_color(std::string_view s);
LaneStyle parse_lane_style(std::string_view s);

// Longitudinal interval [y_begin, y_end] covered by observed marking points.
struct Segment {
  double y_begin = 0.0;
  double y_end = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct LaneAttributes {
  LaneColor color = LaneColor::kUnknown;
  LaneStyle style = LaneStyle::kUnknown;
  // Observed painted segments; filled for dashed lanes.
  std::vector<Segment> segments;

  friend bool operator==(const LaneAttributes&,
                         const LaneAttributes&) = default;
};

struct LaneSet {
  SharedParams shared;
  SlopeModel slope;
  double central_offset = 0.0;
  std::vector<double> offsets;  // ascending, metres
  std::vector<LaneAttributes> attributes;
  double confidence = 0.0;

  std::size_t lane_count() const { return offsets.size(); }
};

inline bool operator==(const LaneSet& a, const LaneSet& b) {
  return a.shared == b.shared && a.slope.b == b.slope.b &&
         a.central_offset == b.central_offset && a.offsets == b.offsets &&
         a.attributes == b.attributes && a.confidence == b.confidence;
}

inline constexpr double kDefaultMinLaneSeparation = 2.5;

// Throws FormatError when offsets are unsorted, closer than min_separation,
// or do not match the attribute count, or when confidence is outside [0, 1].
void validate(const LaneSet& lanes,
              double min_separation = kDefaultMinLaneSeparation);

// Ground points of one frame in flat-ground coordinates. Slope correction is
// applied per hypothesis by the cost function.
struct FramePoints {
  double camera_height = 1.5;
  std::vector<BevPoint> road;
  std::vector<BevPoint> lane;
  // Parallel to `lane`: raw label value and its colour tag.
  std::vector<std::uint8_t> lane_labels;
  std::vector<LaneColor> lane_colors;

  bool empty() const { return road.empty() && lane.empty(); }
};

inline double eval_lane(double a0, const SharedParams& shared, double y) {
  return a0 + (shared.a1 * y + shared.a2 * y * y);
}

// Samples (f(a0, a; y), y) from y_begin to y_end inclusive. Empty when
// y_end < y_begin. Throws std::invalid_argument when step <= 0.
std::vector<BevPoint> sample_lane(double a0, const SharedParams& shared,
                                  double y_begin, double y_end, double step);

// Lateral residual x - f(0, a; y) of each point, order preserved.
std::vector<double> residual_offsets(std::span<const BevPoint> points,
                                     const SharedParams& shared);

}  // namespace lanefit
