#pragma once

#include <cstdint>
#include <vector>

#include "lanefit/geometry.hpp"
#include "lanefit/ingest.hpp"
#include "lanefit/lane_model.hpp"

namespace lanefit {

// 1280x720, f = 1000 px, 1.5 degrees pitch down, mounted 1.5 m high.
CameraModel default_camera();

// Paint is on where fmod(y + phase, on + off) < on. Solid when on or off is
// not positive.
struct DashPattern {
  double on = 0.0;
  double off = 0.0;
  double phase = 0.0;

  bool solid() const { return !(on > 0.0) || !(off > 0.0); }
  bool painted(double y) const;
};

struct LaneSpec {
  double offset = 0.0;
  LaneColor color = LaneColor::kWhite;
  DashPattern dash;
};

// Inclusive pixel rectangle.
struct OcclusionRect {
  int u0 = 0;
  int v0 = 0;
  int u1 = 0;
  int v1 = 0;
};

struct Degradation {
  std::vector<OcclusionRect> occlusions;
  // Lane pixels relabelled as road with this probability.
  double dropout = 0.0;
  // Lane pixels relabelled to another road/lane label with this probability,
  // plus the same fraction of the lane pixel count scattered over the road
  // as spurious lane labels.
  double label_noise = 0.0;
};

struct SceneLabels {
  std::uint8_t none = 0;  // ground beyond the rendered extent
  std::uint8_t sky = 1;
  std::uint8_t road = 2;
  std::uint8_t terrain = 3;
  std::uint8_t occluder = 4;
  std::uint8_t white_lane = 10;
  std::uint8_t yellow_lane = 11;

  std::uint8_t lane(LaneColor c) const { return c == LaneColor::kYellow ? yellow_lane : white_lane; }
};

struct SceneSpec {
  SharedParams shared;
  SlopeModel slope;
  double road_center = 0.0;  // central-line offset a0^c
  double road_half_width = 7.0;
  std::vector<LaneSpec> lanes;
  double marking_half_width = 0.075;
  double y_extent = 60.0;
  // Standard deviation of the lateral wobble of each marking, drawn per lane
  // and image row.
  double point_noise = 0.0;
  Degradation degradation;
  std::uint64_t seed = 1;
  SceneLabels labels;
  CameraModel camera = default_camera();
};

struct GeneratedScene {
  SemanticMask mask;
  LaneSet truth;  // ascending offsets, confidence 1
  std::vector<std::size_t> lane_pixels;  // per truth lane, after degradation
  // Largest ground footprint of one pixel inside the rendered extent.
  double lateral_quantum = 0.0;
  double longitudinal_quantum = 0.0;
};

// Labels every pixel by intersecting its ray with the road surface
// z = b*y - h. Throws GenerationError for an invalid spec or when the camera
// sees no ground.
GeneratedScene generate_scene(const SceneSpec& spec);

// Random rectangles over lane pixels until at least target_fraction of the
// clean lane pixels are hidden.
std::vector<OcclusionRect> plan_occlusions(const SceneSpec& spec, double target_fraction,
                                           std::uint64_t seed);

struct ClipMotion {
  double dy = 0.0;  // forward travel per frame, shifts dash phase
  double a1_rate = 0.0;
  double a2_rate = 0.0;
  double b_rate = 0.0;
  double offset_rate = 0.0;  // lateral drift of the whole road
  // Draw fresh noise every frame; otherwise all frames share the spec seed.
  bool reseed_noise = false;
};

// Per-frame specs; frame k carries parameters base + k * rate.
std::vector<SceneSpec> generate_clip(const SceneSpec& spec, int frames,
                                     const ClipMotion& motion, std::uint64_t seed);

struct RandomSceneConfig {
  int min_lanes = 2;
  int max_lanes = 4;
  double lane_width_min = 3.3;
  double lane_width_max = 3.8;
  double a1_max = 0.2;
  double a2_max = 0.005;
  double b_max = 0.08;
  double point_noise = 0.05;
  double yellow_probability = 0.3;
  double dashed_probability = 0.6;
  DashPattern dash{3.0, 6.0, 0.0};
  // Lanes must keep this many clean pixels or the draw is repeated.
  std::size_t min_lane_pixels = 1500;
  int max_attempts = 50;
};

// Seeded random multi-lane scene; see RandomSceneConfig.
SceneSpec random_scene(const RandomSceneConfig& cfg, std::uint64_t seed,
                       const CameraModel& camera = default_camera());

// SplitMix64 step, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lanefit
