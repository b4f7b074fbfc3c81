#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lanefit/geometry.hpp"
#include "lanefit/lane_model.hpp"

namespace lanefit {

// Lane drawn in the image, one column per sampled row. Rows ascend.
struct Polyline {
  std::vector<int> rows;
  std::vector<double> cols;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

struct SamplingConfig {
  int row_step = 10;     // px, rows are multiples of this
  double y_min = 0.5;    // m, ground range that is drawn
  double y_max = 60.0;
  double y_step = 0.05;  // m, lane sampling before row interpolation
};

// Projects every lane of the set through the camera onto the sampling rows.
// Lanes with fewer than two visible samples give an empty polyline.
std::vector<Polyline> lane_polylines(const LaneSet& lanes, const CameraModel& camera,
                                     const SamplingConfig& cfg = {});
Polyline lane_polyline(double offset, const SharedParams& shared, const SlopeModel& slope,
                       const CameraModel& camera, const SamplingConfig& cfg = {});

struct LaneGroundTruth {
  std::vector<Polyline> lanes;
  SamplingConfig sampling;

  static LaneGroundTruth from_lane_set(const LaneSet& truth, const CameraModel& camera,
                                       const SamplingConfig& cfg = {});
  // {"lanes": [[x, ...], ...], "h_samples": [row, ...]} with negative x for
  // rows where the lane is absent. Throws FormatError when malformed.
  static LaneGroundTruth from_tusimple(const nlohmann::json& j);
};

// Mean column distance over shared rows; infinity when none are shared.
double mean_distance(const Polyline& a, const Polyline& b);

// Greedy one-to-one pairing by ascending mean distance, ties by index.
// Returns, per ground-truth lane, the matched prediction index or -1.
std::vector<int> match_lanes(std::span<const Polyline> pred, std::span<const Polyline> gt,
                             double max_mean_distance);

// Fraction of ground-truth samples within threshold_px of the matched
// predicted lane. The prediction is drawn with `slope` when given, else with
// its own slope estimate. 0 when the ground truth has no samples.
double point_accuracy(const LaneSet& pred, const LaneGroundTruth& gt, const CameraModel& camera,
                      std::optional<SlopeModel> slope = std::nullopt,
                      double threshold_px = 20.0);
double point_accuracy(std::span<const Polyline> pred, const LaneGroundTruth& gt,
                      double threshold_px = 20.0);

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 0 or 1, row-major

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}
  std::uint8_t& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
  std::uint8_t at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * width + u];
  }
  std::size_t count() const;
};

struct PixelScores {
  double f_measure = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double false_positive_rate = 0.0;
};

// Pixel confusion metrics; ratios with an empty denominator are 0.
// Throws FormatError when the sizes differ.
PixelScores pixel_f_measure(const BinaryMask& pred, const BinaryMask& gt);

struct EgoLaneConfig {
  double y_min = 0.5;
  double y_max = 60.0;
};

// Area between the two offsets bracketing x = 0, rendered through the camera
// on the set's own slope. nullopt when no such pair exists.
std::optional<BinaryMask> ego_lane_mask(const LaneSet& lanes, const CameraModel& camera,
                                        const EgoLaneConfig& cfg = {});

// Scores of one frame; an undefined predicted ego lane scores all zero
// except the false positive rate.
PixelScores ego_lane_scores(const LaneSet& pred, const LaneSet& truth, const CameraModel& camera,
                            const EgoLaneConfig& cfg = {});

// Matched ground-truth lanes over all ground-truth lanes, summed across
// frames. A lane matches when its mean distance is within threshold_px.
double tpr(std::span<const std::vector<Polyline>> pred,
           std::span<const std::vector<Polyline>> gt, double threshold_px = 20.0);

// Throws FormatError on a length mismatch; 0 for empty input.
double curvature_series_rmse(std::span<const double> pred, std::span<const double> reference);

// Absolute error of each true offset to the nearest predicted one. Empty
// when nothing is predicted.
std::vector<double> offset_errors(std::span<const double> pred, std::span<const double> truth);

// Every true offset has a distinct predicted offset within tolerance and no
// extra lanes are predicted.
bool offsets_recovered(std::span<const double> pred, std::span<const double> truth,
                       double tolerance);

}  // namespace lanefit
