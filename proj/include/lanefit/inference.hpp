#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lanefit/cost.hpp"
#include "lanefit/lane_model.hpp"
#include "lanefit/optimizer.hpp"

namespace lanefit {

struct PeakConfig {
  double min_separation = 2.5;  // m
  // Minimum prominence in points: max(min_prominence, fraction * N_l).
  double min_prominence = 20.0;
  double min_prominence_fraction = 0.02;
  // Lane residuals are re-binned at this width for peak finding; 0 keeps the
  // cost histogram bins.
  double bin_width = 0.2;
  // Keep only the N most prominent peaks when set.
  std::optional<int> expected_lanes;

  double prominence_threshold(int total_points) const;
  void validate() const;
};

struct Peak {
  double offset = 0.0;      // refined position, m
  std::size_t bin = 0;      // histogram bin of the maximum
  int height = 0;
  double prominence = 0.0;  // points
};

// All local maxima of the count sequence with their prominence, before any
// filtering. End bins are never peaks; a flat top reports its middle bin.
std::vector<Peak> local_maxima(const OffsetHistogram& hist);

// Peaks surviving the prominence and separation rules, ascending by offset.
std::vector<Peak> find_peaks(const OffsetHistogram& hist, const PeakConfig& cfg);
std::vector<double> peak_offsets(std::span<const Peak> peaks);

struct LaneAssignment {
  std::vector<std::vector<std::size_t>> lanes;  // point indices per offset
  std::vector<std::size_t> outliers;
};

// Nearest-offset assignment with a lateral gate; ties join the lower index.
LaneAssignment assign_points_to_lanes(std::span<const double> residuals,
                                      std::span<const double> offsets,
                                      double gate = 0.5);

struct AttributeConfig {
  std::size_t min_points = 10;
  double bucket = 1.0;   // m
  double min_gap = 3.0;  // m
  int min_gaps = 2;
  // Style analysis stops here; beyond it pixel rows are too sparse to tell a
  // paint gap from a sampling gap.
  double max_range = 30.0;
};

// Colour by majority tag, style by longitudinal gaps.
std::vector<LaneAttributes> classify_attributes(
    const LaneAssignment& assignment, std::span<const BevPoint> lane_points,
    std::span<const LaneColor> colors, const AttributeConfig& cfg = {});

struct TrackerState {
  std::optional<LaneSet> previous;
  long frame_counter = 0;
  int consecutive_failures = 0;
};

struct TrackerConfig {
  int max_failures = 3;
};

struct InferenceConfig {
  CostConfig cost;
  OptimizerConfig optimizer;
  HypothesisBox box;
  PeakConfig peaks;
  AttributeConfig attributes;
  TrackerConfig tracker;
  double assignment_gate = 0.5;
  bool slope_compensation = true;
  bool sequential = true;
  // Externally supplied starting point (e.g. map curvature); used when no
  // previous frame is available.
  std::optional<LaneHypothesis> external_init;

  void validate() const;
};

enum class InitSource { kScan, kPrevious, kExternal, kNone };

struct FrameInference {
  LaneSet lanes;
  OptResult optimization;
  // Simplex iterations spent in the slope profile before the final search.
  int profile_iterations = 0;
  InitSource init_source = InitSource::kNone;
  LaneHypothesis init;   // from the scan, the tracker or the caller
  LaneHypothesis start;  // where the final search began
  // Diagnostics at the optimum.
  OffsetHistogram histogram;
  std::vector<Peak> peaks;
  std::vector<Peak> rejected_peaks;
  std::vector<double> lane_residuals;
  std::vector<double> road_residuals;
  std::vector<BevPoint> corrected_lane;
  LaneAssignment assignment;
  bool success = false;

  int total_iterations() const { return profile_iterations + optimization.iterations; }
};

// Full per-frame inference. Mutates the tracker.
FrameInference infer_lanes(const FramePoints& frame, const InferenceConfig& cfg,
                           TrackerState& tracker);

}  // namespace lanefit
