#include "lanefit/inference.hpp"

#include <algorithm>

#include "lanefit/errors.hpp"

namespace lanefit {

void InferenceConfig::validate() const {
  cost.validate();
  optimizer.validate();
  peaks.validate();
  if (!(assignment_gate > 0.0)) throw ConfigError("assignment_gate must be > 0");
  if (tracker.max_failures < 1) throw ConfigError("tracker.max_failures must be >= 1");
}

namespace {

LaneHypothesis clamp_to(const LaneHypothesis& h, const HypothesisBox& box) {
  auto v = h.to_array();
  const auto lim = box.limits();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], -lim[i], lim[i]);
  return LaneHypothesis::from_array(v);
}

void record_outcome(TrackerState& tracker, const FrameInference& result,
                    const TrackerConfig& cfg) {
  if (result.success) {
    tracker.previous = result.lanes;
    tracker.consecutive_failures = 0;
    return;
  }
  ++tracker.consecutive_failures;
  if (tracker.consecutive_failures >= cfg.max_failures) {
    tracker.previous.reset();
    tracker.consecutive_failures = 0;
  }
}

}  // namespace

FrameInference infer_lanes(const FramePoints& frame, const InferenceConfig& cfg,
                           TrackerState& tracker) {
  ++tracker.frame_counter;
  FrameInference out;
  const ActiveSet active = cfg.slope_compensation ? ActiveSet{} : ActiveSet::without_slope();

  if (frame.empty()) {
    record_outcome(tracker, out, cfg.tracker);
    return out;
  }

  double step_scale = 1.0;
  if (cfg.sequential && tracker.previous && tracker.previous->confidence > 0.0) {
    out.init = init_from_previous(*tracker.previous);
    out.init_source = InitSource::kPrevious;
    step_scale = cfg.optimizer.warm_start_step_scale;
  } else if (cfg.external_init) {
    out.init = *cfg.external_init;
    out.init_source = InitSource::kExternal;
  } else {
    try {
      out.init = init_by_scan(frame, cfg.optimizer, cfg.cost, cfg.box, active);
      out.init_source = InitSource::kScan;
    } catch (const InitializationError&) {
      record_outcome(tracker, out, cfg.tracker);
      return out;
    }
  }
  if (!cfg.slope_compensation) out.init.b = 0.0;
  out.init = clamp_to(out.init, cfg.box);
  out.start = out.init;
  if (out.init_source == InitSource::kScan) {
    // The scan fixes the central offset; heading and curvature restart from
    // zero at every slope of the profile.
    const LaneHypothesis seed{out.init.central_offset, 0.0, 0.0, out.init.b};
    const ProfileResult profile =
        profile_slope(frame, seed, cfg.optimizer, cfg.cost, cfg.box, active);
    out.profile_iterations = profile.iterations;
    out.start = profile.best;
  }

  CostEvaluator cost(frame, cfg.cost);
  const HypothesisObjective objective = [&cost](const LaneHypothesis& h) { return cost(h); };
  out.optimization =
      minimize_hypothesis(objective, out.start, cfg.optimizer, cfg.box, active, step_scale);
  const LaneHypothesis& best = out.optimization.best;

  LaneSet& lanes = out.lanes;
  lanes.shared = best.shared();
  lanes.slope = best.slope();
  lanes.central_offset = best.central_offset;

  const double h = frame.camera_height;
  out.corrected_lane.reserve(frame.lane.size());
  std::vector<LaneColor> colors;
  colors.reserve(frame.lane.size());
  for (std::size_t i = 0; i < frame.lane.size(); ++i) {
    BevPoint q;
    if (!slope_correct_into(frame.lane[i].x, frame.lane[i].y, best.b, h,
                            cfg.cost.slope_epsilon, q)) {
      continue;
    }
    out.corrected_lane.push_back(q);
    colors.push_back(i < frame.lane_colors.size() ? frame.lane_colors[i] : LaneColor::kUnknown);
  }
  for (const auto& p : frame.road) {
    BevPoint q;
    if (slope_correct_into(p.x, p.y, best.b, h, cfg.cost.slope_epsilon, q)) {
      out.road_residuals.push_back(q.x - eval_lane(0.0, lanes.shared, q.y));
    }
  }
  out.lane_residuals = residual_offsets(out.corrected_lane, lanes.shared);
  CostConfig peak_bins = cfg.cost;
  if (cfg.peaks.bin_width > 0.0) peak_bins.bin_width = cfg.peaks.bin_width;
  out.histogram = offset_histogram(out.lane_residuals, peak_bins);
  // Points lost to the slope horizon still count towards N_l.
  out.histogram.total = static_cast<int>(frame.lane.size());

  out.peaks = find_peaks(out.histogram, cfg.peaks);
  for (const auto& p : local_maxima(out.histogram)) {
    const bool kept = std::any_of(out.peaks.begin(), out.peaks.end(),
                                  [&](const Peak& q) { return q.bin == p.bin; });
    if (!kept) out.rejected_peaks.push_back(p);
  }
  lanes.offsets = peak_offsets(out.peaks);

  out.assignment =
      assign_points_to_lanes(out.lane_residuals, lanes.offsets, cfg.assignment_gate);
  lanes.attributes =
      classify_attributes(out.assignment, out.corrected_lane, colors, cfg.attributes);

  if (frame.lane.empty() || out.histogram.total == 0) {
    lanes.confidence = 0.0;
  } else {
    const double inlier = static_cast<double>(out.histogram.in_range) /
                          static_cast<double>(out.histogram.total);
    lanes.confidence = inlier * (out.optimization.converged ? 1.0 : 0.5);
  }
  if (lanes.offsets.empty()) lanes.confidence = 0.0;
  out.success = !lanes.offsets.empty() && lanes.confidence > 0.0;
  record_outcome(tracker, out, cfg.tracker);
  return out;
}

}  // namespace lanefit
