#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lanefit/cost.hpp"
#include "lanefit/hypothesis.hpp"
#include "lanefit/lane_model.hpp"

namespace lanefit {

struct OptimizerConfig {
  // Initial simplex step per variable (a0c, a1, a2, b). The simplex works in
  // coordinates divided by these steps.
  std::array<double, LaneHypothesis::kDim> initial_steps = {0.5, 0.02, 0.002,
                                                            0.02};
  double cost_tolerance = 1e-6;      // on max - min vertex cost
  double diameter_tolerance = 1e-4;  // scaled coordinates
  int max_iterations = 500;
  int scan_points = 41;
  // One restart from a jittered best point when the first run exhausts its
  // budget.
  bool restart = true;
  double restart_jitter = 0.1;  // fraction of the initial steps
  std::uint64_t restart_seed = 0x5eed;
  // Weight of the quadratic barrier applied outside the box, per squared
  // scaled unit of violation.
  double barrier_weight = 10.0;
  // Simplex step multiplier when starting from the previous frame.
  double warm_start_step_scale = 1.0;
  // Fresh simplex restarts from the optimum, repeated while they improve it.
  int polish_restarts = 3;
  // Slope profile: grid over the b box, each point refined by a simplex over
  // the other variables on every n-th point of the frame.
  int profile_points = 31;
  int profile_decimation = 4;
  int profile_max_iterations = 200;

  void validate() const;
};

struct OptResult {
  LaneHypothesis best;
  double best_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  // Best cost after each iteration; non-increasing.
  std::vector<double> trajectory;
  long evaluations = 0;
};

using HypothesisObjective = std::function<double(const LaneHypothesis&)>;

// Variables excluded from the search keep their initial value.
struct ActiveSet {
  std::array<bool, LaneHypothesis::kDim> active = {true, true, true, true};

  static ActiveSet without_slope() { return {{true, true, true, false}}; }
  int count() const {
    int n = 0;
    for (bool a : active) n += a ? 1 : 0;
    return n;
  }
};

// Nelder-Mead simplex minimisation (reflection 1, expansion 2, contraction
// 0.5, shrink 0.5). When a box is given, points outside it are evaluated at
// their projection onto the box plus a quadratic barrier, and the returned
// hypothesis is inside the box.
// Throws OptimizationError when the objective returns NaN.
OptResult nelder_mead(const HypothesisObjective& objective,
                      const LaneHypothesis& init, const OptimizerConfig& cfg,
                      const std::optional<HypothesisBox>& box = std::nullopt,
                      const ActiveSet& active = {},
                      double step_scale = 1.0);

// nelder_mead plus the deterministic restart policy of OptimizerConfig.
OptResult minimize_hypothesis(const HypothesisObjective& objective,
                              const LaneHypothesis& init,
                              const OptimizerConfig& cfg,
                              const HypothesisBox& box,
                              const ActiveSet& active = {},
                              double step_scale = 1.0);

struct ProfileResult {
  LaneHypothesis best;
  double best_cost = 0.0;  // on the decimated frame
  int iterations = 0;
  long evaluations = 0;
};

// Holds b at each profile grid value (only b = init.b when b is inactive),
// minimises over the other active variables from init and keeps the best.
// Throws InitializationError for an empty frame.
ProfileResult profile_slope(const FramePoints& frame, const LaneHypothesis& init,
                            const OptimizerConfig& cfg, const CostConfig& cost_cfg,
                            const HypothesisBox& box = {}, const ActiveSet& active = {});

// Sweeps each variable over its box on a regular grid with the other
// variables at zero and assembles the per-variable argmins.
// Throws InitializationError for an empty frame or when every probe of a
// variable returns the sentinel cost.
LaneHypothesis init_by_scan(const FramePoints& frame, const OptimizerConfig& cfg,
                            const CostConfig& cost_cfg,
                            const HypothesisBox& box = {},
                            const ActiveSet& active = {});

LaneHypothesis init_from_previous(const LaneSet& prev);

}  // namespace lanefit
