#pragma once

#include <span>
#include <vector>

#include "lanefit/hypothesis.hpp"
#include "lanefit/lane_model.hpp"

namespace lanefit {

struct CostConfig {
  double sigma_d = 3.0;   // road-fit width, m
  double kappa = 2.0;     // weight of the out-of-range penalty in J2
  double lambda = 0.001;  // weight of J1 in the total cost
  double bin_width = 0.05;  // residual histogram bin, m
  double range_min = -12.0;
  double range_max = 12.0;
  // Returned when no lane residual falls in range or a point cannot be
  // slope-corrected. Finite so that simplex ranking stays well defined.
  double sentinel = 1e6;
  double slope_epsilon = kDefaultSlopeEpsilon;

  void validate() const;
  int bin_count() const;
};

// Fixed-width histogram of lane residuals over [range_min, range_max].
struct OffsetHistogram {
  double range_min = 0.0;
  double bin_width = 0.0;
  std::vector<int> counts;
  int total = 0;     // N_l: every residual, in range or not
  int in_range = 0;  // n_l
  double entropy = 0.0;  // nats

  double bin_center(std::size_t i) const {
    return range_min + (static_cast<double>(i) + 0.5) * bin_width;
  }
  double bin_edge(std::size_t i) const {
    return range_min + static_cast<double>(i) * bin_width;
  }
};

// Shannon entropy (nats) of normalised counts, 0*ln(0) = 0.
double histogram_entropy(std::span<const int> counts, int total);

// J1 = -sum_i exp(-((x_i - f(a0c, a; y_i)) / sigma_d)^2).
double road_cost_j1(std::span<const BevPoint> road, double central_offset,
                    const SharedParams& shared, const CostConfig& cfg);

OffsetHistogram offset_histogram(std::span<const double> residuals,
                                 const CostConfig& cfg);

// J2 = entropy(hist) + kappa * N_l / n_l; 0 for no points, the sentinel
// when n_l = 0.
double lane_cost_j2(std::span<const BevPoint> lane, const SharedParams& shared,
                    const CostConfig& cfg);

// J = lambda * J1 + J2 after slope-correcting every point with hyp.b.
double total_cost(const FramePoints& frame, const LaneHypothesis& hyp,
                  const CostConfig& cfg);

// Allocation-free evaluator of total_cost for repeated use on one frame.
// Not thread-safe; create one per thread.
class CostEvaluator {
 public:
  CostEvaluator(const FramePoints& frame, const CostConfig& cfg);

  double operator()(const LaneHypothesis& hyp);
  long evaluations() const { return evaluations_; }

 private:
  const FramePoints& frame_;
  CostConfig cfg_;
  std::vector<int> counts_;
  long evaluations_ = 0;
};

}  // namespace lanefit
