#include "lanefit/cost.hpp"

#include <cmath>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

// Bin of residual d, or -1 when outside [range_min, range_max].
inline int bin_of(double d, double range_min, double range_max, double width,
                  int bins) {
  if (!(d >= range_min && d <= range_max)) return -1;
  int i = static_cast<int>(std::floor((d - range_min) / width));
  if (i >= bins) i = bins - 1;
  if (i < 0) i = 0;
  return i;
}

inline double road_term(double x, double y, double central_offset,
                        const SharedParams& shared, double inv_sigma) {
  const double r = (x - eval_lane(central_offset, shared, y)) * inv_sigma;
  return std::exp(-(r * r));
}

}  // namespace

void CostConfig::validate() const {
  if (!(sigma_d > 0.0)) throw ConfigError("cost.sigma_d must be > 0");
  if (!(kappa >= 0.0)) throw ConfigError("cost.kappa must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("cost.lambda must be >= 0");
  if (!(bin_width > 0.0)) throw ConfigError("cost.bin_width must be > 0");
  if (!(range_max > range_min)) throw ConfigError("cost histogram range is empty");
  if (!(sentinel > 0.0) || !std::isfinite(sentinel)) {
    throw ConfigError("cost.sentinel must be finite and > 0");
  }
}

int CostConfig::bin_count() const {
  return std::max(1, static_cast<int>(std::ceil((range_max - range_min) / bin_width - 1e-9)));
}

double histogram_entropy(std::span<const int> counts, int total) {
  if (total <= 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(total);
  double h = 0.0;
  for (int c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) * inv;
    h -= p * std::log(p);
  }
  return h > 0.0 ? h : 0.0;
}

double road_cost_j1(std::span<const BevPoint> road, double central_offset,
                    const SharedParams& shared, const CostConfig& cfg) {
  const double inv_sigma = 1.0 / cfg.sigma_d;
  double sum = 0.0;
  for (const auto& p : road) {
    sum += road_term(p.x, p.y, central_offset, shared, inv_sigma);
  }
  return -sum;
}

OffsetHistogram offset_histogram(std::span<const double> residuals,
                                 const CostConfig& cfg) {
  OffsetHistogram h;
  const int bins = cfg.bin_count();
  h.range_min = cfg.range_min;
  h.bin_width = cfg.bin_width;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  h.total = static_cast<int>(residuals.size());
  for (double d : residuals) {
    const int i = bin_of(d, cfg.range_min, cfg.range_max, cfg.bin_width, bins);
    if (i < 0) continue;
    ++h.counts[static_cast<std::size_t>(i)];
    ++h.in_range;
  }
  h.entropy = histogram_entropy(h.counts, h.in_range);
  return h;
}

double lane_cost_j2(std::span<const BevPoint> lane, const SharedParams& shared,
                    const CostConfig& cfg) {
  if (lane.empty()) return 0.0;
  const auto residuals = residual_offsets(lane, shared);
  const auto h = offset_histogram(residuals, cfg);
  if (h.in_range == 0) return cfg.sentinel;
  return h.entropy + cfg.kappa * static_cast<double>(h.total) /
                         static_cast<double>(h.in_range);
}

double total_cost(const FramePoints& frame, const LaneHypothesis& hyp,
                  const CostConfig& cfg) {
  CostEvaluator eval(frame, cfg);
  return eval(hyp);
}

CostEvaluator::CostEvaluator(const FramePoints& frame, const CostConfig& cfg)
    : frame_(frame), cfg_(cfg) {
  cfg_.validate();
  counts_.assign(static_cast<std::size_t>(cfg_.bin_count()), 0);
}

double CostEvaluator::operator()(const LaneHypothesis& hyp) {
  ++evaluations_;
  const double h = frame_.camera_height;
  const double b = hyp.b;
  const double eps = cfg_.slope_epsilon;
  const SharedParams shared = hyp.shared();
  BevPoint q;

  double j1 = 0.0;
  if (cfg_.lambda != 0.0 && !frame_.road.empty()) {
    const double inv_sigma = 1.0 / cfg_.sigma_d;
    double sum = 0.0;
    for (const auto& p : frame_.road) {
      if (!slope_correct_into(p.x, p.y, b, h, eps, q)) return cfg_.sentinel;
      sum += road_term(q.x, q.y, hyp.central_offset, shared, inv_sigma);
    }
    j1 = -sum;
  }

  double j2 = 0.0;
  if (!frame_.lane.empty()) {
    std::fill(counts_.begin(), counts_.end(), 0);
    const int bins = static_cast<int>(counts_.size());
    int in_range = 0;
    for (const auto& p : frame_.lane) {
      if (!slope_correct_into(p.x, p.y, b, h, eps, q)) return cfg_.sentinel;
      const double d = q.x - eval_lane(0.0, shared, q.y);
      const int i = bin_of(d, cfg_.range_min, cfg_.range_max, cfg_.bin_width, bins);
      if (i < 0) continue;
      ++counts_[static_cast<std::size_t>(i)];
      ++in_range;
    }
    if (in_range == 0) return cfg_.sentinel;
    const double total = static_cast<double>(frame_.lane.size());
    j2 = histogram_entropy(counts_, in_range) +
         cfg_.kappa * total / static_cast<double>(in_range);
  }
  return cfg_.lambda * j1 + j2;
}

}  // namespace lanefit
