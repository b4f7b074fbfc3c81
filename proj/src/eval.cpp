#include "lanefit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Column of `line` at `row`, if sampled there.
std::optional<double> col_at(const Polyline& line, int row) {
  const auto it = std::lower_bound(line.rows.begin(), line.rows.end(), row);
  if (it == line.rows.end() || *it != row) return std::nullopt;
  return line.cols[static_cast<std::size_t>(it - line.rows.begin())];
}

int ceil_multiple(double v, int step) {
  return static_cast<int>(std::ceil(v / step)) * step;
}

}  // namespace

Polyline lane_polyline(double offset, const SharedParams& shared, const SlopeModel& slope,
                       const CameraModel& camera, const SamplingConfig& cfg) {
  if (cfg.row_step < 1 || !(cfg.y_step > 0.0)) {
    throw ConfigError("sampling needs row_step >= 1 and y_step > 0");
  }
  std::map<int, double> by_row;
  std::optional<ImagePoint> prev;
  const auto samples = sample_lane(offset, shared, cfg.y_min, cfg.y_max, cfg.y_step);
  const double last_row = camera.image_height() - 1;
  for (const auto& p : samples) {
    std::optional<ImagePoint> q = try_bev_to_image(camera, p, slope);
    if (q && !camera.contains(*q)) q.reset();
    if (q && prev) {
      const double lo = std::max(0.0, std::min(prev->v, q->v));
      const double hi = std::min(last_row, std::max(prev->v, q->v));
      for (int r = ceil_multiple(lo, cfg.row_step); r <= hi; r += cfg.row_step) {
        if (by_row.contains(r)) continue;
        const double dv = q->v - prev->v;
        const double t = dv != 0.0 ? (r - prev->v) / dv : 0.0;
        by_row[r] = prev->u + t * (q->u - prev->u);
      }
    }
    prev = q;
  }
  Polyline out;
  if (by_row.size() < 2) return out;
  for (const auto& [r, c] : by_row) {
    out.rows.push_back(r);
    out.cols.push_back(c);
  }
  return out;
}

std::vector<Polyline> lane_polylines(const LaneSet& lanes, const CameraModel& camera,
                                     const SamplingConfig& cfg) {
  std::vector<Polyline> out;
  out.reserve(lanes.offsets.size());
  for (double a0 : lanes.offsets) {
    out.push_back(lane_polyline(a0, lanes.shared, lanes.slope, camera, cfg));
  }
  return out;
}

LaneGroundTruth LaneGroundTruth::from_lane_set(const LaneSet& truth, const CameraModel& camera,
                                               const SamplingConfig& cfg) {
  LaneGroundTruth gt;
  gt.sampling = cfg;
  gt.lanes = lane_polylines(truth, camera, cfg);
  return gt;
}

LaneGroundTruth LaneGroundTruth::from_tusimple(const nlohmann::json& j) {
  LaneGroundTruth gt;
  try {
    const auto rows = j.at("h_samples").get<std::vector<int>>();
    if (!std::is_sorted(rows.begin(), rows.end())) {
      throw FormatError("h_samples must ascend");
    }
    for (const auto& lane : j.at("lanes")) {
      const auto xs = lane.get<std::vector<double>>();
      if (xs.size() != rows.size()) throw FormatError("lane length differs from h_samples");
      Polyline p;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < 0.0) continue;
        p.rows.push_back(rows[i]);
        p.cols.push_back(xs[i]);
      }
      gt.lanes.push_back(std::move(p));
    }
    if (rows.size() >= 2) gt.sampling.row_step = std::max(1, rows[1] - rows[0]);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ground truth: ") + e.what());
  }
  return gt;
}

double mean_distance(const Polyline& a, const Polyline& b) {
  double sum = 0.0;
  int n = 0;
  std::size_t i = 0;
  std::size_t k = 0;
  while (i < a.size() && k < b.size()) {
    if (a.rows[i] < b.rows[k]) {
      ++i;
    } else if (b.rows[k] < a.rows[i]) {
      ++k;
    } else {
      sum += std::abs(a.cols[i] - b.cols[k]);
      ++n;
      ++i;
      ++k;
    }
  }
  return n > 0 ? sum / n : kInf;
}

std::vector<int> match_lanes(std::span<const Polyline> pred, std::span<const Polyline> gt,
                             double max_mean_distance) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      const double d = mean_distance(pred[p], gt[g]);
      if (std::isfinite(d) && d <= max_mean_distance) pairs.emplace_back(d, g, p);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> match(gt.size(), -1);
  std::vector<bool> used(pred.size(), false);
  for (const auto& [d, g, p] : pairs) {
    if (match[g] >= 0 || used[p]) continue;
    match[g] = static_cast<int>(p);
    used[p] = true;
  }
  return match;
}

double point_accuracy(std::span<const Polyline> pred, const LaneGroundTruth& gt,
                      double threshold_px) {
  std::size_t total = 0;
  for (const auto& lane : gt.lanes) total += lane.size();
  if (total == 0) return 0.0;
  const auto match = match_lanes(pred, gt.lanes, kInf);
  std::size_t hit = 0;
  for (std::size_t g = 0; g < gt.lanes.size(); ++g) {
    if (match[g] < 0) continue;
    const Polyline& p = pred[static_cast<std::size_t>(match[g])];
    const Polyline& t = gt.lanes[g];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto c = col_at(p, t.rows[i]);
      if (c && std::abs(*c - t.cols[i]) <= threshold_px) ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

double point_accuracy(const LaneSet& pred, const LaneGroundTruth& gt, const CameraModel& camera,
                      std::optional<SlopeModel> slope, double threshold_px) {
  LaneSet drawn = pred;
  if (slope) drawn.slope = *slope;
  const auto lines = lane_polylines(drawn, camera, gt.sampling);
  return point_accuracy(lines, gt, threshold_px);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(),
                                                [](std::uint8_t p) { return p != 0; }));
}

PixelScores pixel_f_measure(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height ||
      pred.pixels.size() != gt.pixels.size()) {
    throw FormatError("pixel_f_measure: mask sizes differ (" + std::to_string(pred.width) + "x" +
                      std::to_string(pred.height) + " vs " + std::to_string(gt.width) + "x" +
                      std::to_string(gt.height) + ")");
  }
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tn = 0.0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const bool p = pred.pixels[i] != 0;
    const bool g = gt.pixels[i] != 0;
    if (p && g) {
      ++tp;
    } else if (p) {
      ++fp;
    } else if (g) {
      ++fn;
    } else {
      ++tn;
    }
  }
  PixelScores s;
  s.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  s.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  s.false_positive_rate = fp + tn > 0.0 ? fp / (fp + tn) : 0.0;
  const double pr = s.precision + s.recall;
  s.f_measure = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

std::optional<BinaryMask> ego_lane_mask(const LaneSet& lanes, const CameraModel& camera,
                                        const EgoLaneConfig& cfg) {
  std::optional<double> left;
  std::optional<double> right;
  for (double o : lanes.offsets) {
    if (o <= 0.0 && (!left || o > *left)) left = o;
    if (o > 0.0 && (!right || o < *right)) right = o;
  }
  if (!left || !right) return std::nullopt;

  BinaryMask mask(camera.image_width(), camera.image_height());
  const double h = camera.height();
  const double b = lanes.slope.b;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      const Eigen::Vector3d r = camera.ray({static_cast<double>(u), static_cast<double>(v)});
      const double denom = r.z() - b * r.y();
      if (!(denom < 0.0)) continue;
      const double s = -h / denom;
      const double x = s * r.x();
      const double y = s * r.y();
      if (!(y > cfg.y_min && y <= cfg.y_max)) continue;
      if (x >= eval_lane(*left, lanes.shared, y) && x <= eval_lane(*right, lanes.shared, y)) {
        mask.at(u, v) = 1;
      }
    }
  }
  return mask;
}

PixelScores ego_lane_scores(const LaneSet& pred, const LaneSet& truth, const CameraModel& camera,
                            const EgoLaneConfig& cfg) {
  const BinaryMask empty(camera.image_width(), camera.image_height());
  const auto g = ego_lane_mask(truth, camera, cfg);
  const auto p = ego_lane_mask(pred, camera, cfg);
  return pixel_f_measure(p ? *p : empty, g ? *g : empty);
}

double tpr(std::span<const std::vector<Polyline>> pred,
           std::span<const std::vector<Polyline>> gt, double threshold_px) {
  if (pred.size() != gt.size()) throw FormatError("tpr: frame counts differ");
  std::size_t total = 0;
  std::size_t hit = 0;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    const auto match = match_lanes(pred[f], gt[f], threshold_px);
    total += gt[f].size();
    hit += static_cast<std::size_t>(std::count_if(match.begin(), match.end(),
                                                  [](int m) { return m >= 0; }));
  }
  return total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

double curvature_series_rmse(std::span<const double> pred, std::span<const double> reference) {
  if (pred.size() != reference.size()) {
    throw FormatError("curvature series lengths differ (" + std::to_string(pred.size()) +
                      " vs " + std::to_string(reference.size()) + ")");
  }
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - reference[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

std::vector<double> offset_errors(std::span<const double> pred, std::span<const double> truth) {
  std::vector<double> out;
  if (pred.empty()) return out;
  for (double t : truth) {
    double best = kInf;
    for (double p : pred) best = std::min(best, std::abs(p - t));
    out.push_back(best);
  }
  return out;
}

bool offsets_recovered(std::span<const double> pred, std::span<const double> truth,
                       double tolerance) {
  if (pred.size() != truth.size()) return false;
  std::vector<double> p(pred.begin(), pred.end());
  std::vector<double> t(truth.begin(), truth.end());
  std::sort(p.begin(), p.end());
  std::sort(t.begin(), t.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(std::abs(p[i] - t[i]) <= tolerance)) return false;
  }
  return true;
}

}  // namespace lanefit
