#include <algorithm>
#include <cmath>

#include "lanefit/errors.hpp"
#include "lanefit/inference.hpp"

namespace lanefit {

double PeakConfig::prominence_threshold(int total_points) const {
  return std::max(min_prominence, min_prominence_fraction * total_points);
}

void PeakConfig::validate() const {
  if (!(min_separation > 0.0)) throw ConfigError("peaks.min_separation must be > 0");
  if (!(min_prominence > 0.0)) throw ConfigError("peaks.min_prominence must be > 0");
  if (!(bin_width >= 0.0)) throw ConfigError("peaks.bin_width must be >= 0");
  if (!(min_prominence_fraction >= 0.0)) {
    throw ConfigError("peaks.min_prominence_fraction must be >= 0");
  }
  if (expected_lanes && *expected_lanes < 0) {
    throw ConfigError("peaks.expected_lanes must be >= 0");
  }
}

std::vector<Peak> local_maxima(const OffsetHistogram& hist) {
  const auto& c = hist.counts;
  const std::size_t n = c.size();
  std::vector<Peak> peaks;
  if (n < 3) return peaks;

  std::size_t i = 1;
  while (i + 1 < n) {
    if (c[i] <= c[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && c[j + 1] == c[i]) ++j;
    if (j + 1 >= n || c[j + 1] > c[i]) {
      i = j + 1;
      continue;
    }
    const int h = c[i];
    // Prominence: descend each side until a higher sample or the end.
    int left_min = h;
    for (std::size_t k = i; k-- > 0;) {
      if (c[k] > h) break;
      left_min = std::min(left_min, c[k]);
    }
    int right_min = h;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (c[k] > h) break;
      right_min = std::min(right_min, c[k]);
    }
    const std::size_t p = (i + j) / 2;
    const double lo = c[p - 1];
    const double mid = c[p];
    const double hi = c[p + 1];
    const double denom = lo - 2.0 * mid + hi;
    double delta = denom != 0.0 ? 0.5 * (lo - hi) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);

    Peak peak;
    peak.bin = p;
    peak.height = h;
    peak.prominence = h - std::max(left_min, right_min);
    peak.offset = hist.bin_center(p) + delta * hist.bin_width;
    peaks.push_back(peak);
    i = j + 1;
  }
  return peaks;
}

std::vector<Peak> find_peaks(const OffsetHistogram& hist, const PeakConfig& cfg) {
  const double min_prominence = cfg.prominence_threshold(hist.total);
  std::vector<Peak> candidates;
  for (const auto& p : local_maxima(hist)) {
    if (p.prominence >= min_prominence) candidates.push_back(p);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) {
                     if (a.prominence != b.prominence) return a.prominence > b.prominence;
                     return a.height > b.height;
                   });
  std::vector<Peak> kept;
  for (const auto& p : candidates) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Peak& q) {
      return std::abs(p.offset - q.offset) >= cfg.min_separation;
    });
    if (clear) kept.push_back(p);
  }
  if (cfg.expected_lanes && kept.size() > static_cast<std::size_t>(*cfg.expected_lanes)) {
    kept.resize(static_cast<std::size_t>(*cfg.expected_lanes));
  }
  std::sort(kept.begin(), kept.end(),
            [](const Peak& a, const Peak& b) { return a.offset < b.offset; });
  return kept;
}

std::vector<double> peak_offsets(std::span<const Peak> peaks) {
  std::vector<double> out;
  out.reserve(peaks.size());
  for (const auto& p : peaks) out.push_back(p.offset);
  return out;
}

LaneAssignment assign_points_to_lanes(std::span<const double> residuals,
                                      std::span<const double> offsets,
                                      double gate) {
  LaneAssignment out;
  out.lanes.resize(offsets.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double d = residuals[i];
    if (offsets.empty()) {
      out.outliers.push_back(i);
      continue;
    }
    auto it = std::lower_bound(offsets.begin(), offsets.end(), d);
    std::size_t lane;
    if (it == offsets.begin()) {
      lane = 0;
    } else if (it == offsets.end()) {
      lane = offsets.size() - 1;
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - offsets.begin());
      lane = (d - offsets[hi - 1] <= offsets[hi] - d) ? hi - 1 : hi;
    }
    if (std::abs(d - offsets[lane]) <= gate) {
      out.lanes[lane].push_back(i);
    } else {
      out.outliers.push_back(i);
    }
  }
  return out;
}

std::vector<LaneAttributes> classify_attributes(
    const LaneAssignment& assignment, std::span<const BevPoint> lane_points,
    std::span<const LaneColor> colors, const AttributeConfig& cfg) {
  std::vector<LaneAttributes> out;
  out.reserve(assignment.lanes.size());
  for (const auto& group : assignment.lanes) {
    LaneAttributes attr;
    if (group.size() < cfg.min_points) {
      out.push_back(attr);
      continue;
    }

    std::size_t white = 0;
    std::size_t yellow = 0;
    std::vector<double> ys;
    ys.reserve(group.size());
    for (std::size_t idx : group) {
      if (idx < colors.size()) {
        white += colors[idx] == LaneColor::kWhite;
        yellow += colors[idx] == LaneColor::kYellow;
      }
      ys.push_back(lane_points[idx].y);
    }
    if (white > yellow) {
      attr.color = LaneColor::kWhite;
    } else if (yellow > white) {
      attr.color = LaneColor::kYellow;
    }

    std::sort(ys.begin(), ys.end());
    const double lo = ys.front();
    const double hi = std::min(ys.back(), cfg.max_range);
    int gaps = 0;
    if (hi > lo) {
      const auto buckets = static_cast<std::size_t>(std::floor((hi - lo) / cfg.bucket)) + 1;
      std::vector<bool> occupied(buckets, false);
      for (double y : ys) {
        if (y > hi) break;
        occupied[std::min(buckets - 1, static_cast<std::size_t>((y - lo) / cfg.bucket))] = true;
      }
      std::size_t run = 0;
      for (std::size_t k = 0; k < buckets; ++k) {
        if (!occupied[k]) {
          ++run;
          continue;
        }
        if (static_cast<double>(run) * cfg.bucket >= cfg.min_gap) ++gaps;
        run = 0;
      }
    }
    attr.style = gaps >= cfg.min_gaps ? LaneStyle::kDashed : LaneStyle::kSolid;

    Segment seg{ys.front(), ys.front()};
    for (std::size_t k = 1; k < ys.size(); ++k) {
      if (attr.style == LaneStyle::kDashed && ys[k] - ys[k - 1] >= cfg.min_gap &&
          ys[k - 1] < cfg.max_range) {
        attr.segments.push_back(seg);
        seg = {ys[k], ys[k]};
      } else {
        seg.y_end = ys[k];
      }
    }
    attr.segments.push_back(seg);
    out.push_back(std::move(attr));
  }
  return out;
}

}  // namespace lanefit
