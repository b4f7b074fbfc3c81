#include "lanefit/render.hpp"

#include <algorithm>
#include <cmath>

namespace lanefit {
namespace {

bool in_segments(const std::vector<Segment>& segments, double y) {
  return std::any_of(segments.begin(), segments.end(),
                     [y](const Segment& s) { return y >= s.y_begin && y <= s.y_end; });
}

RgbImage::Color lane_color(LaneColor c, const OverlayConfig& cfg) {
  switch (c) {
    case LaneColor::kWhite:
      return cfg.white_lane;
    case LaneColor::kYellow:
      return cfg.yellow_lane;
    case LaneColor::kUnknown:
      break;
  }
  return cfg.unknown_lane;
}

}  // namespace

RgbImage mask_canvas(const SemanticMask& mask, const ClassMap& classes) {
  RgbImage out(mask.width, mask.height);
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      switch (classes.role(mask.at(u, v))) {
        case PixelRole::kRoad:
          out.set(u, v, {70, 70, 70});
          break;
        case PixelRole::kLane:
          out.set(u, v, {170, 170, 170});
          break;
        case PixelRole::kOther:
          break;
      }
    }
  }
  return out;
}

RgbImage render_overlay(const RgbImage& canvas, const LaneSet& lanes, const CameraModel& camera,
                        const OverlayConfig& cfg) {
  RgbImage out = canvas;
  for (std::size_t i = 0; i < lanes.offsets.size(); ++i) {
    const LaneAttributes attr =
        i < lanes.attributes.size() ? lanes.attributes[i] : LaneAttributes{};
    const bool gapped = attr.style == LaneStyle::kDashed && !attr.segments.empty();
    const RgbImage::Color color = lane_color(attr.color, cfg);
    std::optional<ImagePoint> prev;
    double prev_y = 0.0;
    for (const auto& p : sample_lane(lanes.offsets[i], lanes.shared, cfg.y_min, cfg.y_max,
                                     cfg.y_step)) {
      std::optional<ImagePoint> q = try_bev_to_image(camera, p, lanes.slope);
      if (q && !camera.contains(*q)) q.reset();
      const bool painted =
          !gapped || (in_segments(attr.segments, p.y) && in_segments(attr.segments, prev_y));
      if (q && prev && painted) out.line(prev->u, prev->v, q->u, q->v, cfg.line_radius, color);
      prev = q;
      prev_y = p.y;
    }
  }
  return out;
}

RgbImage residual_panel(std::span<const BevPoint> corrected_lane,
                        std::span<const double> residuals, std::span<const double> offsets,
                        const CostConfig& cost, const PanelConfig& cfg) {
  RgbImage out(cfg.width, cfg.height, {255, 255, 255});
  const double span = cost.range_max - cost.range_min;
  auto col = [&](double d) { return (d - cost.range_min) / span * (cfg.width - 1); };
  auto row = [&](double y) { return (1.0 - y / cfg.y_max) * (cfg.height - 1); };
  for (double o : offsets) out.line(col(o), 0, col(o), cfg.height - 1, 0, {220, 60, 60});
  const std::size_t n = std::min(corrected_lane.size(), residuals.size());
  for (std::size_t i = 0; i < n; ++i) {
    out.set(static_cast<int>(std::lround(col(residuals[i]))),
            static_cast<int>(std::lround(row(corrected_lane[i].y))), {0, 0, 0});
  }
  return out;
}

RgbImage histogram_panel(const OffsetHistogram& hist, std::span<const Peak> peaks,
                         std::span<const Peak> rejected, const PanelConfig& cfg) {
  RgbImage out(cfg.width, cfg.height, {255, 255, 255});
  if (hist.counts.empty()) return out;
  const int top = std::max(1, *std::max_element(hist.counts.begin(), hist.counts.end()));
  const double bin_px = static_cast<double>(cfg.width) / static_cast<double>(hist.counts.size());
  auto row = [&](double count) { return (1.0 - count / top) * (cfg.height - 1); };
  auto centre = [&](std::size_t bin) { return (static_cast<double>(bin) + 0.5) * bin_px; };
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (hist.counts[i] == 0) continue;
    const int u0 = static_cast<int>(std::floor(i * bin_px));
    const int u1 = std::max(u0, static_cast<int>(std::floor((i + 1) * bin_px)) - 1);
    out.fill_rect(u0, static_cast<int>(std::lround(row(hist.counts[i]))), u1, cfg.height - 1,
                  {90, 90, 160});
  }
  for (const auto& p : rejected) {
    out.dot(static_cast<int>(std::lround(centre(p.bin))),
            static_cast<int>(std::lround(row(p.height))), 3, {150, 150, 150});
  }
  for (const auto& p : peaks) {
    const double u = centre(p.bin);
    out.line(u, row(p.height), u, row(p.height - p.prominence), 0, {220, 30, 30});
    out.dot(static_cast<int>(std::lround(u)), static_cast<int>(std::lround(row(p.height))), 3,
            {220, 30, 30});
  }
  return out;
}

}  // namespace lanefit
