#pragma once

#include <span>

#include "lanefit/cost.hpp"
#include "lanefit/geometry.hpp"
#include "lanefit/image_io.hpp"
#include "lanefit/inference.hpp"
#include "lanefit/ingest.hpp"
#include "lanefit/lane_model.hpp"

namespace lanefit {

struct OverlayConfig {
  double y_min = 0.5;  // m
  double y_max = 60.0;
  double y_step = 0.1;
  int line_radius = 1;  // px
  RgbImage::Color white_lane{0, 0, 255};
  RgbImage::Color yellow_lane{255, 255, 0};
  RgbImage::Color unknown_lane{0, 255, 0};
};

// Dim rendering of a label map: road grey, lane markings light grey, the
// rest black.
RgbImage mask_canvas(const SemanticMask& mask, const ClassMap& classes);

// Draws every lane of the set onto a copy of the canvas. Dashed lanes are
// drawn only inside their observed segments.
RgbImage render_overlay(const RgbImage& canvas, const LaneSet& lanes, const CameraModel& camera,
                        const OverlayConfig& cfg = {});

struct PanelConfig {
  int width = 480;
  int height = 360;
  double y_max = 60.0;  // ground range of the scatter panel
};

// Slope-corrected lane points with lateral residual on the horizontal axis
// and range upwards; estimated offsets as vertical lines.
RgbImage residual_panel(std::span<const BevPoint> corrected_lane,
                        std::span<const double> residuals, std::span<const double> offsets,
                        const CostConfig& cost, const PanelConfig& cfg = {});

// Residual histogram. Accepted peaks in red with their prominence as a bar
// to the flanking minimum, rejected maxima in grey.
RgbImage histogram_panel(const OffsetHistogram& hist, std::span<const Peak> peaks,
                         std::span<const Peak> rejected, const PanelConfig& cfg = {});

}  // namespace lanefit
