#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanefit/geometry.hpp"
#include "lanefit/lane_model.hpp"

namespace lanefit {

// Semantic taxonomy with four levels:
//   1: sky | vertical | support
//   2: vertical -> person, car, building, ...; support -> sidewalk, ground,
//      terrain, curb, drivable
//   3: drivable -> road, parking, crosswalk, lane_marking, bike_lane, ...
//   4: lane_marking -> dividing, guiding, turning, stop_line
// plus a parentless "void".
struct TaxonomyNode {
  std::string_view name;
  std::string_view parent;  // empty for level-1 nodes and void
  int level;
};

std::span<const TaxonomyNode> taxonomy();
const TaxonomyNode* find_taxonomy_node(std::string_view name);
bool has_ancestor(std::string_view name, std::string_view ancestor);

enum class PixelRole : std::uint8_t { kOther, kRoad, kLane };

struct ClassEntry {
  int label_value = 0;
  std::string class_name;
  LaneColor color = LaneColor::kUnknown;
};

// Label value -> taxonomy class. Labels without an entry are "other".
class ClassMap {
 public:
  ClassMap() { lookup_.fill(-1); }
  // Throws ConfigError for out-of-range or duplicate labels and unknown
  // class names.
  explicit ClassMap(std::vector<ClassEntry> entries);

  // Vocabulary written by the scene generator.
  static ClassMap scenegen_default();
  // Reads {"classes": [{label_value, class_name, color_tag}, ...]}.
  static ClassMap load(const std::filesystem::path& path);

  bool contains(std::uint8_t label) const { return lookup_[label] >= 0; }
  PixelRole role(std::uint8_t label) const { return roles_[label]; }
  LaneColor color(std::uint8_t label) const { return colors_[label]; }
  const ClassEntry* entry(std::uint8_t label) const {
    return lookup_[label] >= 0 ? &entries_[static_cast<std::size_t>(lookup_[label])] : nullptr;
  }
  const std::vector<ClassEntry>& entries() const { return entries_; }

 private:
  std::vector<ClassEntry> entries_;
  std::array<int, 256> lookup_{};
  std::array<PixelRole, 256> roles_{};
  std::array<LaneColor, 256> colors_{};
};

struct SemanticMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;  // row-major

  std::uint8_t at(int u, int v) const {
    return labels[static_cast<std::size_t>(v) * width + u];
  }
  std::uint8_t& at(int u, int v) { return labels[static_cast<std::size_t>(v) * width + u]; }
  bool operator==(const SemanticMask&) const = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

struct LoadedMask {
  SemanticMask mask;
  std::size_t unknown_labels = 0;  // pixels whose label has no class entry
};

// Throws IoError when unreadable, FormatError for the wrong pixel format or a
// size different from `expected`.
LoadedMask load_mask(const std::filesystem::path& path, const ClassMap& classes,
                     std::optional<ImageSize> expected = std::nullopt);
void save_mask(const std::filesystem::path& path, const SemanticMask& mask);

enum class Thinning : std::uint8_t {
  kStride,       // every n-th candidate in raster order
  kRowBalanced,  // equal per-row budget, evenly spaced within a row
};

struct ExtractConfig {
  // Region of interest on flat-ground coordinates: y_min < y <= y_max,
  // |x| <= x_max.
  double y_min = 0.0;
  double y_max = 60.0;
  double x_max = 12.0;
  std::size_t max_road_points = 4000;
  std::size_t max_lane_points = 4000;
  // Keep every n-th candidate; 0 picks the smallest stride within the cap.
  std::size_t road_stride = 0;
  // Road pixels are read on a grid of this pitch (rows and columns) before
  // the cap applies.
  int road_grid = 16;
  std::size_t lane_stride = 0;
  Thinning road_thinning = Thinning::kStride;
  Thinning lane_thinning = Thinning::kRowBalanced;
};

// Maps road and lane pixels below the horizon onto the flat ground, filters
// by the ROI and thins to the configured caps with a deterministic stride.
// Throws FormatError when the mask does not match the camera image size.
FramePoints extract_points(const SemanticMask& mask, const CameraModel& camera,
                           const ClassMap& classes, const ExtractConfig& cfg = {});

}  // namespace lanefit
