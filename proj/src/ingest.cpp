#include "lanefit/ingest.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "lanefit/config.hpp"
#include "lanefit/errors.hpp"
#include "lanefit/image_io.hpp"

namespace lanefit {
namespace {

constexpr TaxonomyNode kTaxonomy[] = {
    {"void", "", 0},
    {"sky", "", 1},
    {"vertical", "", 1},
    {"support", "", 1},
    {"person", "vertical", 2},
    {"car", "vertical", 2},
    {"building", "vertical", 2},
    {"wall", "vertical", 2},
    {"bridge", "vertical", 2},
    {"tunnel", "vertical", 2},
    {"fence", "vertical", 2},
    {"vegetation", "vertical", 2},
    {"road_utility", "vertical", 2},
    {"sidewalk", "support", 2},
    {"ground", "support", 2},
    {"terrain", "support", 2},
    {"curb", "support", 2},
    {"drivable", "support", 2},
    {"road", "drivable", 3},
    {"parking", "drivable", 3},
    {"crosswalk", "drivable", 3},
    {"lane_marking", "drivable", 3},
    {"bike_lane", "drivable", 3},
    {"service_lane", "drivable", 3},
    {"catch_basin", "drivable", 3},
    {"manhole", "drivable", 3},
    {"pothole", "drivable", 3},
    {"dividing", "lane_marking", 4},
    {"guiding", "lane_marking", 4},
    {"turning", "lane_marking", 4},
    {"stop_line", "lane_marking", 4},
};

PixelRole role_of(std::string_view name) {
  if (name == "road") return PixelRole::kRoad;
  if (name == "lane_marking" || has_ancestor(name, "lane_marking")) return PixelRole::kLane;
  return PixelRole::kOther;
}

std::size_t auto_stride(std::size_t count, std::size_t cap) {
  if (cap == 0) return count + 1;
  return std::max<std::size_t>(1, (count + cap - 1) / cap);
}

struct Candidate {
  BevPoint point;
  int row = 0;
  std::uint8_t label = 0;
};

// Indices of the kept candidates, in input order. Candidates arrive grouped
// by row.
std::vector<std::size_t> thin(const std::vector<Candidate>& c, Thinning mode,
                              std::size_t stride, std::size_t cap) {
  std::vector<std::size_t> keep;
  if (mode == Thinning::kStride) {
    const std::size_t step = stride > 0 ? stride : auto_stride(c.size(), cap);
    for (std::size_t i = 0; i < c.size() && keep.size() < cap; i += step) keep.push_back(i);
    return keep;
  }

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == 0 || c[i].row != c[i - 1].row) starts.push_back(i);
  }
  starts.push_back(c.size());
  const std::size_t rows = starts.size() - 1;
  auto kept_with = [&](std::size_t per_row) {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows; ++r) n += std::min(per_row, starts[r + 1] - starts[r]);
    return n;
  };
  // Largest per-row budget within the cap.
  std::size_t lo = 0;
  std::size_t hi = c.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (kept_with(mid) <= cap) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t n = starts[r + 1] - starts[r];
    const std::size_t k = std::min(lo, n);
    for (std::size_t j = 0; j < k; ++j) keep.push_back(starts[r] + j * n / k);
  }
  return keep;
}

}  // namespace

std::span<const TaxonomyNode> taxonomy() { return kTaxonomy; }

const TaxonomyNode* find_taxonomy_node(std::string_view name) {
  for (const auto& n : kTaxonomy) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

bool has_ancestor(std::string_view name, std::string_view ancestor) {
  const TaxonomyNode* node = find_taxonomy_node(name);
  while (node && !node->parent.empty()) {
    if (node->parent == ancestor) return true;
    node = find_taxonomy_node(node->parent);
  }
  return false;
}

ClassMap::ClassMap(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {
  lookup_.fill(-1);
  roles_.fill(PixelRole::kOther);
  colors_.fill(LaneColor::kUnknown);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.label_value < 0 || e.label_value > 255) {
      throw ConfigError("class label " + std::to_string(e.label_value) + " outside 0..255");
    }
    if (!find_taxonomy_node(e.class_name)) {
      throw ConfigError("unknown class name '" + e.class_name + "'");
    }
    const auto idx = static_cast<std::size_t>(e.label_value);
    if (lookup_[idx] >= 0) {
      throw ConfigError("duplicate class label " + std::to_string(e.label_value));
    }
    const PixelRole role = role_of(e.class_name);
    if (role == PixelRole::kLane && !has_ancestor(e.class_name, "drivable")) {
      throw ConfigError("lane class '" + e.class_name + "' lacks a drivable ancestor");
    }
    lookup_[idx] = static_cast<int>(i);
    roles_[idx] = role;
    colors_[idx] = e.color;
  }
}

ClassMap ClassMap::scenegen_default() {
  return ClassMap({{0, "void", LaneColor::kUnknown},
                   {1, "sky", LaneColor::kUnknown},
                   {2, "road", LaneColor::kUnknown},
                   {3, "terrain", LaneColor::kUnknown},
                   {4, "car", LaneColor::kUnknown},
                   {10, "dividing", LaneColor::kWhite},
                   {11, "dividing", LaneColor::kYellow}});
}

ClassMap ClassMap::load(const std::filesystem::path& path) {
  const nlohmann::json doc = read_json_file(path);
  const nlohmann::json& list = doc.is_array() ? doc : doc.value("classes", nlohmann::json());
  if (!list.is_array()) throw ConfigError(path.string() + ": expected a 'classes' array");
  std::vector<ClassEntry> entries;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& item = list[i];
    try {
      ClassEntry e;
      e.label_value = item.at("label_value").get<int>();
      e.class_name = item.at("class_name").get<std::string>();
      e.color = parse_lane_color(item.value("color_tag", "unknown"));
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(path.string() + ": classes[" + std::to_string(i) + "]: " + ex.what());
    } catch (const FormatError& ex) {
      throw ConfigError(path.string() + ": classes[" + std::to_string(i) + "]: " + ex.what());
    }
  }
  try {
    return ClassMap(std::move(entries));
  } catch (const ConfigError& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
}

LoadedMask load_mask(const std::filesystem::path& path, const ClassMap& classes,
                     std::optional<ImageSize> expected) {
  GrayImage img = read_gray8(path);
  if (expected && (img.width != expected->width || img.height != expected->height)) {
    std::ostringstream msg;
    msg << path.string() << ": mask is " << img.width << "x" << img.height
        << " but the camera expects " << expected->width << "x" << expected->height;
    throw FormatError(msg.str());
  }
  LoadedMask out;
  out.mask.width = img.width;
  out.mask.height = img.height;
  out.mask.labels = std::move(img.pixels);
  for (std::uint8_t l : out.mask.labels) {
    if (!classes.contains(l)) ++out.unknown_labels;
  }
  return out;
}

void save_mask(const std::filesystem::path& path, const SemanticMask& mask) {
  GrayImage img{mask.width, mask.height, mask.labels};
  write_png(path, img);
}

FramePoints extract_points(const SemanticMask& mask, const CameraModel& camera,
                           const ClassMap& classes, const ExtractConfig& cfg) {
  if (mask.width != camera.image_width() || mask.height != camera.image_height()) {
    std::ostringstream msg;
    msg << "mask is " << mask.width << "x" << mask.height << " but the camera expects "
        << camera.image_width() << "x" << camera.image_height();
    throw FormatError(msg.str());
  }
  FramePoints out;
  out.camera_height = camera.height();

  std::vector<Candidate> road;
  std::vector<Candidate> lane;
  const Eigen::Matrix3d& t = camera.transform();
  const double h = camera.height();
  const int grid = std::max(1, cfg.road_grid);
  for (int v = 0; v < mask.height; ++v) {
    // Ray components are affine in u along a row.
    const Eigen::Vector3d row0 = t * Eigen::Vector3d(0.0, v, 1.0);
    const Eigen::Vector3d du = t.col(0);
    for (int u = 0; u < mask.width; ++u) {
      const std::uint8_t label = mask.at(u, v);
      const PixelRole role = classes.role(label);
      if (role == PixelRole::kOther) continue;
      if (role == PixelRole::kRoad && (u % grid != 0 || v % grid != 0)) continue;
      const Eigen::Vector3d r = row0 + static_cast<double>(u) * du;
      if (!(r.z() < -1e-9 * r.norm())) continue;
      const double s = -h / r.z();
      const BevPoint p{s * r.x(), s * r.y()};
      if (!(p.y > cfg.y_min && p.y <= cfg.y_max && std::abs(p.x) <= cfg.x_max)) continue;
      (role == PixelRole::kRoad ? road : lane).push_back({p, v, label});
    }
  }

  for (std::size_t i : thin(road, cfg.road_thinning, cfg.road_stride, cfg.max_road_points)) {
    out.road.push_back(road[i].point);
  }
  for (std::size_t i : thin(lane, cfg.lane_thinning, cfg.lane_stride, cfg.max_lane_points)) {
    out.lane.push_back(lane[i].point);
    out.lane_labels.push_back(lane[i].label);
    out.lane_colors.push_back(classes.color(lane[i].label));
  }
  return out;
}

}  // namespace lanefit
