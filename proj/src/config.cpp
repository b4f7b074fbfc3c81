#include "lanefit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::string_view section, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_thinning(const json& j, const char* key, Thinning& out) {
  std::string name;
  read(j, key, name);
  if (name.empty()) return;
  if (name == "stride") {
    out = Thinning::kStride;
  } else if (name == "row_balanced") {
    out = Thinning::kRowBalanced;
  } else {
    throw ConfigError(std::string("bad value for '") + key + "': expected stride or row_balanced");
  }
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << path.string() << ":" << line << ":" << col << ": " << e.what();
    throw ConfigError(msg.str());
  }
}

CameraModel camera_from_json(const json& j) {
  check_keys(j, "camera",
             {"fx", "fy", "cx", "cy", "roll_deg", "pitch_deg", "yaw_deg", "height_m",
              "image_width", "image_height", "translation_m"});
  CameraIntrinsics k;
  MountAngles a;
  double height = 0.0;
  int width = 0;
  int rows = 0;
  std::vector<double> t{0.0, 0.0, 0.0};
  for (const char* key : {"fx", "fy", "cx", "cy", "height_m", "image_width", "image_height"}) {
    if (!j.contains(key)) throw ConfigError(std::string("camera: missing '") + key + "'");
  }
  read(j, "fx", k.fx);
  read(j, "fy", k.fy);
  read(j, "cx", k.cx);
  read(j, "cy", k.cy);
  read(j, "roll_deg", a.roll_deg);
  read(j, "pitch_deg", a.pitch_deg);
  read(j, "yaw_deg", a.yaw_deg);
  read(j, "height_m", height);
  read(j, "image_width", width);
  read(j, "image_height", rows);
  read(j, "translation_m", t);
  if (t.size() != 3) throw ConfigError("camera: translation_m needs 3 values");
  return CameraModel::from_angles(k, a, height, width, rows, Eigen::Vector3d(t[0], t[1], t[2]));
}

CameraModel load_camera(const std::filesystem::path& path) {
  try {
    return camera_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + what);
  }
}

json camera_to_json(const CameraModel& camera) {
  // Angles are not stored on the model; recover them from the rotation.
  const Eigen::Matrix3d& r = camera.rotation();
  // Optical axis in the ground frame is the third row of the rotation.
  const Eigen::Vector3d axis = r.row(2).transpose();
  const double pitch = std::asin(std::clamp(-axis.z(), -1.0, 1.0));
  const double yaw = std::atan2(-axis.x(), axis.y());
  const MountAngles no_roll{0.0, pitch * 180.0 / std::numbers::pi, yaw * 180.0 / std::numbers::pi};
  const Eigen::Matrix3d base = rotation_from_angles(no_roll);
  const Eigen::Matrix3d roll_m = r * base.transpose();
  const double roll = std::atan2(roll_m(1, 0), roll_m(0, 0));
  const auto& k = camera.intrinsics();
  return json{{"fx", k.fx},
              {"fy", k.fy},
              {"cx", k.cx},
              {"cy", k.cy},
              {"roll_deg", roll * 180.0 / std::numbers::pi},
              {"pitch_deg", pitch * 180.0 / std::numbers::pi},
              {"yaw_deg", yaw * 180.0 / std::numbers::pi},
              {"height_m", camera.height()},
              {"image_width", camera.image_width()},
              {"image_height", camera.image_height()},
              {"translation_m",
               {camera.translation().x(), camera.translation().y(), camera.translation().z()}}};
}

PipelineSettings settings_from_json(const json& j) {
  PipelineSettings s;
  check_keys(j, "config",
             {"cost", "optimizer", "box", "peaks", "attributes", "tracker", "extract",
              "assignment_gate"});
  auto& inf = s.inference;
  read(j, "assignment_gate", inf.assignment_gate);
  if (j.contains("cost")) {
    const auto& c = j["cost"];
    check_keys(c, "cost",
               {"sigma_d", "kappa", "lambda", "bin_width", "range_min", "range_max", "sentinel",
                "slope_epsilon"});
    read(c, "sigma_d", inf.cost.sigma_d);
    read(c, "kappa", inf.cost.kappa);
    read(c, "lambda", inf.cost.lambda);
    read(c, "bin_width", inf.cost.bin_width);
    read(c, "range_min", inf.cost.range_min);
    read(c, "range_max", inf.cost.range_max);
    read(c, "sentinel", inf.cost.sentinel);
    read(c, "slope_epsilon", inf.cost.slope_epsilon);
  }
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    check_keys(o, "optimizer",
               {"initial_steps", "cost_tolerance", "diameter_tolerance", "max_iterations",
                "scan_points", "restart", "restart_jitter", "restart_seed", "barrier_weight",
                "warm_start_step_scale", "polish_restarts", "profile_points",
                "profile_decimation", "profile_max_iterations"});
    if (o.contains("initial_steps")) {
      const auto steps = o["initial_steps"].get<std::vector<double>>();
      if (steps.size() != 4) throw ConfigError("optimizer.initial_steps needs 4 values");
      std::copy(steps.begin(), steps.end(), inf.optimizer.initial_steps.begin());
    }
    read(o, "cost_tolerance", inf.optimizer.cost_tolerance);
    read(o, "diameter_tolerance", inf.optimizer.diameter_tolerance);
    read(o, "max_iterations", inf.optimizer.max_iterations);
    read(o, "scan_points", inf.optimizer.scan_points);
    read(o, "restart", inf.optimizer.restart);
    read(o, "restart_jitter", inf.optimizer.restart_jitter);
    read(o, "restart_seed", inf.optimizer.restart_seed);
    read(o, "barrier_weight", inf.optimizer.barrier_weight);
    read(o, "warm_start_step_scale", inf.optimizer.warm_start_step_scale);
    read(o, "polish_restarts", inf.optimizer.polish_restarts);
    read(o, "profile_points", inf.optimizer.profile_points);
    read(o, "profile_decimation", inf.optimizer.profile_decimation);
    read(o, "profile_max_iterations", inf.optimizer.profile_max_iterations);
  }
  if (j.contains("box")) {
    const auto& b = j["box"];
    check_keys(b, "box", {"a0c", "a1", "a2", "b"});
    read(b, "a0c", inf.box.central_offset);
    read(b, "a1", inf.box.a1);
    read(b, "a2", inf.box.a2);
    read(b, "b", inf.box.b);
  }
  if (j.contains("peaks")) {
    const auto& p = j["peaks"];
    check_keys(p, "peaks",
               {"min_separation", "min_prominence", "min_prominence_fraction", "bin_width",
                "expected_lanes"});
    read(p, "min_separation", inf.peaks.min_separation);
    read(p, "min_prominence", inf.peaks.min_prominence);
    read(p, "min_prominence_fraction", inf.peaks.min_prominence_fraction);
    read(p, "bin_width", inf.peaks.bin_width);
    if (p.contains("expected_lanes") && !p["expected_lanes"].is_null()) {
      inf.peaks.expected_lanes = p["expected_lanes"].get<int>();
    }
  }
  if (j.contains("attributes")) {
    const auto& a = j["attributes"];
    check_keys(a, "attributes", {"min_points", "bucket", "min_gap", "min_gaps", "max_range"});
    read(a, "min_points", inf.attributes.min_points);
    read(a, "bucket", inf.attributes.bucket);
    read(a, "min_gap", inf.attributes.min_gap);
    read(a, "min_gaps", inf.attributes.min_gaps);
    read(a, "max_range", inf.attributes.max_range);
  }
  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    check_keys(t, "tracker", {"max_failures"});
    read(t, "max_failures", inf.tracker.max_failures);
  }
  if (j.contains("extract")) {
    const auto& e = j["extract"];
    check_keys(e, "extract",
               {"y_min", "y_max", "x_max", "max_road_points", "max_lane_points", "road_stride",
                "lane_stride", "road_grid", "road_thinning", "lane_thinning"});
    read(e, "y_min", s.extract.y_min);
    read(e, "y_max", s.extract.y_max);
    read(e, "x_max", s.extract.x_max);
    read(e, "max_road_points", s.extract.max_road_points);
    read(e, "max_lane_points", s.extract.max_lane_points);
    read(e, "road_stride", s.extract.road_stride);
    read(e, "lane_stride", s.extract.lane_stride);
    read(e, "road_grid", s.extract.road_grid);
    read_thinning(e, "road_thinning", s.extract.road_thinning);
    read_thinning(e, "lane_thinning", s.extract.lane_thinning);
  }
  inf.validate();
  return s;
}

PipelineSettings load_settings(const std::filesystem::path& path) {
  try {
    return settings_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + what);
  }
}

}  // namespace lanefit
