#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lanefit/config.hpp"
#include "lanefit/scenegen.hpp"

namespace lanefit {

enum class InputMode { kAuto, kMaskDir, kSceneSpec };

struct RunConfig {
  std::filesystem::path input;
  // kAuto picks kMaskDir for a directory and kSceneSpec for a file.
  InputMode mode = InputMode::kAuto;
  std::optional<std::filesystem::path> camera;
  std::optional<std::filesystem::path> classes;
  std::optional<std::filesystem::path> config;
  // Used instead of `config` when set; lets callers skip the file.
  std::optional<PipelineSettings> settings;
  std::filesystem::path out;
  bool slope_compensation = true;
  bool sequential = true;
  std::optional<int> expected_lanes;
  bool overlay = false;
  bool panels = false;       // residual and histogram panels next to overlays
  bool save_masks = false;   // generated masks plus truth records
  std::optional<std::uint64_t> seed;
  int threads = 0;  // frame workers when not sequential; 0 = hardware

  // Throws ConfigError.
  void validate() const;
};

struct RunSummary {
  std::size_t frames = 0;
  std::size_t failures = 0;  // frames without a lane estimate
  std::size_t errors = 0;    // frames that could not be read or generated
  std::optional<nlohmann::json> metrics;  // aggregate block, if truth was known
};

// Scene spec file:
//   {
//     "mode": "single" | "clip" | "random",
//     "seed": 7,
//     "camera": { camera object },                       (optional)
//     "scene": {                                         (single, clip)
//       "a1": 0.0, "a2": 0.0, "b": 0.0,
//       "road_center": 0.0, "road_half_width": 7.0,
//       "marking_half_width": 0.075, "y_extent": 60, "point_noise": 0.0,
//       "lanes": [{"offset": -1.75, "color": "white",
//                  "dash": {"on": 3, "off": 6, "phase": 0}}],
//       "degradation": {"dropout": 0, "label_noise": 0,
//                       "occlusion_fraction": 0,
//                       "occlusions": [[u0, v0, u1, v1]]}
//     },
//     "frames": 20,                                      (clip)
//     "motion": {"dy": 1.0, "a1_rate": 0, "a2_rate": 0, "b_rate": 0,
//                "offset_rate": 0, "reseed_noise": false},
//     "count": 100,                                      (random; frames run
//                                                         independently)
//     "random": {"min_lanes": 2, "max_lanes": 4, "a1_max": 0.2, ...},
//     "degradation": { as above }                        (random, optional)
//   }
// Returns the per-frame specs. `seed` replaces the file's seed.
std::vector<SceneSpec> scenes_from_json(const nlohmann::json& j, const CameraModel& camera,
                                        std::optional<std::uint64_t> seed = std::nullopt);
std::vector<SceneSpec> load_scenes(const std::filesystem::path& path,
                                   std::optional<CameraModel> camera = std::nullopt,
                                   std::optional<std::uint64_t> seed = std::nullopt);

// Writes lanes.jsonl, timing.jsonl, metrics.txt (when truth is known) and
// overlays/ under cfg.out. Per-frame problems are logged and skipped.
// Throws ConfigError or IoError for problems with the run as a whole.
RunSummary run_pipeline(const RunConfig& cfg, std::ostream& log);

}  // namespace lanefit
