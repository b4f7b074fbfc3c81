#pragma once

#include <json.hpp>

#include <filesystem>

#include "lanefit/geometry.hpp"
#include "lanefit/inference.hpp"
#include "lanefit/ingest.hpp"

namespace lanefit {

// Parses a JSON file. Throws IoError when unreadable and ConfigError with
// "file:line:column" on a syntax error.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Camera file:
//   {
//     "fx": 1000, "fy": 1000, "cx": 640, "cy": 360,
//     "roll_deg": 0, "pitch_deg": 1.5, "yaw_deg": 0,
//     "height_m": 1.5,
//     "image_width": 1280, "image_height": 720,
//     "translation_m": [0, 0, 0]        (optional)
//   }
CameraModel camera_from_json(const nlohmann::json& j);
CameraModel load_camera(const std::filesystem::path& path);
nlohmann::json camera_to_json(const CameraModel& camera);

// Settings of one run; every field has a default.
struct PipelineSettings {
  InferenceConfig inference;
  ExtractConfig extract;
};

// Main config file with optional sections "cost", "optimizer", "box",
// "peaks", "attributes", "tracker", "extract" and "assignment_gate". Unknown
// keys are rejected.
PipelineSettings settings_from_json(const nlohmann::json& j);
PipelineSettings load_settings(const std::filesystem::path& path);

}  // namespace lanefit
