#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>

#include "lanefit/lane_model.hpp"

namespace lanefit {

// Per-frame output record (one JSON object per line in lanes.jsonl):
//   frame_id     integer
//   a1           heading, dimensionless
//   a2           curvature coefficient, 1/m
//   b            road slope coefficient, dimensionless
//   a0c          road central-line offset, m
//   offsets      lane-line offsets, m, ascending
//   attributes   [{color, style, segments?}] parallel to offsets;
//                segments are [y_begin, y_end] pairs in m
//   confidence   0..1
//   timing_ms    optional, wall-clock inference time
nlohmann::json to_record(std::int64_t frame_id, const LaneSet& lanes,
                         std::optional<double> timing_ms = std::nullopt);

// Inverse of to_record. Throws FormatError on a malformed record.
LaneSet lane_set_from_record(const nlohmann::json& record);

}  // namespace lanefit
