#include "lanefit/lane_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lanefit/errors.hpp"
#include "lanefit/records.hpp"

namespace lanefit {

std::string_view to_string(LaneColor c) {
  switch (c) {
    case LaneColor::kWhite:
      return "white";
    case LaneColor::kYellow:
      return "yellow";
    default:
      return "unknown";
  }
}

std::string_view to_string(LaneStyle s) {
  switch (s) {
    case LaneStyle::kSolid:
      return "solid";
    case LaneStyle::kDashed:
      return "dashed";
    default:
      return "unknown";
  }
}

LaneColor parse_lane_color(std::string_view s) {
  if (s == "white") return LaneColor::kWhite;
  if (s == "yellow") return LaneColor::kYellow;
  if (s == "unknown" || s.empty()) return LaneColor::kUnknown;
  throw FormatError("unknown lane color '" + std::string(s) + "'");
}

LaneStyle parse_lane_style(std::string_view s) {
  if (s == "solid") return LaneStyle::kSolid;
  if (s == "dashed") return LaneStyle::kDashed;
  if (s == "unknown" || s.empty()) return LaneStyle::kUnknown;
  throw FormatError("unknown lane style '" + std::string(s) + "'");
}

void validate(const LaneSet& lanes, double min_separation) {
  if (lanes.attributes.size() != lanes.offsets.size()) {
    throw FormatError("lane attributes do not match the offset count");
  }
  for (std::size_t i = 1; i < lanes.offsets.size(); ++i) {
    if (!(lanes.offsets[i] - lanes.offsets[i - 1] >= min_separation)) {
      std::ostringstream msg;
      msg << "lane offsets " << lanes.offsets[i - 1] << " and "
          << lanes.offsets[i] << " violate the minimum separation "
          << min_separation;
      throw FormatError(msg.str());
    }
  }
  if (!(lanes.confidence >= 0.0 && lanes.confidence <= 1.0)) {
    throw FormatError("confidence outside [0, 1]");
  }
}

std::vector<BevPoint> sample_lane(double a0, const SharedParams& shared,
                                  double y_begin, double y_end, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sample step must be > 0");
  std::vector<BevPoint> out;
  if (y_end < y_begin) return out;
  const auto n = static_cast<std::size_t>(std::floor((y_end - y_begin) / step));
  out.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) {
    const double y = y_begin + static_cast<double>(k) * step;
    if (y >= y_end) break;
    out.push_back({eval_lane(a0, shared, y), y});
  }
  out.push_back({eval_lane(a0, shared, y_end), y_end});
  return out;
}

std::vector<double> residual_offsets(std::span<const BevPoint> points,
                                     const SharedParams& shared) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.x - eval_lane(0.0, shared, p.y));
  return out;
}

nlohmann::json to_record(std::int64_t frame_id, const LaneSet& lanes,
                         std::optional<double> timing_ms) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : lanes.attributes) {
    nlohmann::json j = {{"color", to_string(a.color)},
                        {"style", to_string(a.style)}};
    if (!a.segments.empty()) {
      nlohmann::json segs = nlohmann::json::array();
      for (const auto& s : a.segments) segs.push_back({s.y_begin, s.y_end});
      j["segments"] = std::move(segs);
    }
    attrs.push_back(std::move(j));
  }
  nlohmann::json record = {{"frame_id", frame_id},
                           {"a1", lanes.shared.a1},
                           {"a2", lanes.shared.a2},
                           {"b", lanes.slope.b},
                           {"a0c", lanes.central_offset},
                           {"offsets", lanes.offsets},
                           {"attributes", std::move(attrs)},
                           {"confidence", lanes.confidence}};
  if (timing_ms) record["timing_ms"] = *timing_ms;
  return record;
}

LaneSet lane_set_from_record(const nlohmann::json& record) {
  try {
    LaneSet lanes;
    lanes.shared.a1 = record.at("a1").get<double>();
    lanes.shared.a2 = record.at("a2").get<double>();
    lanes.slope.b = record.at("b").get<double>();
    lanes.central_offset = record.value("a0c", 0.0);
    lanes.offsets = record.at("offsets").get<std::vector<double>>();
    for (const auto& a : record.at("attributes")) {
      LaneAttributes attr;
      attr.color = parse_lane_color(a.value("color", "unknown"));
      attr.style = parse_lane_style(a.value("style", "unknown"));
      if (a.contains("segments")) {
        for (const auto& s : a.at("segments")) {
          attr.segments.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
        }
      }
      lanes.attributes.push_back(std::move(attr));
    }
    lanes.confidence = record.at("confidence").get<double>();
    if (lanes.attributes.size() != lanes.offsets.size()) {
      throw FormatError("attributes/offsets length mismatch");
    }
    return lanes;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed lane record: ") + e.what());
  }
}

}  // namespace lanefit
