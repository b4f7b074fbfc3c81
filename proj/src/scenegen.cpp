#include "lanefit/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    // Box-Muller, kept local so that results do not depend on the standard
    // library's distribution implementation.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

void check_spec(const SceneSpec& spec) {
  if (!(spec.road_half_width > 0.0)) throw GenerationError("road half-width must be > 0");
  if (!(spec.marking_half_width > 0.0)) throw GenerationError("marking half-width must be > 0");
  if (!(spec.y_extent > 0.0)) throw GenerationError("y extent must be > 0");
  for (const auto& lane : spec.lanes) {
    if (std::abs(lane.offset - spec.road_center) > spec.road_half_width) {
      throw GenerationError("lane offset " + std::to_string(lane.offset) +
                            " lies outside the road");
    }
  }
  const auto& d = spec.degradation;
  if (!(d.dropout >= 0.0 && d.dropout <= 1.0) || !(d.label_noise >= 0.0 && d.label_noise <= 1.0)) {
    throw GenerationError("degradation fractions must lie in [0, 1]");
  }
  if (!(spec.point_noise >= 0.0)) throw GenerationError("point noise must be >= 0");
}

struct GroundHit {
  bool hit = false;
  double x = 0.0;
  double y = 0.0;
};

inline GroundHit intersect(const Eigen::Vector3d& r, double b, double h) {
  const double denom = r.z() - b * r.y();
  if (!(denom < -1e-12 * r.norm())) return {};
  const double s = -h / denom;
  return {true, s * r.x(), s * r.y()};
}

struct Render {
  SemanticMask mask;
  std::vector<std::int8_t> lane_id;  // -1 where no lane
  bool any_ground = false;
};

// Lanes sorted by offset, so lane_id indexes the truth LaneSet.
Render render_clean(const SceneSpec& spec, const std::vector<LaneSpec>& lanes) {
  const CameraModel& cam = spec.camera;
  const int w = cam.image_width();
  const int hgt = cam.image_height();
  const double h = cam.height();
  const double b = spec.slope.b;

  Render out;
  out.mask.width = w;
  out.mask.height = hgt;
  out.mask.labels.assign(static_cast<std::size_t>(w) * hgt, spec.labels.sky);
  out.lane_id.assign(out.mask.labels.size(), -1);

  std::vector<std::vector<double>> jitter(lanes.size(), std::vector<double>(hgt, 0.0));
  if (spec.point_noise > 0.0) {
    Rng rng(mix_seed(spec.seed, 1));
    for (auto& lane : jitter) {
      for (double& j : lane) j = spec.point_noise * rng.normal();
    }
  }

  const Eigen::Matrix3d& t = cam.transform();
  const Eigen::Vector3d du = t.col(0);
  for (int v = 0; v < hgt; ++v) {
    const Eigen::Vector3d row0 = t * Eigen::Vector3d(0.0, v, 1.0);
    for (int u = 0; u < w; ++u) {
      const GroundHit g = intersect(row0 + static_cast<double>(u) * du, b, h);
      const std::size_t idx = static_cast<std::size_t>(v) * w + u;
      if (!g.hit) continue;
      if (!(g.y > 0.0 && g.y <= spec.y_extent)) {
        out.mask.labels[idx] = spec.labels.none;
        continue;
      }
      out.any_ground = true;
      const double d = g.x - eval_lane(0.0, spec.shared, g.y);
      std::uint8_t label = std::abs(d - spec.road_center) <= spec.road_half_width
                               ? spec.labels.road
                               : spec.labels.terrain;
      for (std::size_t k = 0; k < lanes.size(); ++k) {
        if (std::abs(d - lanes[k].offset - jitter[k][static_cast<std::size_t>(v)]) <=
                spec.marking_half_width &&
            lanes[k].dash.painted(g.y)) {
          label = spec.labels.lane(lanes[k].color);
          out.lane_id[idx] = static_cast<std::int8_t>(k);
          break;
        }
      }
      out.mask.labels[idx] = label;
    }
  }
  return out;
}

std::vector<LaneSpec> sorted_lanes(const SceneSpec& spec) {
  std::vector<LaneSpec> lanes = spec.lanes;
  std::stable_sort(lanes.begin(), lanes.end(),
                   [](const LaneSpec& a, const LaneSpec& b) { return a.offset < b.offset; });
  return lanes;
}

void occlude(Render& r, const OcclusionRect& rect, std::uint8_t label) {
  const int w = r.mask.width;
  for (int v = std::max(0, rect.v0); v <= std::min(r.mask.height - 1, rect.v1); ++v) {
    for (int u = std::max(0, rect.u0); u <= std::min(w - 1, rect.u1); ++u) {
      const std::size_t idx = static_cast<std::size_t>(v) * w + u;
      r.mask.labels[idx] = label;
      r.lane_id[idx] = -1;
    }
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool DashPattern::painted(double y) const {
  if (solid()) return true;
  const double period = on + off;
  double m = std::fmod(y + phase, period);
  if (m < 0.0) m += period;
  return m < on;
}

CameraModel default_camera() {
  return CameraModel::from_angles({1000.0, 1000.0, 640.0, 360.0}, {0.0, 1.5, 0.0}, 1.5, 1280,
                                  720);
}

GeneratedScene generate_scene(const SceneSpec& spec) {
  check_spec(spec);
  const std::vector<LaneSpec> lanes = sorted_lanes(spec);
  Render r = render_clean(spec, lanes);
  if (!r.any_ground) throw GenerationError("camera sees no ground inside the rendered extent");

  for (const auto& rect : spec.degradation.occlusions) occlude(r, rect, spec.labels.occluder);

  auto& labels = r.mask.labels;
  if (spec.degradation.dropout > 0.0) {
    Rng rng(mix_seed(spec.seed, 2));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (r.lane_id[i] < 0) continue;
      if (rng.uniform() < spec.degradation.dropout) {
        labels[i] = spec.labels.road;
        r.lane_id[i] = -1;
      }
    }
  }
  if (spec.degradation.label_noise > 0.0) {
    const double p = spec.degradation.label_noise;
    Rng rng(mix_seed(spec.seed, 3));
    const std::uint8_t choices[3] = {spec.labels.road, spec.labels.white_lane,
                                     spec.labels.yellow_lane};
    std::size_t lane_count = 0;
    std::vector<std::size_t> road_pixels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (r.lane_id[i] >= 0) {
        ++lane_count;
        if (rng.uniform() < p) {
          std::uint8_t next = labels[i];
          while (next == labels[i]) next = choices[rng.integer(0, 2)];
          labels[i] = next;
          if (next == spec.labels.road) r.lane_id[i] = -1;
        }
      } else if (labels[i] == spec.labels.road) {
        road_pixels.push_back(i);
      }
    }
    const auto speckles = static_cast<std::size_t>(std::lround(p * lane_count));
    for (std::size_t k = 0; k < speckles && !road_pixels.empty(); ++k) {
      const std::size_t i = road_pixels[static_cast<std::size_t>(
          rng.integer(0, static_cast<int>(road_pixels.size()) - 1))];
      labels[i] = rng.uniform() < 0.5 ? spec.labels.white_lane : spec.labels.yellow_lane;
    }
  }

  GeneratedScene out;
  out.truth.shared = spec.shared;
  out.truth.slope = spec.slope;
  out.truth.central_offset = spec.road_center;
  out.truth.confidence = 1.0;
  for (const auto& lane : lanes) {
    out.truth.offsets.push_back(lane.offset);
    LaneAttributes a;
    a.color = lane.color;
    a.style = lane.dash.solid() ? LaneStyle::kSolid : LaneStyle::kDashed;
    out.truth.attributes.push_back(a);
  }
  out.lane_pixels.assign(lanes.size(), 0);
  for (auto id : r.lane_id) {
    if (id >= 0) ++out.lane_pixels[static_cast<std::size_t>(id)];
  }

  // Pixel footprint along the centre column.
  const CameraModel& cam = spec.camera;
  const int uc = cam.image_width() / 2;
  for (int v = 0; v + 1 < cam.image_height(); ++v) {
    const auto g = intersect(cam.ray({double(uc), double(v)}), spec.slope.b, cam.height());
    const auto gu = intersect(cam.ray({double(uc + 1), double(v)}), spec.slope.b, cam.height());
    const auto gv = intersect(cam.ray({double(uc), double(v + 1)}), spec.slope.b, cam.height());
    if (!g.hit || !gu.hit || !gv.hit || !(g.y > 0.0 && g.y <= spec.y_extent)) continue;
    out.lateral_quantum = std::max(out.lateral_quantum, std::hypot(gu.x - g.x, gu.y - g.y));
    out.longitudinal_quantum =
        std::max(out.longitudinal_quantum, std::hypot(gv.x - g.x, gv.y - g.y));
  }
  out.mask = std::move(r.mask);
  return out;
}

std::vector<OcclusionRect> plan_occlusions(const SceneSpec& spec, double target_fraction,
                                           std::uint64_t seed) {
  check_spec(spec);
  const std::vector<LaneSpec> lanes = sorted_lanes(spec);
  Render r = render_clean(spec, lanes);
  std::vector<std::size_t> lane_pixels;
  for (std::size_t i = 0; i < r.lane_id.size(); ++i) {
    if (r.lane_id[i] >= 0) lane_pixels.push_back(i);
  }
  std::vector<OcclusionRect> rects;
  if (lane_pixels.empty() || !(target_fraction > 0.0)) return rects;

  const double total = static_cast<double>(lane_pixels.size());
  std::size_t hidden = 0;
  Rng rng(seed);
  const int w = r.mask.width;
  const int hgt = r.mask.height;
  for (int attempt = 0; attempt < 10000 && hidden < target_fraction * total; ++attempt) {
    const std::size_t centre = lane_pixels[static_cast<std::size_t>(
        rng.integer(0, static_cast<int>(lane_pixels.size()) - 1))];
    if (r.lane_id[centre] < 0) continue;
    const int cu = static_cast<int>(centre % static_cast<std::size_t>(w));
    const int cv = static_cast<int>(centre / static_cast<std::size_t>(w));
    // Vehicle-like boxes, smaller towards the horizon.
    const double scale = std::clamp((cv - hgt * 0.45) / (hgt * 0.55), 0.1, 1.0);
    int half_w = static_cast<int>(rng.uniform(60.0, 200.0) * scale) + 4;
    int half_h = static_cast<int>(rng.uniform(30.0, 90.0) * scale) + 3;
    for (int shrink = 0; shrink < 6; ++shrink) {
      OcclusionRect rect{cu - half_w, cv - half_h, cu + half_w, cv + half_h};
      std::size_t covered = 0;
      for (int v = std::max(0, rect.v0); v <= std::min(hgt - 1, rect.v1); ++v) {
        for (int u = std::max(0, rect.u0); u <= std::min(w - 1, rect.u1); ++u) {
          covered += r.lane_id[static_cast<std::size_t>(v) * w + u] >= 0;
        }
      }
      const bool overshoot = hidden + covered > (target_fraction + 0.05) * total;
      if (overshoot && shrink < 5) {
        half_w = std::max(2, half_w / 2);
        half_h = std::max(2, half_h / 2);
        continue;
      }
      occlude(r, rect, spec.labels.occluder);
      hidden += covered;
      rects.push_back(rect);
      break;
    }
  }
  return rects;
}

std::vector<SceneSpec> generate_clip(const SceneSpec& spec, int frames, const ClipMotion& motion,
                                     std::uint64_t seed) {
  std::vector<SceneSpec> out;
  out.reserve(static_cast<std::size_t>(std::max(0, frames)));
  for (int k = 0; k < frames; ++k) {
    SceneSpec s = spec;
    const double kk = static_cast<double>(k);
    s.shared.a1 = spec.shared.a1 + kk * motion.a1_rate;
    s.shared.a2 = spec.shared.a2 + kk * motion.a2_rate;
    s.slope.b = spec.slope.b + kk * motion.b_rate;
    s.road_center = spec.road_center + kk * motion.offset_rate;
    for (auto& lane : s.lanes) {
      lane.offset += kk * motion.offset_rate;
      lane.dash.phase += kk * motion.dy;
    }
    s.seed = motion.reseed_noise ? mix_seed(seed, static_cast<std::uint64_t>(k)) : seed;
    out.push_back(std::move(s));
  }
  return out;
}

SceneSpec random_scene(const RandomSceneConfig& cfg, std::uint64_t seed,
                       const CameraModel& camera) {
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Rng rng(mix_seed(seed, 100 + static_cast<std::uint64_t>(attempt)));
    SceneSpec s;
    s.camera = camera;
    s.seed = mix_seed(seed, 7);
    s.point_noise = cfg.point_noise;
    s.shared = {rng.uniform(-cfg.a1_max, cfg.a1_max), rng.uniform(-cfg.a2_max, cfg.a2_max)};
    s.slope = {rng.uniform(-cfg.b_max, cfg.b_max)};
    const int n = rng.integer(cfg.min_lanes, cfg.max_lanes);
    const double width = rng.uniform(cfg.lane_width_min, cfg.lane_width_max);
    const int left = rng.integer(1, n - 1);
    const double shift = rng.uniform(-0.5, 0.5);
    for (int j = 0; j < n; ++j) {
      LaneSpec lane;
      lane.offset = (j - left + 0.5) * width + shift;
      lane.color = (j == 0 && rng.uniform() < cfg.yellow_probability) ? LaneColor::kYellow
                                                                       : LaneColor::kWhite;
      if (j > 0 && j < n - 1 && rng.uniform() < cfg.dashed_probability) {
        lane.dash = cfg.dash;
        lane.dash.phase = rng.uniform(0.0, cfg.dash.on + cfg.dash.off);
      }
      s.lanes.push_back(lane);
    }
    const double lo = s.lanes.front().offset;
    const double hi = s.lanes.back().offset;
    s.road_center = 0.5 * (lo + hi);
    s.road_half_width = 0.5 * (hi - lo) + rng.uniform(0.5, 1.5);

    const GeneratedScene g = generate_scene(s);
    const bool visible = std::all_of(g.lane_pixels.begin(), g.lane_pixels.end(),
                                     [&](std::size_t c) { return c >= cfg.min_lane_pixels; });
    if (visible) return s;
  }
  throw GenerationError("no random scene with every lane visible after " +
                        std::to_string(cfg.max_attempts) + " attempts");
}

}  // namespace lanefit
