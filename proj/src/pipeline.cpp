#include "lanefit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "lanefit/errors.hpp"
#include "lanefit/eval.hpp"
#include "lanefit/records.hpp"
#include "lanefit/render.hpp"

namespace lanefit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string frame_name(std::int64_t id, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%06lld%s", static_cast<long long>(id), suffix);
  return buf;
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

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(section + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown key '" + key + "' in " + section);
    }
  }
}

struct DegradationSpec {
  Degradation degradation;
  double occlusion_fraction = 0.0;
};

DegradationSpec degradation_from_json(const json& j) {
  check_keys(j, "degradation", {"dropout", "label_noise", "occlusion_fraction", "occlusions"});
  DegradationSpec d;
  read(j, "dropout", d.degradation.dropout);
  read(j, "label_noise", d.degradation.label_noise);
  read(j, "occlusion_fraction", d.occlusion_fraction);
  if (j.contains("occlusions")) {
    for (const auto& r : j["occlusions"]) {
      const auto v = r.get<std::vector<int>>();
      if (v.size() != 4) throw ConfigError("occlusions need [u0, v0, u1, v1]");
      d.degradation.occlusions.push_back({v[0], v[1], v[2], v[3]});
    }
  }
  return d;
}

void apply_degradation(SceneSpec& spec, const DegradationSpec& d) {
  spec.degradation = d.degradation;
  if (d.occlusion_fraction > 0.0) {
    const auto rects = plan_occlusions(spec, d.occlusion_fraction, mix_seed(spec.seed, 0x0cc));
    spec.degradation.occlusions.insert(spec.degradation.occlusions.end(), rects.begin(),
                                       rects.end());
  }
}

SceneSpec scene_from_json(const json& j, const CameraModel& camera, std::uint64_t seed) {
  check_keys(j, "scene",
             {"a1", "a2", "b", "road_center", "road_half_width", "marking_half_width",
              "y_extent", "point_noise", "lanes", "degradation"});
  SceneSpec s;
  s.camera = camera;
  s.seed = seed;
  read(j, "a1", s.shared.a1);
  read(j, "a2", s.shared.a2);
  read(j, "b", s.slope.b);
  read(j, "road_center", s.road_center);
  read(j, "road_half_width", s.road_half_width);
  read(j, "marking_half_width", s.marking_half_width);
  read(j, "y_extent", s.y_extent);
  read(j, "point_noise", s.point_noise);
  if (!j.contains("lanes") || !j["lanes"].is_array()) {
    throw ConfigError("scene needs a 'lanes' array");
  }
  for (const auto& l : j["lanes"]) {
    check_keys(l, "lane", {"offset", "color", "dash"});
    LaneSpec lane;
    read(l, "offset", lane.offset);
    std::string color = "white";
    read(l, "color", color);
    try {
      lane.color = parse_lane_color(color);
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
    if (l.contains("dash")) {
      check_keys(l["dash"], "dash", {"on", "off", "phase"});
      read(l["dash"], "on", lane.dash.on);
      read(l["dash"], "off", lane.dash.off);
      read(l["dash"], "phase", lane.dash.phase);
    }
    s.lanes.push_back(lane);
  }
  std::sort(s.lanes.begin(), s.lanes.end(),
            [](const LaneSpec& a, const LaneSpec& b) { return a.offset < b.offset; });
  if (j.contains("degradation")) apply_degradation(s, degradation_from_json(j["degradation"]));
  return s;
}

RandomSceneConfig random_config_from_json(const json& j) {
  check_keys(j, "random",
             {"min_lanes", "max_lanes", "lane_width_min", "lane_width_max", "a1_max", "a2_max",
              "b_max", "point_noise", "yellow_probability", "dashed_probability", "dash_on",
              "dash_off", "min_lane_pixels", "max_attempts"});
  RandomSceneConfig c;
  read(j, "min_lanes", c.min_lanes);
  read(j, "max_lanes", c.max_lanes);
  read(j, "lane_width_min", c.lane_width_min);
  read(j, "lane_width_max", c.lane_width_max);
  read(j, "a1_max", c.a1_max);
  read(j, "a2_max", c.a2_max);
  read(j, "b_max", c.b_max);
  read(j, "point_noise", c.point_noise);
  read(j, "yellow_probability", c.yellow_probability);
  read(j, "dashed_probability", c.dashed_probability);
  read(j, "dash_on", c.dash.on);
  read(j, "dash_off", c.dash.off);
  read(j, "min_lane_pixels", c.min_lane_pixels);
  read(j, "max_attempts", c.max_attempts);
  return c;
}

ClipMotion motion_from_json(const json& j) {
  check_keys(j, "motion",
             {"dy", "a1_rate", "a2_rate", "b_rate", "offset_rate", "reseed_noise"});
  ClipMotion m;
  read(j, "dy", m.dy);
  read(j, "a1_rate", m.a1_rate);
  read(j, "a2_rate", m.a2_rate);
  read(j, "b_rate", m.b_rate);
  read(j, "offset_rate", m.offset_rate);
  read(j, "reseed_noise", m.reseed_noise);
  return m;
}

struct FrameTask {
  std::int64_t id = 0;
  std::optional<SceneSpec> spec;
  fs::path mask_path;
};

struct FrameOutcome {
  std::int64_t id = 0;
  LaneSet lanes;
  bool error = false;
  bool success = false;
  double extraction_ms = 0.0;
  double optimization_ms = 0.0;
  double total_ms = 0.0;
  int iterations = 0;
  std::optional<LaneSet> truth;
  std::optional<json> metrics;
  std::vector<std::string> messages;
};

struct Context {
  const RunConfig& run;
  PipelineSettings settings;
  ClassMap classes;
  std::optional<CameraModel> camera;  // mask-dir input
};

std::optional<LaneSet> read_truth_sidecar(const fs::path& mask_path) {
  fs::path p = mask_path;
  p.replace_extension(".truth.json");
  if (!fs::exists(p)) return std::nullopt;
  return lane_set_from_record(read_json_file(p));
}

json frame_metrics(std::int64_t id, const LaneSet& pred, const LaneSet& truth,
                   const CameraModel& camera, double y_extent) {
  SamplingConfig sampling;
  sampling.y_max = y_extent;
  const LaneGroundTruth gt = LaneGroundTruth::from_lane_set(truth, camera, sampling);
  const auto pred_lines = lane_polylines(pred, camera, sampling);
  const std::vector<std::vector<Polyline>> p1{pred_lines};
  const std::vector<std::vector<Polyline>> g1{gt.lanes};
  const auto errors = offset_errors(pred.offsets, truth.offsets);
  double mae = 0.0;
  for (double e : errors) mae += e;
  if (!errors.empty()) mae /= static_cast<double>(errors.size());
  EgoLaneConfig ego;
  ego.y_max = y_extent;
  const PixelScores s = ego_lane_scores(pred, truth, camera, ego);
  json m = {{"frame_id", id},
            {"point_accuracy", point_accuracy(pred_lines, gt)},
            {"tpr", tpr(p1, g1)},
            {"lanes_true", truth.offsets.size()},
            {"lanes_found", pred.offsets.size()},
            {"offsets_recovered", offsets_recovered(pred.offsets, truth.offsets, 0.15)},
            {"a1_error", std::abs(pred.shared.a1 - truth.shared.a1)},
            {"a2_error", std::abs(pred.shared.a2 - truth.shared.a2)},
            {"b_error", std::abs(pred.slope.b - truth.slope.b)},
            {"ego_f", s.f_measure},
            {"ego_precision", s.precision},
            {"ego_recall", s.recall},
            {"ego_fpr", s.false_positive_rate}};
  m["offset_mae"] = errors.empty() ? json(nullptr) : json(mae);
  return m;
}

FrameOutcome process_frame(const FrameTask& task, const Context& ctx, TrackerState& tracker) {
  const auto t0 = Clock::now();
  FrameOutcome out;
  out.id = task.id;
  const RunConfig& run = ctx.run;
  try {
    SemanticMask mask;
    const CameraModel& camera = task.spec ? task.spec->camera : *ctx.camera;
    double y_extent = 60.0;
    auto te = Clock::now();
    if (task.spec) {
      GeneratedScene g = generate_scene(*task.spec);
      mask = std::move(g.mask);
      out.truth = std::move(g.truth);
      y_extent = task.spec->y_extent;
      if (run.save_masks) {
        save_mask(run.out / "masks" / frame_name(task.id, ".png"), mask);
        std::ofstream(run.out / "masks" / frame_name(task.id, ".truth.json"))
            << to_record(task.id, *out.truth).dump() << "\n";
      }
      te = Clock::now();
    } else {
      LoadedMask loaded = load_mask(task.mask_path, ctx.classes,
                                    ImageSize{camera.image_width(), camera.image_height()});
      if (loaded.unknown_labels > 0) {
        out.messages.push_back(task.mask_path.string() + ": " +
                               std::to_string(loaded.unknown_labels) +
                               " pixels with unmapped labels treated as other");
      }
      mask = std::move(loaded.mask);
      out.truth = read_truth_sidecar(task.mask_path);
    }
    const FramePoints points = extract_points(mask, camera, ctx.classes, ctx.settings.extract);
    out.extraction_ms = ms_since(te);

    const auto ti = Clock::now();
    const FrameInference inf = infer_lanes(points, ctx.settings.inference, tracker);
    out.optimization_ms = ms_since(ti);
    out.lanes = inf.lanes;
    out.success = inf.success;
    out.iterations = inf.total_iterations();
    if (!inf.success) {
      out.messages.push_back("frame " + std::to_string(task.id) + ": no lanes found");
    }

    if (run.overlay) {
      const RgbImage canvas = mask_canvas(mask, ctx.classes);
      write_png(run.out / "overlays" / frame_name(task.id, ".png"),
                render_overlay(canvas, inf.lanes, camera));
      if (run.panels) {
        write_png(run.out / "overlays" / frame_name(task.id, "_residuals.png"),
                  residual_panel(inf.corrected_lane, inf.lane_residuals, inf.lanes.offsets,
                                 ctx.settings.inference.cost));
        write_png(run.out / "overlays" / frame_name(task.id, "_histogram.png"),
                  histogram_panel(inf.histogram, inf.peaks, inf.rejected_peaks));
      }
    }
    if (out.truth) out.metrics = frame_metrics(task.id, out.lanes, *out.truth, camera, y_extent);
  } catch (const Error& e) {
    out.error = true;
    out.lanes = LaneSet{};
    out.messages.push_back("frame " + std::to_string(task.id) + ": " + e.what());
  }
  out.total_ms = ms_since(t0);
  return out;
}

// Writes outcomes strictly in frame order, whatever order they finish in.
class OrderedWriter {
 public:
  OrderedWriter(const fs::path& out, std::ostream& log, bool metrics)
      : lanes_(out / "lanes.jsonl"), timing_(out / "timing.jsonl"), log_(log) {
    if (!lanes_ || !timing_) throw IoError("cannot write to " + out.string());
    if (metrics) {
      metrics_.open(out / "metrics.txt");
      if (!metrics_) throw IoError("cannot write " + (out / "metrics.txt").string());
    }
  }

  void submit(FrameOutcome o) {
    std::lock_guard lock(mu_);
    pending_.emplace(o.id, std::move(o));
    while (!pending_.empty() && pending_.begin()->first == next_) {
      write(pending_.begin()->second);
      pending_.erase(pending_.begin());
      ++next_;
    }
  }

  const std::vector<FrameOutcome>& done() const { return done_; }
  std::ofstream& metrics_stream() { return metrics_; }

 private:
  void write(FrameOutcome& o) {
    for (const auto& m : o.messages) log_ << "warning: " << m << "\n";
    lanes_ << to_record(o.id, o.lanes).dump() << "\n";
    timing_ << json{{"frame_id", o.id},
                    {"extraction_ms", o.extraction_ms},
                    {"optimization_ms", o.optimization_ms},
                    {"total_ms", o.total_ms},
                    {"iterations", o.iterations}}
                   .dump()
            << "\n";
    if (metrics_.is_open() && o.metrics) metrics_ << o.metrics->dump() << "\n";
    lanes_.flush();
    timing_.flush();
    o.messages.clear();
    done_.push_back(std::move(o));
  }

  std::ofstream lanes_;
  std::ofstream timing_;
  std::ofstream metrics_;
  std::ostream& log_;
  std::mutex mu_;
  std::map<std::int64_t, FrameOutcome> pending_;
  std::int64_t next_ = 0;
  std::vector<FrameOutcome> done_;
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json summarize(const std::vector<FrameOutcome>& done) {
  std::vector<double> acc, tp, mae, a1, a2, b, f, prec, rec, fpr, opt;
  std::vector<double> a2_pred, a2_true;
  std::size_t recovered = 0;
  std::size_t evaluated = 0;
  for (const auto& o : done) {
    opt.push_back(o.optimization_ms);
    if (!o.metrics || !o.truth) continue;
    const json& m = *o.metrics;
    ++evaluated;
    acc.push_back(m["point_accuracy"].get<double>());
    tp.push_back(m["tpr"].get<double>());
    if (!m["offset_mae"].is_null()) mae.push_back(m["offset_mae"].get<double>());
    a1.push_back(m["a1_error"].get<double>());
    a2.push_back(m["a2_error"].get<double>());
    b.push_back(m["b_error"].get<double>());
    f.push_back(m["ego_f"].get<double>());
    prec.push_back(m["ego_precision"].get<double>());
    rec.push_back(m["ego_recall"].get<double>());
    fpr.push_back(m["ego_fpr"].get<double>());
    if (m["offsets_recovered"].get<bool>()) ++recovered;
    a2_pred.push_back(o.lanes.shared.a2);
    a2_true.push_back(o.truth->shared.a2);
  }
  return json{{"frames", done.size()},
              {"evaluated", evaluated},
              {"point_accuracy", mean(acc)},
              {"tpr", mean(tp)},
              {"offset_mae", mean(mae)},
              {"offsets_recovered_fraction",
               evaluated ? static_cast<double>(recovered) / static_cast<double>(evaluated) : 0.0},
              {"a1_mae", mean(a1)},
              {"a2_mae", mean(a2)},
              {"b_mae", mean(b)},
              {"a2_rmse", curvature_series_rmse(a2_pred, a2_true)},
              {"ego_f", mean(f)},
              {"ego_precision", mean(prec)},
              {"ego_recall", mean(rec)},
              {"ego_fpr", mean(fpr)},
              {"median_optimization_ms", median(opt)}};
}

std::vector<fs::path> list_masks(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".pgm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (input.empty()) throw ConfigError("no input given");
  if (out.empty()) throw ConfigError("no output directory given");
  if (!fs::exists(input)) throw ConfigError("input does not exist: " + input.string());
  const bool dir = fs::is_directory(input);
  if (mode == InputMode::kMaskDir && !dir) {
    throw ConfigError("mask input must be a directory: " + input.string());
  }
  if (mode == InputMode::kSceneSpec && dir) {
    throw ConfigError("scene spec input must be a file: " + input.string());
  }
  const bool masks = mode == InputMode::kMaskDir || (mode == InputMode::kAuto && dir);
  if (masks && !camera) throw ConfigError("mask input needs a camera file");
  if (expected_lanes && *expected_lanes < 1) throw ConfigError("expected lanes must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (fs::exists(out) && !fs::is_directory(out)) {
    throw ConfigError("output path is not a directory: " + out.string());
  }
}

std::vector<SceneSpec> scenes_from_json(const json& j, const CameraModel& camera,
                                        std::optional<std::uint64_t> seed) {
  check_keys(j, "scene spec",
             {"mode", "seed", "camera", "scene", "frames", "motion", "count", "random",
              "degradation"});
  std::string mode = "single";
  read(j, "mode", mode);
  std::uint64_t base_seed = 1;
  read(j, "seed", base_seed);
  if (seed) base_seed = *seed;
  std::vector<SceneSpec> out;
  if (mode == "single" || mode == "clip") {
    if (!j.contains("scene")) throw ConfigError("mode '" + mode + "' needs a 'scene'");
    const SceneSpec base = scene_from_json(j["scene"], camera, base_seed);
    if (mode == "single") {
      out.push_back(base);
      return out;
    }
    int frames = 1;
    read(j, "frames", frames);
    if (frames < 1) throw ConfigError("frames must be >= 1");
    const ClipMotion motion = j.contains("motion") ? motion_from_json(j["motion"]) : ClipMotion{};
    return generate_clip(base, frames, motion, base_seed);
  }
  if (mode == "random") {
    int count = 1;
    read(j, "count", count);
    if (count < 1) throw ConfigError("count must be >= 1");
    const RandomSceneConfig rc =
        j.contains("random") ? random_config_from_json(j["random"]) : RandomSceneConfig{};
    std::optional<DegradationSpec> deg;
    if (j.contains("degradation")) deg = degradation_from_json(j["degradation"]);
    for (int i = 0; i < count; ++i) {
      SceneSpec s = random_scene(rc, mix_seed(base_seed, static_cast<std::uint64_t>(i)), camera);
      if (deg) apply_degradation(s, *deg);
      out.push_back(std::move(s));
    }
    return out;
  }
  throw ConfigError("unknown scene mode '" + mode + "'");
}

std::vector<SceneSpec> load_scenes(const fs::path& path, std::optional<CameraModel> camera,
                                   std::optional<std::uint64_t> seed) {
  const json j = read_json_file(path);
  try {
    if (!camera) camera = j.contains("camera") ? camera_from_json(j["camera"]) : default_camera();
    return scenes_from_json(j, *camera, seed);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const GenerationError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunSummary run_pipeline(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  Context ctx{cfg,
              cfg.settings ? *cfg.settings
                           : (cfg.config ? load_settings(*cfg.config) : PipelineSettings{}),
              cfg.classes ? ClassMap::load(*cfg.classes) : ClassMap::scenegen_default(),
              std::nullopt};
  auto& inf = ctx.settings.inference;
  inf.slope_compensation = cfg.slope_compensation;
  inf.sequential = cfg.sequential;
  if (cfg.expected_lanes) inf.peaks.expected_lanes = *cfg.expected_lanes;
  if (cfg.seed) inf.optimizer.restart_seed = mix_seed(*cfg.seed, 0x0b7);
  inf.validate();
  if (cfg.camera) ctx.camera = load_camera(*cfg.camera);

  std::vector<FrameTask> tasks;
  bool sequential = cfg.sequential;
  const bool masks = cfg.mode == InputMode::kMaskDir ||
                     (cfg.mode == InputMode::kAuto && fs::is_directory(cfg.input));
  if (masks) {
    const auto files = list_masks(cfg.input);
    for (std::size_t i = 0; i < files.size(); ++i) {
      tasks.push_back({static_cast<std::int64_t>(i), std::nullopt, files[i]});
    }
    if (files.empty()) log << "warning: no mask images in " << cfg.input.string() << "\n";
  } else {
    // Random scenes are unrelated to each other; nothing to track.
    const json spec = read_json_file(cfg.input);
    if (spec.is_object() && spec.value("mode", std::string()) == "random") sequential = false;
    auto scenes = load_scenes(cfg.input, ctx.camera, cfg.seed);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      tasks.push_back({static_cast<std::int64_t>(i), std::move(scenes[i]), {}});
    }
  }

  inf.sequential = sequential;

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (cfg.overlay) fs::create_directories(cfg.out / "overlays", ec);
  if (cfg.save_masks && !masks) fs::create_directories(cfg.out / "masks", ec);
  if (ec) throw IoError("cannot create " + cfg.out.string() + ": " + ec.message());

  bool any_truth = !masks;
  if (masks) {
    any_truth = std::any_of(tasks.begin(), tasks.end(), [](const FrameTask& t) {
      fs::path p = t.mask_path;
      return fs::exists(p.replace_extension(".truth.json"));
    });
  }
  OrderedWriter writer(cfg.out, log, any_truth);

  if (sequential) {
    TrackerState tracker;
    for (const auto& t : tasks) writer.submit(process_frame(t, ctx, tracker));
  } else {
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int workers = std::clamp(cfg.threads > 0 ? cfg.threads : hw, 1,
                                   static_cast<int>(std::max<std::size_t>(1, tasks.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        TrackerState tracker;
        writer.submit(process_frame(tasks[i], ctx, tracker));
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
  }

  RunSummary summary;
  summary.frames = writer.done().size();
  for (const auto& o : writer.done()) {
    if (o.error) {
      ++summary.errors;
    } else if (!o.success) {
      ++summary.failures;
    }
  }
  if (any_truth) {
    json block = summarize(writer.done());
    block["failures"] = summary.failures;
    block["errors"] = summary.errors;
    writer.metrics_stream() << json{{"summary", block}}.dump() << "\n";
    summary.metrics = std::move(block);
  }
  log << "processed " << summary.frames << " frames, " << summary.failures << " without lanes, "
      << summary.errors << " errors\n";
  return summary;
}

}  // namespace lanefit
