#include <CLI11.hpp>

#include <iostream>

#include "lanefit/errors.hpp"
#include "lanefit/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-lane parameter inference from semantic label maps"};
  lanefit::RunConfig cfg;
  std::string camera;
  std::string classes;
  std::string config;
  int expected = 0;
  std::uint64_t seed = 0;
  bool no_slope = false;
  bool no_seq = false;

  app.add_option("--input", cfg.input, "Directory of label maps or a scene spec file")
      ->required();
  app.add_option("--camera", camera, "Camera file");
  app.add_option("--classes", classes, "Class map file");
  app.add_option("--config", config, "Inference config file");
  app.add_option("--out", cfg.out, "Output directory")->required();
  app.add_flag("--no-slope", no_slope, "Disable slope compensation");
  app.add_flag("--no-seq", no_seq, "Initialise every frame by scan; frames run in parallel");
  auto* expected_opt =
      app.add_option("--expected-lanes", expected, "Keep the N most prominent peaks")
          ->check(CLI::PositiveNumber);
  app.add_flag("--overlay", cfg.overlay, "Write lane overlays");
  app.add_flag("--panels", cfg.panels, "Also write residual and histogram panels");
  app.add_flag("--save-masks", cfg.save_masks, "Write generated masks and truth records");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for generated scenes");
  app.add_option("--threads", cfg.threads, "Frame workers with --no-seq (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  if (!camera.empty()) cfg.camera = camera;
  if (!classes.empty()) cfg.classes = classes;
  if (!config.empty()) cfg.config = config;
  if (*expected_opt) cfg.expected_lanes = expected;
  if (*seed_opt) cfg.seed = seed;
  cfg.slope_compensation = !no_slope;
  cfg.sequential = !no_seq;
  if (cfg.panels) cfg.overlay = true;

  try {
    lanefit::run_pipeline(cfg, std::cerr);
  } catch (const lanefit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lanefit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
