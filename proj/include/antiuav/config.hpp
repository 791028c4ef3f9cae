#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "antiuav/event_io.hpp"
#include "antiuav/fotu.hpp"
#include "antiuav/rpu.hpp"

namespace antiuav {

// Objects for a generated input stream. Object i uses sizes[i % n] and
// speeds[i % n] and moves in its own horizontal band.
struct SyntheticConfig {
  std::size_t objects = 0;  // 0: no generated input
  std::vector<double> speeds{50.0};
  std::vector<int> sizes{5};  // side lengths in pixels
  double duration_s = 1.0;
  double event_rate = 1.0;
  double noise_fraction = 0.05;
  std::uint64_t seed = 1;
};

struct PipelineConfig {
  SensorGeometry geometry;
  Timestamp frame_interval = 10'000;
  RpuConfig rpu;
  FotuConfig fotu;
  bool gating = true;
  double iou_threshold = 0.65;
  std::size_t min_trajectory_points = 3;

  std::string events_path;
  std::string ground_truth_path;
  std::string gray_frames_dir;  // `<t_us>.pgm` files
  std::string model_path;
  std::string trajectory_model_path;  // empty: model_path serves both input kinds
  std::string output_dir = "out";

  SyntheticConfig synthetic;

  // Throws InvalidConfig. require_input: events_path or synthetic objects set.
  void validate(bool require_input = true) const;
};

// INI text: [input] [output] [sensor] [rpu] [fotu] [pipeline] [synthetic].
// Relative paths are resolved against base_dir. Throws InvalidConfig.
PipelineConfig parse_pipeline_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::string& path);

// Writes the effective configuration back in the same format.
std::string format_pipeline_config(const PipelineConfig& config);

// Comma-separated numbers, e.g. "5, 20, 50".
std::vector<double> parse_number_list(const std::string& text);

}  // namespace antiuav
