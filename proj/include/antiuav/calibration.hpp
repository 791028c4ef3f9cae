#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "antiuav/event_io.hpp"
#include "antiuav/fotu.hpp"
#include "antiuav/rpu.hpp"

namespace antiuav {

// Scenes for TH gain calibration: every (area, speed, seed) combination is one
// single-object linear-motion stream. Areas are in pixels; the object side is
// round(sqrt(area)).
struct SweepSpec {
  std::vector<double> areas{9, 25, 100};
  std::vector<double> speeds{5, 50, 200};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double duration_s = 1.0;
  double event_rate = 1.0;
  double noise_fraction = 0.05;
  std::vector<double> gain_size_grid{0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4};
  std::vector<double> gain_speed_grid{0, 0.025, 0.05, 0.075, 0.1, 0.15, 0.2};
  RpuConfig rpu;
  SensorGeometry geometry;
  Timestamp frame_interval = 10'000;

  // Throws InvalidConfig.
  void validate() const;
};

// INI text with a [sweep] section (areas, speeds, seeds, duration_s,
// event_rate, noise_fraction, gain_size, gain_speed) and optional [rpu].
SweepSpec parse_sweep_spec(const std::string& text);
SweepSpec load_sweep_spec(const std::string& path);

std::vector<SyntheticScene> generate_sweep_scenes(const SweepSpec& spec);

// Mean over scenes of the per-scene mean IoU of event-mode commit rows.
double sweep_mean_iou(const std::vector<SyntheticScene>& scenes, const SweepSpec& spec, double gain_size,
                      double gain_speed);

struct GridPoint {
  double gain_size = 0.0;
  double gain_speed = 0.0;
  double mean_iou = 0.0;
};

struct CalibrationResult {
  double gain_size = 0.0;
  double gain_speed = 0.0;
  double mean_iou = 0.0;
  double baseline_mean_iou = 0.0;  // gains (0, 0): constant TH = th_min
  std::vector<GridPoint> grid;
};

// Exhaustive grid search seeded with (0, 0); ties keep the earlier point.
CalibrationResult calibrate_th_gains(const SweepSpec& spec);

}  // namespace antiuav
