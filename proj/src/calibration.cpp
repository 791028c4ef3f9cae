#include "antiuav/calibration.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "antiuav/config.hpp"
#include "antiuav/error.hpp"
#include "antiuav/metrics.hpp"
#include "antiuav/tracker.hpp"

namespace antiuav {

void SweepSpec::validate() const {
  if (areas.empty() || speeds.empty() || seeds.empty()) {
    throw Error(ErrorCode::InvalidConfig, "sweep needs at least one area, speed and seed");
  }
  if (gain_size_grid.empty() || gain_speed_grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty gain grid");
  for (auto a : areas) {
    if (a < 1.0) throw Error(ErrorCode::InvalidConfig, "sweep areas must be >= 1");
  }
  for (auto g : gain_size_grid) {
    if (g < 0.0) throw Error(ErrorCode::InvalidConfig, "gains must be >= 0");
  }
  for (auto g : gain_speed_grid) {
    if (g < 0.0) throw Error(ErrorCode::InvalidConfig, "gains must be >= 0");
  }
  if (duration_s <= 0.0) throw Error(ErrorCode::InvalidConfig, "sweep duration must be positive");
  rpu.validate();
}

SweepSpec parse_sweep_spec(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidConfig, e.message(), e.line());
  }
  SweepSpec s;
  auto list = [&](const char* key, std::vector<double>& out) {
    if (auto v = tree.get_optional<std::string>(key)) out = parse_number_list(*v);
  };
  list("sweep.areas", s.areas);
  list("sweep.speeds", s.speeds);
  list("sweep.gain_size", s.gain_size_grid);
  list("sweep.gain_speed", s.gain_speed_grid);
  if (auto v = tree.get_optional<std::string>("sweep.seeds")) {
    s.seeds.clear();
    for (double d : parse_number_list(*v)) {
      if (d < 0 || d != std::floor(d)) throw Error(ErrorCode::InvalidConfig, "sweep seeds must be non-negative integers");
      s.seeds.push_back(static_cast<std::uint64_t>(d));
    }
  }
  try {
    s.duration_s = tree.get("sweep.duration_s", s.duration_s);
    s.event_rate = tree.get("sweep.event_rate", s.event_rate);
    s.noise_fraction = tree.get("sweep.noise_fraction", s.noise_fraction);
    s.rpu.th_min = tree.get("rpu.th_min", s.rpu.th_min);
    s.rpu.th_max = tree.get("rpu.th_max", s.rpu.th_max);
    s.rpu.margin = tree.get("rpu.margin", s.rpu.margin);
  } catch (const pt::ptree_bad_data& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  s.validate();
  return s;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open sweep spec '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_sweep_spec(text.str());
}

std::vector<SyntheticScene> generate_sweep_scenes(const SweepSpec& spec) {
  spec.validate();
  std::vector<SyntheticScene> scenes;
  for (auto area : spec.areas) {
    for (auto speed : spec.speeds) {
      for (auto seed : spec.seeds) {
        std::mt19937_64 rng(seed * 1'000'003ULL + static_cast<std::uint64_t>(area) * 7919ULL +
                            static_cast<std::uint64_t>(speed));
        std::uniform_real_distribution<double> tilt(-35.0, 35.0);
        MotionSpec m;
        m.geometry = spec.geometry;
        m.object_size = std::max(1, static_cast<int>(std::lround(std::sqrt(area))));
        m.speed = speed;
        m.direction_deg = tilt(rng) + (rng() % 2 ? 180.0 : 0.0);
        m.duration_s = spec.duration_s;
        m.event_rate = spec.event_rate;
        m.noise_fraction = spec.noise_fraction;
        m.frame_interval_us = spec.frame_interval;
        m.seed = rng();
        scenes.push_back(generate_linear_motion(m));
      }
    }
  }
  return scenes;
}

double sweep_mean_iou(const std::vector<SyntheticScene>& scenes, const SweepSpec& spec, double gain_size,
                      double gain_speed) {
  FotuConfig fotu;
  fotu.th_gain_size = gain_size;
  fotu.th_gain_speed = gain_speed;
  double sum = 0.0;
  std::vector<TrackUpdate> updates;
  for (const auto& scene : scenes) {
    HybridTracker tracker(spec.geometry, spec.frame_interval, spec.rpu, fotu);
    for (const auto& e : scene.events) {
      updates.clear();
      tracker.process(e, updates);
    }
    tracker.finish(updates);
    std::vector<TrackResultRow> rows;
    for (const auto& r : tracker.state().results) {
      if (r.mode == TrackMode::Event) rows.push_back(r);
    }
    sum += evaluate_tracking(rows, scene.truth, 0.5).mean_iou;
  }
  return scenes.empty() ? 0.0 : sum / static_cast<double>(scenes.size());
}

CalibrationResult calibrate_th_gains(const SweepSpec& spec) {
  const auto scenes = generate_sweep_scenes(spec);
  CalibrationResult result;
  result.baseline_mean_iou = sweep_mean_iou(scenes, spec, 0.0, 0.0);
  // (0, 0) is always a candidate, so the result never falls below the baseline.
  result.mean_iou = result.baseline_mean_iou;
  for (auto gs : spec.gain_size_grid) {
    for (auto gv : spec.gain_speed_grid) {
      const double iou = (gs == 0.0 && gv == 0.0) ? result.baseline_mean_iou : sweep_mean_iou(scenes, spec, gs, gv);
      result.grid.push_back({gs, gv, iou});
      if (iou > result.mean_iou) {
        result.gain_size = gs;
        result.gain_speed = gv;
        result.mean_iou = iou;
      }
    }
  }
  return result;
}

}  // namespace antiuav
