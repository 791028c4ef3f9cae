#include "antiuav/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "antiuav/error.hpp"

namespace antiuav {

namespace pt = boost::property_tree;

namespace {

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    if (!tree.get_child_optional(key)) return fallback;
    return tree.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    throw Error(ErrorCode::InvalidConfig, "bad value for '" + key + "'");
  }
}

bool get_switch(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "on" || *v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "off" || *v == "false" || *v == "0" || *v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be on or off");
}

std::string get_path(const pt::ptree& tree, const std::string& key, const std::filesystem::path& base) {
  const auto v = tree.get<std::string>(key, "");
  if (v.empty()) return v;
  const std::filesystem::path p(v);
  return (p.is_absolute() || base.empty() ? p : base / p).lexically_normal().string();
}

std::string join(const auto& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream is(item);
    double v;
    std::string rest;
    if (!(is >> v) || (is >> rest)) throw Error(ErrorCode::InvalidConfig, "bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void PipelineConfig::validate(bool require_input) const {
  if (!geometry.valid()) throw Error(ErrorCode::InvalidConfig, "sensor size must be positive");
  if (frame_interval == 0) throw Error(ErrorCode::InvalidConfig, "sensor.frame_interval_us must be positive");
  rpu.validate();
  fotu.validate();
  if (iou_threshold < 0.0 || iou_threshold > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "pipeline.iou_threshold must lie in [0, 1]");
  }
  if (min_trajectory_points < 2) throw Error(ErrorCode::InvalidConfig, "pipeline.min_trajectory_points must be >= 2");
  if (require_input && events_path.empty() && synthetic.objects == 0) {
    throw Error(ErrorCode::InvalidConfig, "either input.events or synthetic.objects is required");
  }
  if (synthetic.objects > 0) {
    if (synthetic.speeds.empty() || synthetic.sizes.empty()) {
      throw Error(ErrorCode::InvalidConfig, "synthetic.speeds and synthetic.sizes must not be empty");
    }
    for (auto s : synthetic.sizes) {
      if (s < 1) throw Error(ErrorCode::InvalidConfig, "synthetic.sizes must be >= 1");
    }
    for (auto v : synthetic.speeds) {
      if (v < 0.0) throw Error(ErrorCode::InvalidConfig, "synthetic.speeds must be >= 0");
    }
    if (synthetic.duration_s <= 0.0) throw Error(ErrorCode::InvalidConfig, "synthetic.duration_s must be positive");
    if (synthetic.noise_fraction < 0.0 || synthetic.noise_fraction >= 1.0) {
      throw Error(ErrorCode::InvalidConfig, "synthetic.noise_fraction must lie in [0, 1)");
    }
  }
}

PipelineConfig parse_pipeline_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidConfig, e.message(), e.line());
  }

  PipelineConfig c;
  c.events_path = get_path(tree, "input.events", base_dir);
  c.ground_truth_path = get_path(tree, "input.ground_truth", base_dir);
  c.gray_frames_dir = get_path(tree, "input.gray_frames", base_dir);
  c.model_path = get_path(tree, "input.model", base_dir);
  c.trajectory_model_path = get_path(tree, "input.trajectory_model", base_dir);
  if (tree.get_optional<std::string>("output.dir")) c.output_dir = get_path(tree, "output.dir", base_dir);

  c.geometry.width = get(tree, "sensor.width", c.geometry.width);
  c.geometry.height = get(tree, "sensor.height", c.geometry.height);
  c.frame_interval = get(tree, "sensor.frame_interval_us", c.frame_interval);

  auto& r = c.rpu;
  r.validity_min_pixels = get(tree, "rpu.validity_min_pixels", r.validity_min_pixels);
  r.margin = get(tree, "rpu.margin", r.margin);
  r.periodic_rescan = get_switch(tree, "rpu.periodic_rescan", r.periodic_rescan);
  r.rescan_period_s = get(tree, "rpu.rescan_period_s", r.rescan_period_s);
  r.max_proposals = get(tree, "rpu.max_proposals", r.max_proposals);
  r.th_min = get(tree, "rpu.th_min", r.th_min);
  r.th_max = get(tree, "rpu.th_max", r.th_max);
  r.velocity_alpha = get(tree, "rpu.velocity_alpha", r.velocity_alpha);
  r.velocity_baseline_s = get(tree, "rpu.velocity_baseline_s", r.velocity_baseline_s);
  r.retire_after_periods = get(tree, "rpu.retire_after_periods", r.retire_after_periods);

  auto& f = c.fotu;
  f.speed_route_threshold = get(tree, "fotu.speed_route_threshold", f.speed_route_threshold);
  f.trajectory_step = get(tree, "fotu.trajectory_step", f.trajectory_step);
  f.th_gain_size = get(tree, "fotu.th_gain_size", f.th_gain_size);
  f.th_gain_speed = get(tree, "fotu.th_gain_speed", f.th_gain_speed);
  f.monitors = get(tree, "fotu.monitors", f.monitors);

  c.gating = get_switch(tree, "pipeline.gating", c.gating);
  c.iou_threshold = get(tree, "pipeline.iou_threshold", c.iou_threshold);
  c.min_trajectory_points = get(tree, "pipeline.min_trajectory_points", c.min_trajectory_points);

  auto& s = c.synthetic;
  s.objects = get(tree, "synthetic.objects", s.objects);
  if (auto v = tree.get_optional<std::string>("synthetic.speeds")) s.speeds = parse_number_list(*v);
  if (auto v = tree.get_optional<std::string>("synthetic.sizes")) {
    s.sizes.clear();
    for (double d : parse_number_list(*v)) {
      if (d != std::floor(d)) throw Error(ErrorCode::InvalidConfig, "synthetic.sizes must be integers");
      s.sizes.push_back(static_cast<int>(d));
    }
  }
  s.duration_s = get(tree, "synthetic.duration_s", s.duration_s);
  s.event_rate = get(tree, "synthetic.event_rate", s.event_rate);
  s.noise_fraction = get(tree, "synthetic.noise_fraction", s.noise_fraction);
  s.seed = get(tree, "synthetic.seed", s.seed);

  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_pipeline_config(text.str(), std::filesystem::path(path).parent_path());
}

std::string format_pipeline_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "[input]\n";
  if (!c.events_path.empty()) out << "events = " << c.events_path << '\n';
  if (!c.ground_truth_path.empty()) out << "ground_truth = " << c.ground_truth_path << '\n';
  if (!c.gray_frames_dir.empty()) out << "gray_frames = " << c.gray_frames_dir << '\n';
  if (!c.model_path.empty()) out << "model = " << c.model_path << '\n';
  if (!c.trajectory_model_path.empty()) out << "trajectory_model = " << c.trajectory_model_path << '\n';
  out << "\n[output]\ndir = " << c.output_dir << '\n';
  out << "\n[sensor]\nwidth = " << c.geometry.width << "\nheight = " << c.geometry.height
      << "\nframe_interval_us = " << c.frame_interval << '\n';
  const auto& r = c.rpu;
  out << "\n[rpu]\nvalidity_min_pixels = " << r.validity_min_pixels << "\nmargin = " << r.margin
      << "\nperiodic_rescan = " << (r.periodic_rescan ? "on" : "off") << "\nrescan_period_s = " << r.rescan_period_s
      << "\nmax_proposals = " << r.max_proposals << "\nth_min = " << r.th_min << "\nth_max = " << r.th_max
      << "\nvelocity_alpha = " << r.velocity_alpha << "\nvelocity_baseline_s = " << r.velocity_baseline_s
      << "\nretire_after_periods = " << r.retire_after_periods << '\n';
  const auto& f = c.fotu;
  out << "\n[fotu]\nspeed_route_threshold = " << f.speed_route_threshold
      << "\ntrajectory_step = " << f.trajectory_step << "\nth_gain_size = " << f.th_gain_size
      << "\nth_gain_speed = " << f.th_gain_speed << "\nmonitors = " << f.monitors << '\n';
  out << "\n[pipeline]\ngating = " << (c.gating ? "on" : "off") << "\niou_threshold = " << c.iou_threshold
      << "\nmin_trajectory_points = " << c.min_trajectory_points << '\n';
  if (c.synthetic.objects > 0) {
    const auto& s = c.synthetic;
    out << "\n[synthetic]\nobjects = " << s.objects << "\nspeeds = " << join(s.speeds) << "\nsizes = " << join(s.sizes)
        << "\nduration_s = " << s.duration_s << "\nevent_rate = " << s.event_rate
        << "\nnoise_fraction = " << s.noise_fraction << "\nseed = " << s.seed << '\n';
  }
  return out.str();
}

}  // namespace antiuav
