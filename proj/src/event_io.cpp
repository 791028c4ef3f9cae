#include "antiuav/event_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "antiuav/error.hpp"

namespace antiuav {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Calls fn(line_no, fields) for every non-empty, non-header line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto fields = split_fields(line);
    if (first) {
      first = false;
      std::uint64_t probe = 0;
      if (!parse_number(fields.front(), probe)) continue;  // header
    }
    fn(line_no, fields);
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
}

}  // namespace

std::vector<Event> parse_events(std::string_view text, const SensorGeometry& geometry) {
  std::vector<Event> events;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    Event e;
    int p = 0;
    if (f.size() != 4 || !parse_number(f[0], e.t) || !parse_number(f[1], e.x) ||
        !parse_number(f[2], e.y) || !parse_number(f[3], p) || (p != 0 && p != 1 && p != -1)) {
      throw Error(ErrorCode::MalformedLine, "expected t,x,y,p", line_no);
    }
    e.polarity = p == 1;
    if (!geometry.contains(e.x, e.y)) throw Error(ErrorCode::OutOfBounds, "", line_no);
    if (!events.empty() && e.t < events.back().t) throw Error(ErrorCode::NonMonotonicTime, "", line_no);
    events.push_back(e);
  });
  return events;
}

std::vector<Event> read_events_file(const std::string& path, const SensorGeometry& geometry) {
  return parse_events(slurp(path), geometry);
}

std::string serialize_events(std::span<const Event> events, bool with_header) {
  std::string out;
  out.reserve(events.size() * 20);
  if (with_header) out += "t,x,y,p\n";
  for (const auto& e : events) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += e.polarity ? ",1\n" : ",0\n";
  }
  return out;
}

void write_events_file(const std::string& path, std::span<const Event> events) {
  dump(path, serialize_events(events));
}

std::vector<GroundTruthBox> parse_ground_truth(std::string_view text, const SensorGeometry& geometry) {
  std::vector<GroundTruthBox> boxes;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    GroundTruthBox g;
    if (f.size() != 7 || !parse_number(f[0], g.t) || !parse_number(f[1], g.object_id) ||
        !parse_number(f[2], g.bbox.x_min) || !parse_number(f[3], g.bbox.y_min) ||
        !parse_number(f[4], g.bbox.x_max) || !parse_number(f[5], g.bbox.y_max)) {
      throw Error(ErrorCode::MalformedLine, "expected t,object_id,x_min,y_min,x_max,y_max,label", line_no);
    }
    g.label = std::string(f[6]);
    if (!geometry.contains(g.bbox)) throw Error(ErrorCode::OutOfBounds, "", line_no);
    boxes.push_back(std::move(g));
  });
  return boxes;
}

std::vector<GroundTruthBox> read_ground_truth_file(const std::string& path,
                                                   const SensorGeometry& geometry) {
  return parse_ground_truth(slurp(path), geometry);
}

std::string serialize_ground_truth(std::span<const GroundTruthBox> boxes, bool with_header) {
  std::ostringstream out;
  if (with_header) out << "t,object_id,x_min,y_min,x_max,y_max,label\n";
  for (const auto& g : boxes) {
    out << g.t << ',' << g.object_id << ',' << g.bbox.x_min << ',' << g.bbox.y_min << ','
        << g.bbox.x_max << ',' << g.bbox.y_max << ',' << g.label << '\n';
  }
  return out.str();
}

void write_ground_truth_file(const std::string& path, std::span<const GroundTruthBox> boxes) {
  dump(path, serialize_ground_truth(boxes));
}

Box LinearMotion::box_at(Timestamp t) const {
  const double seconds = (static_cast<double>(t) - static_cast<double>(t0)) /
                         static_cast<double>(kMicrosPerSecond);
  const int x = static_cast<int>(std::lround(start_x + velocity_x * seconds));
  const int y = static_cast<int>(std::lround(start_y + velocity_y * seconds));
  return {x, y, x + size - 1, y + size - 1};
}

SyntheticScene generate_linear_motion(const MotionSpec& spec) {
  const auto& geo = spec.geometry;
  if (!geo.valid() || spec.object_size < 1 || spec.duration_s < 0.0 || spec.event_rate < 0.0 ||
      spec.noise_fraction < 0.0 || spec.noise_fraction >= 1.0 || spec.frame_interval_us == 0) {
    throw Error(ErrorCode::InvalidConfig, "invalid motion spec");
  }
  const double angle = spec.direction_deg * std::numbers::pi / 180.0;
  LinearMotion motion;
  motion.object_id = spec.object_id;
  motion.size = spec.object_size;
  motion.velocity_x = spec.speed * std::cos(angle);
  motion.velocity_y = spec.speed * std::sin(angle);
  // Snap tiny trig residue so axis-aligned motion is exactly axis-aligned.
  if (std::abs(motion.velocity_x) < 1e-9) motion.velocity_x = 0.0;
  if (std::abs(motion.velocity_y) < 1e-9) motion.velocity_y = 0.0;
  motion.start_x = spec.start_x.value_or(0.5 * (geo.width - spec.object_size) -
                                         0.5 * motion.velocity_x * spec.duration_s);
  motion.start_y = spec.start_y.value_or(0.5 * (geo.height - spec.object_size) -
                                         0.5 * motion.velocity_y * spec.duration_s);

  const auto duration_us = static_cast<Timestamp>(std::llround(spec.duration_s * 1e6));
  if (!geo.contains(motion.box_at(0)) || !geo.contains(motion.box_at(duration_us))) {
    throw Error(ErrorCode::ObjectLeavesFrame, "trajectory exits the sensor geometry");
  }

  SyntheticScene scene;
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> offset(0, spec.object_size - 1);
  std::bernoulli_distribution coin(0.5);

  const double area = static_cast<double>(spec.object_size) * spec.object_size;
  const double rate_per_us = spec.event_rate * area / static_cast<double>(spec.frame_interval_us);
  if (rate_per_us > 0.0) {
    std::exponential_distribution<double> gap(rate_per_us);
    for (double t = gap(rng); t < static_cast<double>(duration_us); t += gap(rng)) {
      const auto ts = static_cast<Timestamp>(t);
      const Box b = motion.box_at(ts);
      scene.events.push_back({ts + spec.t_offset, b.x_min + offset(rng), b.y_min + offset(rng), coin(rng)});
    }
  }

  const auto object_events = scene.events.size();
  const auto noise_count = static_cast<std::size_t>(std::llround(
      static_cast<double>(object_events) * spec.noise_fraction / (1.0 - spec.noise_fraction)));
  if (noise_count > 0 && duration_us > 0) {
    std::uniform_int_distribution<Timestamp> when(0, duration_us - 1);
    std::uniform_int_distribution<int> col(0, geo.width - 1);
    std::uniform_int_distribution<int> row(0, geo.height - 1);
    for (std::size_t i = 0; i < noise_count; ++i) {
      const Timestamp ts = when(rng);
      scene.events.push_back({ts + spec.t_offset, col(rng), row(rng), coin(rng)});
    }
  }
  std::stable_sort(scene.events.begin(), scene.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });

  for (Timestamp t = 0; t <= duration_us; t += spec.frame_interval_us) {
    scene.truth.push_back({t + spec.t_offset, spec.object_id, motion.box_at(t), spec.label});
  }
  motion.t0 = spec.t_offset;
  scene.motions.push_back(motion);
  return scene;
}

SyntheticScene merge_scenes(std::span<const SyntheticScene> scenes) {
  SyntheticScene merged;
  for (const auto& s : scenes) {
    merged.events.insert(merged.events.end(), s.events.begin(), s.events.end());
    merged.truth.insert(merged.truth.end(), s.truth.begin(), s.truth.end());
    merged.motions.insert(merged.motions.end(), s.motions.begin(), s.motions.end());
  }
  std::stable_sort(merged.events.begin(), merged.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  std::stable_sort(merged.truth.begin(), merged.truth.end(), [](const auto& a, const auto& b) {
    return a.t != b.t ? a.t < b.t : a.object_id < b.object_id;
  });
  return merged;
}

}  // namespace antiuav
