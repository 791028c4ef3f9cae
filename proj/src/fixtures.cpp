#include "antiuav/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace antiuav::fixtures {

namespace {

constexpr int kCanvas = 64;
constexpr double kDeg = std::numbers::pi / 180.0;

struct Segment {
  double x0, y0, x1, y1;
};

struct Disk {
  double x, y, r;
};

struct Silhouette {
  std::vector<Segment> strokes;
  std::vector<Disk> disks;
  double thickness = 1.5;

  bool covers(double px, double py) const {
    for (const auto& d : disks) {
      if (std::hypot(px - d.x, py - d.y) <= d.r) return true;
    }
    for (const auto& s : strokes) {
      const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
      const double len2 = vx * vx + vy * vy;
      double t = len2 > 0 ? ((px - s.x0) * vx + (py - s.y0) * vy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      if (std::hypot(px - (s.x0 + t * vx), py - (s.y0 + t * vy)) <= 0.5 * thickness) return true;
    }
    return false;
  }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Shape in object coordinates (origin at its centre), rotated by `angle`.
Silhouette make_silhouette(ObjectClass cls, double span, double angle, std::mt19937_64& rng) {
  Silhouette s;
  s.thickness = std::max(1.5, span / 9.0);
  const double c = std::cos(angle), sn = std::sin(angle);
  auto rot = [&](double x, double y) { return std::pair{c * x - sn * y, sn * x + c * y}; };
  auto stroke = [&](double ax, double ay, double bx, double by) {
    auto [x0, y0] = rot(ax, ay);
    auto [x1, y1] = rot(bx, by);
    s.strokes.push_back({x0, y0, x1, y1});
  };
  const double h = 0.5 * span;
  if (cls == ObjectClass::Uav) {
    // Quadrotor: X frame, four rotor disks, hub.
    const double arm = h * 0.72;
    const double rotor = span * uniform(rng, 0.15, 0.2);
    for (int k = 0; k < 4; ++k) {
      const double a = (45.0 + 90.0 * k) * kDeg;
      stroke(0, 0, arm * std::cos(a), arm * std::sin(a));
      auto [rx, ry] = rot(arm * std::cos(a), arm * std::sin(a));
      s.disks.push_back({rx, ry, rotor});
    }
    s.disks.push_back({0, 0, span * 0.1});
  } else {
    // Gliding bird: gull-wing M with a slim body.
    const double lift = uniform(rng, -0.45, 0.1) * h;
    const double elbow = uniform(rng, 0.3, 0.5) * h;
    stroke(0, 0, -0.45 * h, -elbow);
    stroke(-0.45 * h, -elbow, -h, lift);
    stroke(0, 0, 0.45 * h, -elbow);
    stroke(0.45 * h, -elbow, h, lift);
    stroke(0, -0.15 * h, 0, 0.35 * h);
  }
  return s;
}

}  // namespace

RenderedScene render_object_scene(ObjectClass cls, std::mt19937_64& rng, double blur_px) {
  const double sky = uniform(rng, 150.0, 230.0);
  const double ink = uniform(rng, 20.0, 90.0);
  const double span = uniform(rng, 12.0, 20.0);
  const double angle = uniform(rng, -25.0, 25.0) * kDeg;
  const double blur_dir = uniform(rng, 0.0, 360.0) * kDeg;
  const auto shape = make_silhouette(cls, span, angle, rng);

  const double bx = blur_px * std::cos(blur_dir);
  const double by = blur_px * std::sin(blur_dir);
  // Centre so the smeared object stays in the canvas.
  const double cx = 0.5 * kCanvas - 0.5 * bx + uniform(rng, -2.0, 2.0);
  const double cy = 0.5 * kCanvas - 0.5 * by + uniform(rng, -2.0, 2.0);

  const int taps = std::max(1, static_cast<int>(std::ceil(blur_px)) + 1);
  std::vector<double> coverage(kCanvas * kCanvas, 0.0);
  Box bbox{kCanvas, kCanvas, -1, -1};
  for (int y = 0; y < kCanvas; ++y) {
    for (int x = 0; x < kCanvas; ++x) {
      int hits = 0;
      for (int k = 0; k < taps; ++k) {
        const double f = taps == 1 ? 0.0 : static_cast<double>(k) / (taps - 1);
        if (shape.covers(x + 0.5 - cx - f * bx, y + 0.5 - cy - f * by)) ++hits;
      }
      if (hits > 0) {
        coverage[static_cast<std::size_t>(y * kCanvas + x)] = static_cast<double>(hits) / taps;
        bbox.include(x, y);
      }
    }
  }

  std::normal_distribution<double> noise(0.0, 4.0);
  GrayFrame frame{{kCanvas, kCanvas}, 0, std::vector<std::uint8_t>(kCanvas * kCanvas)};
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    const double v = sky + (ink - sky) * coverage[i] + noise(rng);
    frame.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  if (!bbox.valid()) bbox = {kCanvas / 2, kCanvas / 2, kCanvas / 2, kCanvas / 2};
  return {std::move(frame), bbox};
}

ClassifierInput make_patch_sample(ObjectClass cls, std::mt19937_64& rng, double blur_px) {
  const auto scene = render_object_scene(cls, rng, blur_px);
  return extract_patch(scene.frame, scene.bbox);
}

Trajectory make_trajectory_sample(ObjectClass cls, std::mt19937_64& rng) {
  Trajectory traj;
  const int n = std::uniform_int_distribution<int>(6, 14)(rng);
  double heading = uniform(rng, 0.0, 360.0) * kDeg;
  double x = 0.0, y = 0.0;
  std::normal_distribution<double> jitter(0.0, 0.3);
  std::normal_distribution<double> drift(0.0, 4.0 * kDeg);
  std::bernoulli_distribution flip(0.5);
  Timestamp t = 0;
  for (int i = 0; i < n; ++i) {
    traj.points.push_back({t, x + jitter(rng), y + jitter(rng)});
    if (cls == ObjectClass::Uav) {
      heading += drift(rng);
    } else {
      const double turn = uniform(rng, 50.0, 140.0) * kDeg;
      heading += flip(rng) ? turn : -turn;
    }
    const double step = uniform(rng, 5.5, 9.0);
    x += step * std::cos(heading);
    y += step * std::sin(heading);
    t += static_cast<Timestamp>(std::llround(uniform(rng, 20'000.0, 80'000.0)));
  }
  return traj;
}

std::vector<LabeledInput> make_dataset(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledInput> data;
  data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto cls = (i % 2 == 0) ? ObjectClass::Uav : ObjectClass::NonUav;
    const bool patch = (i / 2) % 2 == 0;
    LabeledInput item;
    item.label = static_cast<int>(cls);
    if (patch) {
      item.input = make_patch_sample(cls, rng, uniform(rng, 0.0, 3.0));
    } else {
      item.input = rasterize_trajectory(make_trajectory_sample(cls, rng));
    }
    data.push_back(std::move(item));
  }
  return data;
}

std::vector<FastObjectFixture> make_fast_object_fixtures(std::size_t count, double speed, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FastObjectFixture> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto cls = (i % 2 == 0) ? ObjectClass::Uav : ObjectClass::NonUav;
    FastObjectFixture f;
    f.label = static_cast<int>(cls);
    f.speed = speed;
    f.blurred_patch = make_patch_sample(cls, rng, speed * kExposureSeconds);
    f.trajectory = rasterize_trajectory(make_trajectory_sample(cls, rng));
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace antiuav::fixtures
