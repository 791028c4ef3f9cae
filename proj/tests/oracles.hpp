#pragma once

// Reference implementations used only by tests. They are written for clarity,
// not speed, and share no code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "antiuav/box.hpp"
#include "antiuav/event_io.hpp"
#include "antiuav/frame_builder.hpp"
#include "antiuav/npu/model.hpp"
#include "antiuav/tracker.hpp"

namespace oracle {

using antiuav::Box;

struct Component {
  Box bbox;
  int pixels = 0;
  bool operator<(const Component& o) const {
    return std::tie(bbox.y_min, bbox.x_min, bbox.y_max, bbox.x_max, pixels) <
           std::tie(o.bbox.y_min, o.bbox.x_min, o.bbox.y_max, o.bbox.x_max, o.pixels);
  }
  bool operator==(const Component& o) const { return bbox == o.bbox && pixels == o.pixels; }
};

// Flood fill with an explicit stack, 8-connectivity.
inline std::vector<Component> flood_fill(const antiuav::BinaryEventFrame& f) {
  const int w = f.width(), h = f.height();
  std::vector<char> seen(static_cast<std::size_t>(w * h), 0);
  std::vector<Component> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!f.get(x, y) || seen[static_cast<std::size_t>(y * w + x)]) continue;
      Component c{Box::point(x, y), 0};
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen[static_cast<std::size_t>(y * w + x)] = 1;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++c.pixels;
        c.bbox.include(cx, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto& s = seen[static_cast<std::size_t>(ny * w + nx)];
            if (s || !f.get(nx, ny)) continue;
            s = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
      out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline antiuav::BinaryEventFrame denoise(const antiuav::BinaryEventFrame& f) {
  antiuav::BinaryEventFrame out(f.geometry(), f.t_start(), f.t_end());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      if (!f.get(x, y)) continue;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < f.width() && ny < f.height() && f.get(nx, ny)) ++n;
        }
      if (n > 0) out.set(x, y);
    }
  }
  return out;
}

// Direct convolution: out[oc][oy][ox] = bias + sum w * a, zero padding.
struct ConvOut {
  std::vector<std::int32_t> acc;
  std::uint64_t dense = 0;
  std::uint64_t nonzero_products = 0;
};

inline ConvOut conv(const std::vector<std::uint8_t>& act, int c, int h, int w, const std::vector<std::int8_t>& wt,
                    const std::vector<std::int32_t>& bias, int oc_n, int k, int stride, int pad) {
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  ConvOut r;
  r.acc.assign(static_cast<std::size_t>(oc_n * oh * ow), 0);
  for (int oc = 0; oc < oc_n; ++oc)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        std::int64_t s = bias[static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < c; ++ic)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int iy = oy * stride + ky - pad, ix = ox * stride + kx - pad;
              ++r.dense;
              if (iy < 0 || ix < 0 || iy >= h || ix >= w) continue;
              const int a = act[static_cast<std::size_t>((ic * h + iy) * w + ix)];
              const int wv = wt[static_cast<std::size_t>(((oc * c + ic) * k + ky) * k + kx)];
              if (a != 0 && wv != 0) ++r.nonzero_products;
              s += a * wv;
            }
        r.acc[static_cast<std::size_t>((oc * oh + oy) * ow + ox)] = static_cast<std::int32_t>(s);
      }
  return r;
}

inline std::uint8_t requant(std::int32_t acc, float scale) {
  const double v = std::round(static_cast<double>(acc) * static_cast<double>(scale));
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

// Whole-model integer forward pass; returns the final logits.
inline std::vector<std::int32_t> forward(const antiuav::npu::Model& m, const std::vector<std::uint8_t>& input) {
  std::vector<std::uint8_t> a = input;
  int c = m.in_c, h = m.in_h, w = m.in_w;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const auto& L = m.layers[li];
    if (L.type == antiuav::npu::LayerType::Conv) {
      auto r = conv(a, c, h, w, L.weights, L.bias, L.out_c, L.kernel, L.stride, L.pad);
      h = (h + 2 * L.pad - L.kernel) / L.stride + 1;
      w = (w + 2 * L.pad - L.kernel) / L.stride + 1;
      c = L.out_c;
      a.assign(r.acc.size(), 0);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = requant(r.acc[i], L.scale);
      if (L.pool > 0) {
        const int oh = (h - L.pool) / L.pool + 1, ow = (w - L.pool) / L.pool + 1;
        std::vector<std::uint8_t> p(static_cast<std::size_t>(c * oh * ow), 0);
        for (int ch = 0; ch < c; ++ch)
          for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
              std::uint8_t best = 0;
              for (int dy = 0; dy < L.pool; ++dy)
                for (int dx = 0; dx < L.pool; ++dx)
                  best = std::max(best, a[static_cast<std::size_t>((ch * h + y * L.pool + dy) * w + x * L.pool + dx)]);
              p[static_cast<std::size_t>((ch * oh + y) * ow + x)] = best;
            }
        a = std::move(p);
        h = oh;
        w = ow;
      }
    } else {
      std::vector<std::int32_t> out(static_cast<std::size_t>(L.out_c));
      for (int o = 0; o < L.out_c; ++o) {
        std::int64_t s = L.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < L.in_c; ++i)
          s += static_cast<int>(a[static_cast<std::size_t>(i)]) * L.weights[static_cast<std::size_t>(o * L.in_c + i)];
        out[static_cast<std::size_t>(o)] = static_cast<std::int32_t>(s);
      }
      if (li + 1 == m.layers.size()) return out;
      a.assign(out.size(), 0);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = requant(out[i], L.scale);
      c = L.out_c;
      h = w = 1;
    }
  }
  return {};
}

// Reference line rasterizer: parametric sampling with half-away rounding.
inline std::set<std::pair<int, int>> line_pixels(int x0, int y0, int x1, int y1) {
  std::set<std::pair<int, int>> px;
  const int n = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
  if (n == 0) {
    px.insert({x0, y0});
    return px;
  }
  // Offsets are computed as (d * i) / n so exact halves stay exact.
  for (int i = 0; i <= n; ++i) {
    const double ox = static_cast<double>((x1 - x0) * i) / n, oy = static_cast<double>((y1 - y0) * i) / n;
    px.insert({x0 + static_cast<int>(std::lround(ox)), y0 + static_cast<int>(std::lround(oy))});
  }
  return px;
}

// Second scorer: linear scans, explicit pair table. Returns (accuracy, mean IoU).
inline double iou(const Box& a, const Box& b) {
  const int ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const int iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = static_cast<double>(ix) * iy;
  const double ua = static_cast<double>(a.x_max - a.x_min + 1) * (a.y_max - a.y_min + 1);
  const double ub = static_cast<double>(b.x_max - b.x_min + 1) * (b.y_max - b.y_min + 1);
  return inter / (ua + ub - inter);
}

inline std::pair<double, double> score(const std::vector<antiuav::TrackResultRow>& rows,
                                       const std::vector<antiuav::GroundTruthBox>& truth, double threshold) {
  auto nearest = [&](int track, antiuav::Timestamp t) -> const antiuav::TrackResultRow* {
    const antiuav::TrackResultRow* best = nullptr;
    std::uint64_t best_d = 0;
    for (const auto& r : rows) {
      if (r.object_id != track) continue;
      const std::uint64_t d = r.t > t ? r.t - t : t - r.t;
      if (!best || d < best_d || (d == best_d && r.t < best->t)) {
        best = &r;
        best_d = d;
      }
    }
    return best;
  };
  std::set<int> objects, tracks;
  for (const auto& g : truth) objects.insert(g.object_id);
  for (const auto& r : rows) tracks.insert(r.object_id);
  std::vector<std::tuple<double, int, int>> pairs;
  for (int o : objects)
    for (int t : tracks) {
      double s = 0.0;
      int n = 0;
      for (const auto& g : truth)
        if (g.object_id == o) {
          s += iou(nearest(t, g.t)->bbox, g.bbox);
          ++n;
        }
      if (s > 0.0) pairs.emplace_back(-s / n, o, t);
    }
  std::sort(pairs.begin(), pairs.end());
  std::map<int, int> match;
  std::set<int> used;
  for (auto [s, o, t] : pairs) {
    if (match.count(o) || used.count(t)) continue;
    match[o] = t;
    used.insert(t);
  }
  double sum = 0.0;
  int hits = 0;
  for (const auto& g : truth) {
    double v = 0.0;
    if (match.count(g.object_id)) v = iou(nearest(match[g.object_id], g.t)->bbox, g.bbox);
    sum += v;
    if (v >= threshold) ++hits;
  }
  return {static_cast<double>(hits) / truth.size(), sum / truth.size()};
}

}  // namespace oracle
