#include "antiuav/isp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "antiuav/error.hpp"

namespace antiuav {

GrayFrame gray_frame_from_image(const GrayImage& image, Timestamp t) {
  return {{image.width, image.height}, t, image.pixels};
}

const char* to_string(InputKind kind) { return kind == InputKind::Patch ? "patch" : "trajectory"; }

std::size_t ClassifierInput::nonzero() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](auto p) { return p != 0; }));
}

GrayImage ClassifierInput::to_image() const {
  return {kClassifierSide, kClassifierSide, {pixels.begin(), pixels.end()}};
}

ClassifierInput extract_patch(const GrayFrame& frame, const Box& bbox, double pad_ratio, int object_id) {
  if (!frame.valid()) throw Error(ErrorCode::ShapeMismatch, "gray frame size does not match its geometry");
  if (!bbox.valid()) throw Error(ErrorCode::EmptyBox, "degenerate bbox");
  const int pad_x = static_cast<int>(std::lround(pad_ratio * bbox.width()));
  const int pad_y = static_cast<int>(std::lround(pad_ratio * bbox.height()));
  Box crop{std::max(0, bbox.x_min - pad_x), std::max(0, bbox.y_min - pad_y),
           std::min(frame.geometry.width - 1, bbox.x_max + pad_x),
           std::min(frame.geometry.height - 1, bbox.y_max + pad_y)};
  if (!crop.valid()) throw Error(ErrorCode::EmptyBox, "bbox lies outside the frame");

  ClassifierInput out;
  out.kind = InputKind::Patch;
  out.object_id = object_id;
  const int w = crop.width();
  const int h = crop.height();
  for (int i = 0; i < kClassifierSide; ++i) {
    const int sy = crop.y_min + i * h / kClassifierSide;
    for (int j = 0; j < kClassifierSide; ++j) {
      const int sx = crop.x_min + j * w / kClassifierSide;
      out.pixels[static_cast<std::size_t>(i * kClassifierSide + j)] = frame.at(sx, sy);
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(out.pixels.begin(), out.pixels.end());
  const int lo = *lo_it;
  const int range = *hi_it - lo;
  for (auto& p : out.pixels) {
    p = range == 0 ? 0 : static_cast<std::uint8_t>(((p - lo) * 255 + range / 2) / range);
  }
  return out;
}

GrayImage rasterize_points(std::span<const TrajectoryPoint> points, int out_size) {
  if (points.size() < 2) throw Error(ErrorCode::TooFewPoints, "need at least 2 trajectory points");
  if (out_size < 2) throw Error(ErrorCode::InvalidConfig, "raster must be at least 2x2");

  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.cx);
    max_x = std::max(max_x, p.cx);
    min_y = std::min(min_y, p.cy);
    max_y = std::max(max_y, p.cy);
  }
  const double span = static_cast<double>(out_size - 1);
  const double w = max_x - min_x;
  const double h = max_y - min_y;
  const double side = std::max(w, h);
  const double scale = side > 0.0 ? span / side : 0.0;
  const double off_x = 0.5 * (span - w * scale);
  const double off_y = 0.5 * (span - h * scale);

  std::vector<std::pair<int, int>> mapped;
  mapped.reserve(points.size());
  for (const auto& p : points) {
    mapped.emplace_back(static_cast<int>(std::lround((p.cx - min_x) * scale + off_x)),
                        static_cast<int>(std::lround((p.cy - min_y) * scale + off_y)));
  }

  GrayImage image{out_size, out_size, std::vector<std::uint8_t>(static_cast<std::size_t>(out_size) * out_size, 0)};
  const std::size_t segments = mapped.size() - 1;
  for (std::size_t k = 0; k < segments; ++k) {
    const auto intensity = static_cast<std::uint8_t>(
        segments == 1 ? 255 : 64 + (191 * static_cast<long>(k) + static_cast<long>(segments - 1) / 2) /
                                       static_cast<long>(segments - 1));
    draw_line(mapped[k].first, mapped[k].second, mapped[k + 1].first, mapped[k + 1].second, [&](int x, int y) {
      auto& px = image.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_size) + static_cast<std::size_t>(x)];
      px = std::max(px, intensity);
    });
  }
  return image;
}

ClassifierInput rasterize_trajectory(const Trajectory& trajectory) {
  const auto image = rasterize_points(trajectory.points, kClassifierSide);
  ClassifierInput out;
  out.kind = InputKind::TrajectoryRaster;
  out.object_id = trajectory.object_id;
  std::copy(image.pixels.begin(), image.pixels.end(), out.pixels.begin());
  return out;
}

}  // namespace antiuav
