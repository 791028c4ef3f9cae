#pragma once

#include <algorithm>
#include <cstdint>

namespace antiuav {

// Axis-aligned box with inclusive pixel bounds.
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  constexpr int width() const { return x_max - x_min + 1; }
  constexpr int height() const { return y_max - y_min + 1; }
  constexpr std::int64_t area() const {
    return static_cast<std::int64_t>(width()) * static_cast<std::int64_t>(height());
  }
  constexpr bool valid() const { return x_min <= x_max && y_min <= y_max; }

  constexpr double center_x() const { return 0.5 * (x_min + x_max); }
  constexpr double center_y() const { return 0.5 * (y_min + y_max); }

  constexpr bool contains(int x, int y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  constexpr Box dilated(int margin) const {
    return {x_min - margin, y_min - margin, x_max + margin, y_max + margin};
  }

  constexpr bool intersects(const Box& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }

  constexpr Box united(const Box& o) const {
    return {std::min(x_min, o.x_min), std::min(y_min, o.y_min), std::max(x_max, o.x_max),
            std::max(y_max, o.y_max)};
  }

  // Grows the box to cover (x, y).
  constexpr void include(int x, int y) {
    x_min = std::min(x_min, x);
    y_min = std::min(y_min, y);
    x_max = std::max(x_max, x);
    y_max = std::max(y_max, y);
  }

  static constexpr Box point(int x, int y) { return {x, y, x, y}; }

  constexpr bool operator==(const Box&) const = default;
};

}  // namespace antiuav
