#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pvse/common.hpp"

namespace pvse {

/// Discrete 2-D raster layout. Cell (i, j) has its center at
/// origin + (i, j) * spacing, with x growing along i and y along j.
struct GridSpec {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  Vec2 origin{0.0, 0.0};

  GridSpec() = default;
  GridSpec(int w, int h, double sp = 1.0, Vec2 org = {0.0, 0.0})
      : width(w), height(h), spacing(sp), origin(org) {
    if (w < 8 || h < 8) throw Error(ErrorCode::ConfigError, "grid must be at least 8x8");
    if (sp <= 0.0) throw Error(ErrorCode::ConfigError, "grid spacing must be positive");
  }

  int cell_count() const { return width * height; }
  Vec2 cell_center(int i, int j) const {
    return {origin.x + i * spacing, origin.y + j * spacing};
  }
  /// Continuous grid coordinates (units of cells) of a world point.
  Vec2 to_grid(const Vec2& world) const {
    return {(world.x - origin.x) / spacing, (world.y - origin.y) / spacing};
  }
  bool operator==(const GridSpec& o) const {
    return width == o.width && height == o.height && spacing == o.spacing &&
           origin.x == o.origin.x && origin.y == o.origin.y;
  }

  /// World -> [-1,1]^2 isotropic map about the grid center. The same scale is
  /// used on both axes so rotations in normalized coordinates stay rotations
  /// in world coordinates.
  AffineMap2 centered_unit_map() const {
    const double half_span = 0.5 * spacing * std::max(width, height);
    const Vec2 center{origin.x + 0.5 * spacing * (width - 1),
                      origin.y + 0.5 * spacing * (height - 1)};
    const double s = 1.0 / half_span;
    return {Mat2::diag(s, s), {-center.x * s, -center.y * s}};
  }

  /// World -> [0,1]^2 map covering the full cell extent edge to edge
  /// (per-axis scaling).
  AffineMap2 unit_square_map() const {
    const double sx = 1.0 / (width * spacing);
    const double sy = 1.0 / (height * spacing);
    const double x0 = origin.x - 0.5 * spacing;
    const double y0 = origin.y - 0.5 * spacing;
    return {Mat2::diag(sx, sy), {-x0 * sx, -y0 * sy}};
  }
};

template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(const GridSpec& spec, T fill = T())
      : spec_(spec), data_(static_cast<size_t>(spec.cell_count()), fill) {}

  const GridSpec& spec() const { return spec_; }
  int width() const { return spec_.width; }
  int height() const { return spec_.height; }
  double spacing() const { return spec_.spacing; }

  T& at(int i, int j) { return data_[static_cast<size_t>(j) * spec_.width + i]; }
  const T& at(int i, int j) const { return data_[static_cast<size_t>(j) * spec_.width + i]; }

  /// Clamped access; replicates edge values outside the domain.
  const T& at_clamped(int i, int j) const {
    i = std::clamp(i, 0, spec_.width - 1);
    j = std::clamp(j, 0, spec_.height - 1);
    return at(i, j);
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <typename F>
  void fill_with(F&& f) {
    for (int j = 0; j < spec_.height; ++j)
      for (int i = 0; i < spec_.width; ++i) at(i, j) = f(i, j);
  }

 private:
  GridSpec spec_;
  std::vector<T> data_;
};

using ScalarGrid = Grid<double>;
using MaskGrid = Grid<std::uint8_t>;  // 0 = background, 1 = foreground

/// Bilinear sample at continuous grid coordinates, clamped at the domain edge.
inline double sample_bilinear(const ScalarGrid& g, const Vec2& grid_pos) {
  const double x = grid_pos.x, y = grid_pos.y;
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const double fx = x - i0, fy = y - j0;
  const double v00 = g.at_clamped(i0, j0);
  const double v10 = g.at_clamped(i0 + 1, j0);
  const double v01 = g.at_clamped(i0, j0 + 1);
  const double v11 = g.at_clamped(i0 + 1, j0 + 1);
  return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
         v11 * fx * fy;
}

inline int count_foreground(const MaskGrid& m) {
  int n = 0;
  for (auto v : m.data()) n += (v != 0);
  return n;
}

}  // namespace pvse
