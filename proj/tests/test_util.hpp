#pragma once

#include "pvse/pvse.hpp"

namespace testutil {

using namespace pvse;

inline MaskGrid disk_mask(const GridSpec& spec, Vec2 c, double r) {
  MaskGrid m(spec, 0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      m.at(i, j) = (spec.cell_center(i, j) - c).norm() <= r ? 1 : 0;
  return m;
}

inline MaskGrid square_mask(const GridSpec& spec, int lo, int hi) {
  MaskGrid m(spec, 0);
  for (int j = lo; j < hi; ++j)
    for (int i = lo; i < hi; ++i) m.at(i, j) = 1;
  return m;
}

/// Exact SDF of an axis-aligned rectangle [x0,x1]x[y0,y1].
inline LevelSetField rect_field(const GridSpec& spec, double x0, double y0, double x1,
                                double y1) {
  LevelSetField f(spec);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const Vec2 p = spec.cell_center(i, j);
      const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
      const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
      const double outside = std::hypot(dx, dy);
      const double inside =
          std::min(std::min(p.x - x0, x1 - p.x), std::min(p.y - y0, y1 - p.y));
      f.values.at(i, j) = outside > 0.0 ? outside : -inside;
    }
  return f;
}

inline double max_abs_diff(const ScalarGrid& a, const ScalarGrid& b) {
  double m = 0.0;
  for (size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline Vec2 grid_center(const GridSpec& spec) {
  return {spec.origin.x + 0.5 * spec.spacing * (spec.width - 1),
          spec.origin.y + 0.5 * spec.spacing * (spec.height - 1)};
}

}  // namespace testutil
