#pragma once

#include <string>
#include <vector>

#include "pvse/grid.hpp"
#include "pvse/level_set.hpp"

namespace pvse {

/// Even-odd point-in-rings test (rings need not be disjoint; overlaps toggle).
inline bool point_in_rings(const std::vector<std::vector<Vec2>>& rings, const Vec2& p) {
  bool inside = false;
  for (const auto& ring : rings) {
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2& a = ring[i];
      const Vec2& b = ring[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

/// Rasterizes unit-box polygon rings into a mask. `box_fraction` controls the
/// fitted square extent about the grid center.
inline MaskGrid rasterize_rings(const std::vector<std::vector<Vec2>>& rings,
                                const GridSpec& spec, double box_fraction = 0.6) {
  const double span = box_fraction * spec.spacing * std::min(spec.width, spec.height);
  const Vec2 center{spec.origin.x + 0.5 * spec.spacing * (spec.width - 1),
                    spec.origin.y + 0.5 * spec.spacing * (spec.height - 1)};
  const Vec2 lo{center.x - 0.5 * span, center.y - 0.5 * span};
  MaskGrid mask(spec, 0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const Vec2 w = spec.cell_center(i, j);
      const Vec2 u{(w.x - lo.x) / span, (w.y - lo.y) / span};
      if (u.x < 0 || u.x > 1 || u.y < 0 || u.y > 1) continue;
      mask.at(i, j) = point_in_rings(rings, u) ? 1 : 0;
    }
  return mask;
}

namespace shapes {

/// Wide-stroke upright "A" (outer body, leg notch, counter hole; even-odd).
inline std::vector<std::vector<Vec2>> glyph_a_bold() {
  return {
      {{0.00, 0.0}, {0.38, 1.0}, {0.62, 1.0}, {1.00, 0.0}},
      {{0.20, 0.0}, {0.42, 0.30}, {0.58, 0.30}, {0.80, 0.0}},
      {{0.40, 0.44}, {0.60, 0.44}, {0.50, 0.68}},
  };
}

/// Slanted lighter-weight "A"; differs from the bold one beyond an affine map
/// (stroke weight and counter proportions), so the pair carries a nonzero
/// alignment-invariant distance that serves as the evaluation baseline.
inline std::vector<std::vector<Vec2>> glyph_a_slanted() {
  std::vector<std::vector<Vec2>> rings = {
      {{0.02, 0.0}, {0.42, 1.0}, {0.56, 1.0}, {0.92, 0.0}},
      {{0.16, 0.0}, {0.42, 0.34}, {0.54, 0.34}, {0.74, 0.0}},
      {{0.40, 0.46}, {0.56, 0.46}, {0.475, 0.74}},
  };
  for (auto& ring : rings)
    for (Vec2& p : ring) p.x = 0.72 * (p.x + 0.32 * p.y);
  return rings;
}

/// Four-legged animal silhouette with ears, snout and tail; the protruding
/// parts give the occlusion experiments something to chew off.
inline std::vector<std::vector<Vec2>> animal() {
  return {{
      {0.05, 0.62}, {0.10, 0.54}, {0.16, 0.58}, {0.30, 0.62}, {0.45, 0.64},
      {0.58, 0.64}, {0.66, 0.72}, {0.69, 0.84}, {0.70, 0.93}, {0.745, 0.85},
      {0.77, 0.94}, {0.80, 0.84}, {0.88, 0.80}, {0.94, 0.72}, {0.90, 0.66},
      {0.82, 0.64}, {0.76, 0.56}, {0.72, 0.48},
      {0.715, 0.30}, {0.72, 0.10}, {0.72, 0.00}, {0.655, 0.00}, {0.65, 0.10}, {0.645, 0.30},
      {0.60, 0.38},
      {0.575, 0.30}, {0.58, 0.10}, {0.58, 0.00}, {0.515, 0.00}, {0.51, 0.10}, {0.505, 0.34},
      {0.42, 0.38},
      {0.37, 0.30}, {0.375, 0.10}, {0.38, 0.00}, {0.315, 0.00}, {0.31, 0.10}, {0.30, 0.30},
      {0.27, 0.38},
      {0.235, 0.30}, {0.24, 0.10}, {0.245, 0.00}, {0.18, 0.00}, {0.175, 0.10}, {0.165, 0.34},
      {0.12, 0.44}, {0.03, 0.50}, {0.01, 0.60},
  }};
}

/// Polar peanut r(a) = 1 + 0.4 cos(2a); four curvature zero-crossings.
inline std::vector<std::vector<Vec2>> peanut(int samples = 256) {
  std::vector<Vec2> ring;
  ring.reserve(static_cast<size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double a = 2.0 * kPi * k / samples;
    const double r = (1.0 + 0.4 * std::cos(2 * a)) / 2.8;  // fits in the unit box
    ring.push_back({0.5 + r * std::cos(a), 0.5 + r * std::sin(a)});
  }
  return {ring};
}

}  // namespace shapes

/// Named built-in template masks.
inline MaskGrid builtin_template(const std::string& name, const GridSpec& spec,
                                 double box_fraction = 0.6) {
  if (name == "animal") return rasterize_rings(shapes::animal(), spec, box_fraction);
  if (name == "glyph-a" || name == "glyph-a-bold")
    return rasterize_rings(shapes::glyph_a_bold(), spec, box_fraction);
  if (name == "glyph-a-slanted")
    return rasterize_rings(shapes::glyph_a_slanted(), spec, box_fraction);
  if (name == "peanut") return rasterize_rings(shapes::peanut(), spec, box_fraction);
  if (name == "disk") {
    MaskGrid m(spec, 0);
    const Vec2 c{spec.origin.x + 0.5 * spec.spacing * (spec.width - 1),
                 spec.origin.y + 0.5 * spec.spacing * (spec.height - 1)};
    const double r = 0.5 * box_fraction * spec.spacing * std::min(spec.width, spec.height);
    for (int j = 0; j < spec.height; ++j)
      for (int i = 0; i < spec.width; ++i)
        m.at(i, j) = (spec.cell_center(i, j) - c).norm() <= r ? 1 : 0;
    return m;
  }
  throw Error(ErrorCode::ConfigError, "unknown built-in template: " + name);
}

/// Analytic signed distance of a disk; test and synthesis helper.
inline LevelSetField disk_field(const GridSpec& spec, const Vec2& center, double radius) {
  LevelSetField f(spec);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      f.values.at(i, j) = (spec.cell_center(i, j) - center).norm() - radius;
  return f;
}

}  // namespace pvse
