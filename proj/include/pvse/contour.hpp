#pragma once

#include <map>
#include <vector>

#include "pvse/level_set.hpp"

namespace pvse {

/// Closed polyline in world coordinates. Counter-clockwise around the
/// negative-phi region it encloses (positive shoelace area, y up).
struct Contour {
  std::vector<Vec2> points;
  bool touches_boundary = false;

  double perimeter() const {
    double len = 0.0;
    for (size_t k = 0; k + 1 <= points.size(); ++k)
      len += (points[(k + 1) % points.size()] - points[k]).norm();
    return len;
  }
  double signed_area() const {
    double a = 0.0;
    for (size_t k = 0; k < points.size(); ++k) {
      const Vec2& p = points[k];
      const Vec2& q = points[(k + 1) % points.size()];
      a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
  }
  Vec2 centroid() const {
    Vec2 c{0, 0};
    for (const Vec2& p : points) c += p;
    return points.empty() ? c : c / static_cast<double>(points.size());
  }
};

namespace detail {

// Edge key inside the padded marching grid: (i, j) cell corner plus
// direction 0 = toward +x, 1 = toward +y.
struct EdgeKey {
  int i, j, dir;
  bool operator<(const EdgeKey& o) const {
    if (i != o.i) return i < o.i;
    if (j != o.j) return j < o.j;
    return dir < o.dir;
  }
};

}  // namespace detail

/// Marching squares over the cell-center lattice with linear sub-cell
/// interpolation. The grid is padded with one positive ghost ring, so regions
/// touching the image boundary are closed along it and flagged.
inline std::vector<Contour> extract_contour(const LevelSetField& field) {
  field.require_interface("extract_contour");
  const GridSpec& spec = field.spec();
  const double h = spec.spacing;
  const int W = spec.width + 2, H = spec.height + 2;  // padded lattice

  double pad = 0.0;
  for (double v : field.values.data()) pad = std::max(pad, std::abs(v));
  pad = std::max(pad, h);

  auto phi = [&](int i, int j) -> double {
    if (i < 1 || j < 1 || i > spec.width || j > spec.height) return pad;
    double v = field.values.at(i - 1, j - 1);
    // Exact zeros would make crossings ambiguous; nudge to the positive side.
    return v == 0.0 ? 1e-12 * h : v;
  };
  auto corner_pos = [&](int i, int j) -> Vec2 {
    return {spec.origin.x + (i - 1) * h, spec.origin.y + (j - 1) * h};
  };
  // Crossing on the edge from corner (i,j) along dir, by linear interpolation.
  auto crossing = [&](const detail::EdgeKey& e) -> Vec2 {
    const int i2 = e.i + (e.dir == 0 ? 1 : 0);
    const int j2 = e.j + (e.dir == 1 ? 1 : 0);
    const double a = phi(e.i, e.j), b = phi(i2, j2);
    const double t = a / (a - b);
    const Vec2 p = corner_pos(e.i, e.j), q = corner_pos(i2, j2);
    return p + (q - p) * t;
  };

  // Directed segments (from-edge -> to-edge) with the negative region on the
  // left of the travel direction.
  std::map<detail::EdgeKey, detail::EdgeKey> next_edge;
  for (int j = 0; j + 1 < H; ++j) {
    for (int i = 0; i + 1 < W; ++i) {
      const bool bl = phi(i, j) < 0.0;
      const bool br = phi(i + 1, j) < 0.0;
      const bool tr = phi(i + 1, j + 1) < 0.0;
      const bool tl = phi(i, j + 1) < 0.0;
      const int code = (bl ? 1 : 0) | (br ? 2 : 0) | (tr ? 4 : 0) | (tl ? 8 : 0);
      if (code == 0 || code == 15) continue;

      const detail::EdgeKey bottom{i, j, 0};
      const detail::EdgeKey top{i, j + 1, 0};
      const detail::EdgeKey left{i, j, 1};
      const detail::EdgeKey right{i + 1, j, 1};
      auto add = [&](detail::EdgeKey from, detail::EdgeKey to) { next_edge[from] = to; };

      switch (code) {
        case 1:  add(bottom, left); break;                 // BL inside
        case 2:  add(right, bottom); break;                // BR
        case 3:  add(right, left); break;                  // BL+BR
        case 4:  add(top, right); break;                   // TR
        case 6:  add(top, bottom); break;                  // BR+TR
        case 7:  add(top, left); break;                    // BL+BR+TR
        case 8:  add(left, top); break;                    // TL
        case 9:  add(bottom, top); break;                  // BL+TL
        case 11: add(right, top); break;                   // BL+BR+TL
        case 12: add(left, right); break;                  // TR+TL
        case 13: add(bottom, right); break;                // BL+TR+TL
        case 14: add(left, bottom); break;                 // BR+TR+TL
        case 5: {                                          // saddle BL+TR
          const double center = 0.25 * (phi(i, j) + phi(i + 1, j) +
                                        phi(i + 1, j + 1) + phi(i, j + 1));
          if (center < 0.0) { add(top, left); add(bottom, right); }
          else              { add(bottom, left); add(top, right); }
          break;
        }
        case 10: {                                         // saddle BR+TL
          const double center = 0.25 * (phi(i, j) + phi(i + 1, j) +
                                        phi(i + 1, j + 1) + phi(i, j + 1));
          if (center < 0.0) { add(left, bottom); add(right, top); }
          else              { add(right, bottom); add(left, top); }
          break;
        }
        default: break;
      }
    }
  }

  std::vector<Contour> contours;
  std::map<detail::EdgeKey, bool> used;
  for (const auto& [start, unused_to] : next_edge) {
    (void)unused_to;
    if (used[start]) continue;
    Contour c;
    detail::EdgeKey e = start;
    do {
      used[e] = true;
      c.points.push_back(crossing(e));
      auto it = next_edge.find(e);
      if (it == next_edge.end()) break;  // open chain; defensive, should not occur
      e = it->second;
    } while (!(e.i == start.i && e.j == start.j && e.dir == start.dir));

    const double x_lo = spec.origin.x - 0.5 * h, x_hi = spec.origin.x + (spec.width - 0.5) * h;
    const double y_lo = spec.origin.y - 0.5 * h, y_hi = spec.origin.y + (spec.height - 0.5) * h;
    for (const Vec2& p : c.points) {
      if (p.x < x_lo || p.x > x_hi || p.y < y_lo || p.y > y_hi) {
        c.touches_boundary = true;
        break;
      }
    }
    if (c.points.size() >= 3) contours.push_back(std::move(c));
  }
  return contours;
}

/// Longest-perimeter component; the main shape when small satellites exist.
inline const Contour& principal_contour(const std::vector<Contour>& cs) {
  if (cs.empty()) throw Error(ErrorCode::NoInterface, "no contour components");
  size_t best = 0;
  double best_len = -1.0;
  for (size_t k = 0; k < cs.size(); ++k) {
    const double len = cs[k].perimeter();
    if (len > best_len) { best_len = len; best = k; }
  }
  return cs[best];
}

/// Resamples a closed polyline to uniform arclength spacing.
inline std::vector<Vec2> resample_closed(const std::vector<Vec2>& pts, double target_ds,
                                         int min_points = 8) {
  if (pts.size() < 3) return pts;
  double length = 0.0;
  for (size_t k = 0; k < pts.size(); ++k)
    length += (pts[(k + 1) % pts.size()] - pts[k]).norm();
  const int n = std::max(min_points, static_cast<int>(std::round(length / target_ds)));
  const double ds = length / n;

  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(n));
  size_t seg = 0;
  double seg_start = 0.0;
  double seg_len = (pts[1 % pts.size()] - pts[0]).norm();
  for (int k = 0; k < n; ++k) {
    const double s = k * ds;
    while (s > seg_start + seg_len && seg + 1 < pts.size() + 1) {
      seg_start += seg_len;
      ++seg;
      seg_len = (pts[(seg + 1) % pts.size()] - pts[seg % pts.size()]).norm();
      if (seg_len <= 0.0) seg_len = 1e-300;
    }
    const double t = std::clamp((s - seg_start) / seg_len, 0.0, 1.0);
    const Vec2 a = pts[seg % pts.size()];
    const Vec2 b = pts[(seg + 1) % pts.size()];
    out.push_back(a + (b - a) * t);
  }
  return out;
}

}  // namespace pvse
