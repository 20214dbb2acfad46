#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "pvse/contour.hpp"
#include "pvse/rng.hpp"

namespace pvse {

struct PointSet {
  std::vector<Vec2> points;
  std::string source;

  void require_at_least(size_t n, const char* who) const {
    if (points.size() < n) throw Error(ErrorCode::EmptySet, who);
  }
  Vec2 centroid() const {
    Vec2 c{0, 0};
    for (const Vec2& p : points) c += p;
    return c / static_cast<double>(points.size());
  }
};

/// Contour samples of a level set, resampled to uniform arclength spacing
/// (default one cell) so the metric does not depend on extraction density.
inline PointSet contour_point_set(const LevelSetField& field, double target_ds = 0.0,
                                  const std::string& source = "") {
  if (target_ds <= 0.0) target_ds = field.spacing();
  PointSet ps;
  ps.source = source;
  for (const Contour& c : extract_contour(field)) {
    const std::vector<Vec2> rs = resample_closed(c.points, target_ds);
    ps.points.insert(ps.points.end(), rs.begin(), rs.end());
  }
  return ps;
}

namespace detail {

/// Directed Hausdorff distance squared with the early-break scan: a point is
/// abandoned as soon as one neighbor proves it cannot raise the running max.
/// Only fully scanned points contribute, so the result is exact.
inline double directed_hausdorff2(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double cur_max = 0.0;
  for (const Vec2& p : a) {
    double best = std::numeric_limits<double>::max();
    bool skip = false;
    for (const Vec2& q : b) {
      const double dx = p.x - q.x, dy = p.y - q.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 <= cur_max) { skip = true; break; }
      best = std::min(best, d2);
    }
    if (!skip) cur_max = std::max(cur_max, best);
  }
  return cur_max;
}

}  // namespace detail

/// Symmetric Hausdorff distance, exact over the sample points.
inline double hausdorff(const PointSet& a, const PointSet& b) {
  a.require_at_least(1, "hausdorff: first set empty");
  b.require_at_least(1, "hausdorff: second set empty");
  return std::sqrt(std::max(detail::directed_hausdorff2(a.points, b.points),
                            detail::directed_hausdorff2(b.points, a.points)));
}

enum class TransformClass { Similarity, Affine };

struct AlignmentResult {
  TransformClass transform_class = TransformClass::Similarity;
  Mat2 A;
  Vec2 b;
  double residual_distance = 0.0;
  int iterations = 0;
};

namespace detail {

struct NmResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Tracks the best point ever evaluated, so the result is never
/// worse than the starting point.
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& start,
                            const std::vector<double>& step, double ftol, int max_iter) {
  const size_t n = start.size();
  std::vector<std::vector<double>> xs(n + 1, start);
  std::vector<double> fs(n + 1);
  for (size_t i = 0; i < n; ++i) xs[i + 1][i] += step[i];
  for (size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  NmResult best;
  best.x = xs[0];
  best.f = fs[0];
  auto consider = [&](const std::vector<double>& x, double v) {
    if (v < best.f) { best.f = v; best.x = x; }
  };
  for (size_t i = 0; i <= n; ++i) consider(xs[i], fs[i]);

  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<size_t> order(n + 1);
    for (size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return fs[i] < fs[j]; });
    const size_t lo = order[0], hi = order[n], second_hi = order[n - 1];
    if (fs[hi] - fs[lo] < ftol) break;

    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (size_t d = 0; d < n; ++d) centroid[d] += xs[i][d] / static_cast<double>(n);
    }
    auto blend = [&](double t) {
      std::vector<double> x(n);
      for (size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (centroid[d] - xs[hi][d]);
      return x;
    };

    const std::vector<double> xr = blend(1.0);
    const double fr = f(xr);
    consider(xr, fr);
    if (fr < fs[lo]) {
      const std::vector<double> xe = blend(2.0);
      const double fe = f(xe);
      consider(xe, fe);
      if (fe < fr) { xs[hi] = xe; fs[hi] = fe; }
      else         { xs[hi] = xr; fs[hi] = fr; }
    } else if (fr < fs[second_hi]) {
      xs[hi] = xr;
      fs[hi] = fr;
    } else {
      const std::vector<double> xc = blend(fr < fs[hi] ? 0.5 : -0.5);
      const double fc = f(xc);
      consider(xc, fc);
      if (fc < std::min(fr, fs[hi])) {
        xs[hi] = xc;
        fs[hi] = fc;
      } else {
        for (size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (size_t d = 0; d < n; ++d) xs[i][d] = xs[lo][d] + 0.5 * (xs[i][d] - xs[lo][d]);
          fs[i] = f(xs[i]);
          consider(xs[i], fs[i]);
        }
      }
    }
  }
  best.iterations = it;
  return best;
}

inline Mat2 covariance(const PointSet& ps) {
  const Vec2 c = ps.centroid();
  double xx = 0, xy = 0, yy = 0;
  for (const Vec2& p : ps.points) {
    const Vec2 d = p - c;
    xx += d.x * d.x;
    xy += d.x * d.y;
    yy += d.y * d.y;
  }
  const double n = static_cast<double>(ps.points.size());
  return {xx / n, xy / n, xy / n, yy / n};
}

inline double principal_angle(const Mat2& cov) {
  return 0.5 * std::atan2(2.0 * cov.b, cov.a - cov.d);
}

/// Symmetric square root of an SPD 2x2 matrix.
inline Mat2 spd_sqrt(const Mat2& m) {
  const double det = std::max(m.det(), 1e-30);
  const double s = std::sqrt(det);
  const double t = std::sqrt(std::max(m.a + m.d + 2.0 * s, 1e-30));
  return {(m.a + s) / t, m.b / t, m.c / t, (m.d + s) / t};
}

}  // namespace pvse::detail

/// Alignment-invariant shape distance: min over the transform class of
/// hausdorff(s, A s_o + b), by multi-start Nelder-Mead over the transform
/// parameters (8 deterministic starts: identity, moment-based initializations
/// and seeded perturbations of both; lowest residual wins, ties by start
/// index). Replaces shape-context matching; any consistent minimizer of the
/// alignment objective serves as the quantitative measure.
inline AlignmentResult aligned_distance(const PointSet& s, const PointSet& s_o,
                                        TransformClass cls) {
  s.require_at_least(10, "aligned_distance: first set needs >= 10 points");
  s_o.require_at_least(10, "aligned_distance: second set needs >= 10 points");

  const bool affine = cls == TransformClass::Affine;
  const size_t dim = affine ? 6 : 4;

  // Pack/unpack: similarity = [log s, angle, tx, ty]; affine = [A row-major, t].
  auto unpack = [&](const std::vector<double>& p) -> AffineMap2 {
    if (affine) return {{p[0], p[1], p[2], p[3]}, {p[4], p[5]}};
    const double sc = std::exp(p[0]);
    Mat2 a = Mat2::rotation(p[1]);
    a = {sc * a.a, sc * a.b, sc * a.c, sc * a.d};
    return {a, {p[2], p[3]}};
  };

  std::vector<Vec2> moved(s_o.points.size());
  auto objective = [&](const std::vector<double>& p) {
    const AffineMap2 t = unpack(p);
    for (size_t k = 0; k < s_o.points.size(); ++k) moved[k] = t.apply(s_o.points[k]);
    return std::sqrt(std::max(detail::directed_hausdorff2(s.points, moved),
                              detail::directed_hausdorff2(moved, s.points)));
  };

  // Moment-based initialization: match centroids, spread and principal axes.
  const Vec2 cs = s.centroid(), co = s_o.centroid();
  const Mat2 cov_s = detail::covariance(s), cov_o = detail::covariance(s_o);
  const double spread_s = std::sqrt(std::max(cov_s.a + cov_s.d, 1e-30));
  const double spread_o = std::sqrt(std::max(cov_o.a + cov_o.d, 1e-30));
  const double ang = detail::principal_angle(cov_s) - detail::principal_angle(cov_o);

  std::vector<std::vector<double>> starts;
  auto make_similarity_params = [&](double log_s, double angle) {
    const double sc = std::exp(log_s);
    const Mat2 a0 = Mat2::rotation(angle);
    const Vec2 t = cs - Vec2{sc * (a0.a * co.x + a0.b * co.y), sc * (a0.c * co.x + a0.d * co.y)};
    if (affine)
      return std::vector<double>{sc * a0.a, sc * a0.b, sc * a0.c, sc * a0.d, t.x, t.y};
    return std::vector<double>{log_s, angle, t.x, t.y};
  };

  if (affine) starts.push_back({1, 0, 0, 1, 0, 0});
  else        starts.push_back({0, 0, 0, 0});
  starts.push_back(make_similarity_params(std::log(spread_s / spread_o), ang));
  starts.push_back(make_similarity_params(std::log(spread_s / spread_o), ang + kPi));
  if (affine) {
    // Whitening map: sqrt(cov_s) sqrt(cov_o)^-1, centroid-matched.
    const Mat2 a0 = detail::spd_sqrt(cov_s).mul(detail::spd_sqrt(cov_o).inverse());
    const Vec2 t = cs - a0.apply(co);
    starts.push_back({a0.a, a0.b, a0.c, a0.d, t.x, t.y});
  }
  Rng rng(0x5eedALL);
  const size_t fixed = starts.size();
  while (starts.size() < 8) {
    std::vector<double> p = starts[starts.size() % fixed];
    if (affine) {
      for (int k = 0; k < 4; ++k) p[static_cast<size_t>(k)] += rng.uniform(-0.15, 0.15);
      p[4] += rng.uniform(-2.0, 2.0) * spread_s * 0.05;
      p[5] += rng.uniform(-2.0, 2.0) * spread_s * 0.05;
    } else {
      p[0] += rng.uniform(-0.15, 0.15);
      p[1] += rng.uniform(-0.3, 0.3);
      p[2] += rng.uniform(-2.0, 2.0) * spread_s * 0.05;
      p[3] += rng.uniform(-2.0, 2.0) * spread_s * 0.05;
    }
    starts.push_back(std::move(p));
  }

  std::vector<double> step;
  if (affine) step = {0.08, 0.08, 0.08, 0.08, 0.05 * spread_s, 0.05 * spread_s};
  else        step = {0.08, 0.15, 0.05 * spread_s, 0.05 * spread_s};

  AlignmentResult best;
  best.transform_class = cls;
  best.residual_distance = std::numeric_limits<double>::max();
  std::vector<double> best_x;
  for (const auto& st : starts) {
    const detail::NmResult r = detail::nelder_mead(objective, st, step, 1e-4, 500);
    if (r.f < best.residual_distance) {
      best.residual_distance = r.f;
      best.iterations = r.iterations;
      best_x = r.x;
    }
  }
  // Polish pass: a fresh simplex around the winner tightens the final basin.
  std::vector<double> fine_step = step;
  for (double& s : fine_step) s *= 0.2;
  const detail::NmResult polished = detail::nelder_mead(objective, best_x, fine_step, 1e-5, 300);
  if (polished.f < best.residual_distance) {
    best.residual_distance = polished.f;
    best_x = polished.x;
  }
  const AffineMap2 t = unpack(best_x);
  best.A = t.linear;
  best.b = t.offset;
  return best;
}

/// Intersection over union of two masks on the same grid.
inline double jaccard(const MaskGrid& a, const MaskGrid& b) {
  if (!(a.spec() == b.spec()))
    throw Error(ErrorCode::DimensionMismatch, "jaccard: masks on different grids");
  long inter = 0, uni = 0;
  for (size_t k = 0; k < a.data().size(); ++k) {
    const bool va = a.data()[k] != 0, vb = b.data()[k] != 0;
    inter += (va && vb);
    uni += (va || vb);
  }
  if (uni == 0) throw Error(ErrorCode::BothEmpty, "jaccard of two empty masks");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Boxplot statistics. Quantiles use the linear-interpolation convention
/// h = (n-1) p (the default of most statistics packages).
struct SummaryStats {
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  double mean = 0.0, stddev = 0.0;
  std::vector<double> outliers;  // beyond 1.5 IQR from the quartiles
};

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline SummaryStats summarize(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::EmptyList, "summarize of empty list");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  SummaryStats st;
  st.q25 = quantile_sorted(sorted, 0.25);
  st.median = quantile_sorted(sorted, 0.50);
  st.q75 = quantile_sorted(sorted, 0.75);
  const double iqr = st.q75 - st.q25;
  for (double v : sorted)
    if (v < st.q25 - 1.5 * iqr || v > st.q75 + 1.5 * iqr) st.outliers.push_back(v);
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.stddev = values.size() > 1 ? std::sqrt(ss / (static_cast<double>(values.size()) - 1.0)) : 0.0;
  return st;
}

}  // namespace pvse
