#pragma once

#include <optional>
#include <vector>

#include "pvse/solver.hpp"

namespace pvse {

struct ZeroCrossing {
  double s = 0.0;        // arclength position along the contour
  Vec2 point;            // location (analysis coordinates)
  double kappa_s = 0.0;  // curvature slope at the crossing
};

struct ZeroCrossingSet {
  std::vector<ZeroCrossing> crossings;
  double contour_length = 0.0;
  int iteration = 0;
  // Sampled curve retained so drifts can be measured against it.
  std::vector<Vec2> samples;
  std::vector<double> kappa;
};

namespace detail {

/// Circular Gaussian smoothing of closed-polyline positions, sigma in samples.
inline std::vector<Vec2> smooth_closed(const std::vector<Vec2>& pts, double sigma) {
  const int n = static_cast<int>(pts.size());
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> w(static_cast<size_t>(radius) + 1);
  double norm = 0.0;
  for (int k = 0; k <= radius; ++k) {
    w[static_cast<size_t>(k)] = std::exp(-0.5 * k * k / (sigma * sigma));
    norm += (k == 0 ? 1.0 : 2.0) * w[static_cast<size_t>(k)];
  }
  for (double& v : w) v /= norm;
  std::vector<Vec2> out(pts.size());
  for (int i = 0; i < n; ++i) {
    Vec2 acc = pts[static_cast<size_t>(i)] * w[0];
    for (int k = 1; k <= radius; ++k) {
      acc += pts[static_cast<size_t>(((i - k) % n + n) % n)] * w[static_cast<size_t>(k)];
      acc += pts[static_cast<size_t>((i + k) % n)] * w[static_cast<size_t>(k)];
    }
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

/// Turning-angle curvature of a closed polyline (positive on convex arcs of a
/// counter-clockwise contour).
inline std::vector<double> turning_curvature(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<double> kappa(pts.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec2 a = pts[static_cast<size_t>(i)] - pts[static_cast<size_t>(((i - 1) % n + n) % n)];
    const Vec2 b = pts[static_cast<size_t>((i + 1) % n)] - pts[static_cast<size_t>(i)];
    const double cross = a.x * b.y - a.y * b.x;
    const double angle = std::atan2(cross, a.dot(b));
    const double ds = 0.5 * (a.norm() + b.norm());
    kappa[static_cast<size_t>(i)] = ds > 1e-12 ? angle / ds : 0.0;
  }
  return kappa;
}

}  // namespace detail

/// Curvature zero-crossings of the principal contour in the curvature scale
/// space sense: the contour is resampled to uniform arclength, its positions
/// Gaussian-smoothed (sigma in samples), and crossings located by linear
/// interpolation of the turning-angle curvature. `frame` maps world points
/// into the analysis coordinates (identity for plain world-space analysis,
/// the basis normalization for the preservability bounds).
inline ZeroCrossingSet find_zero_crossings(const LevelSetField& field,
                                           double sigma_samples = 3.0,
                                           const AffineMap2& frame = AffineMap2::identity(),
                                           double sample_ds = 0.0) {
  if (sigma_samples < 1.0)
    throw Error(ErrorCode::ConfigError, "smoothing sigma must be at least one sample");
  const auto contours = extract_contour(field);
  const Contour& main = principal_contour(contours);

  std::vector<Vec2> pts;
  pts.reserve(main.points.size());
  for (const Vec2& p : main.points) pts.push_back(frame.apply(p));
  // One grid cell expressed in analysis coordinates: the arclength unit of
  // the smoothing sigma, regardless of the chosen sample density.
  const Vec2 ax = frame.linear.apply({field.spacing(), 0.0});
  const Vec2 ay = frame.linear.apply({0.0, field.spacing()});
  const double cell_ds = 0.5 * (ax.norm() + ay.norm());
  if (sample_ds <= 0.0) sample_ds = cell_ds;
  const std::vector<Vec2> uniform = resample_closed(pts, sample_ds, 16);
  const std::vector<Vec2> smooth =
      detail::smooth_closed(uniform, sigma_samples * cell_ds / sample_ds);
  const std::vector<double> kappa = detail::turning_curvature(smooth);

  ZeroCrossingSet set;
  set.samples = smooth;
  set.kappa = kappa;
  const int n = static_cast<int>(smooth.size());
  std::vector<double> s_at(static_cast<size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i)
    s_at[static_cast<size_t>(i) + 1] =
        s_at[static_cast<size_t>(i)] +
        (smooth[static_cast<size_t>((i + 1) % n)] - smooth[static_cast<size_t>(i)]).norm();
  set.contour_length = s_at[static_cast<size_t>(n)];

  for (int i = 0; i < n; ++i) {
    const double k0 = kappa[static_cast<size_t>(i)];
    const double k1 = kappa[static_cast<size_t>((i + 1) % n)];
    if (k0 == 0.0 || k0 * k1 >= 0.0) continue;
    const double t = k0 / (k0 - k1);
    const Vec2 p = smooth[static_cast<size_t>(i)] +
                   (smooth[static_cast<size_t>((i + 1) % n)] - smooth[static_cast<size_t>(i)]) * t;
    const double ds = s_at[static_cast<size_t>(i) + 1] - s_at[static_cast<size_t>(i)];
    ZeroCrossing zc;
    zc.s = s_at[static_cast<size_t>(i)] + t * ds;
    zc.point = p;
    zc.kappa_s = ds > 1e-12 ? (k1 - k0) / ds : 0.0;
    set.crossings.push_back(zc);
  }
  return set;
}

struct CrossingMatch {
  int before_index = -1;
  int after_index = -1;
  double distance = 0.0;
};

struct CrossingTracks {
  std::vector<CrossingMatch> matches;
  std::vector<int> births;  // indices into after
  std::vector<int> deaths;  // indices into before
};

/// Greedy nearest-neighbor correspondence between consecutive crossing sets,
/// gated at `gate` distance units. Unmatched entries are shape-characteristic
/// violations (births/deaths).
inline CrossingTracks track_crossings(const ZeroCrossingSet& before,
                                      const ZeroCrossingSet& after, double gate = 5.0) {
  CrossingTracks tracks;
  std::vector<bool> used_b(before.crossings.size(), false);
  std::vector<bool> used_a(after.crossings.size(), false);
  while (true) {
    double best = gate;
    int bi = -1, ai = -1;
    for (int b = 0; b < static_cast<int>(before.crossings.size()); ++b) {
      if (used_b[static_cast<size_t>(b)]) continue;
      for (int a = 0; a < static_cast<int>(after.crossings.size()); ++a) {
        if (used_a[static_cast<size_t>(a)]) continue;
        const double d =
            (before.crossings[static_cast<size_t>(b)].point - after.crossings[static_cast<size_t>(a)].point)
                .norm();
        if (d < best) { best = d; bi = b; ai = a; }
      }
    }
    if (bi < 0) break;
    used_b[static_cast<size_t>(bi)] = true;
    used_a[static_cast<size_t>(ai)] = true;
    tracks.matches.push_back({bi, ai, best});
  }
  for (int b = 0; b < static_cast<int>(before.crossings.size()); ++b)
    if (!used_b[static_cast<size_t>(b)]) tracks.deaths.push_back(b);
  for (int a = 0; a < static_cast<int>(after.crossings.size()); ++a)
    if (!used_a[static_cast<size_t>(a)]) tracks.births.push_back(a);
  return tracks;
}

struct BoundStep {
  int index = 0;
  double measured_max = 0.0;  // max |dkappa/dt| (theorem) or |d|p1-p2|/dt| (corollary)
  double bound = 0.0;
  double ratio = 0.0;         // measured / bound (0 when bound is 0)
  bool exceeded = false;
  int births = 0;
  int deaths = 0;
};

struct BoundCheckReport {
  std::vector<BoundStep> steps;
  double allowance = 0.2;
  double second_derivative_total = 0.0;
  double max_ratio = 0.0;
  bool asserted_pass = true;
};

namespace detail {

inline double kappa_near(const ZeroCrossingSet& set, const Vec2& p) {
  double best = std::numeric_limits<double>::max();
  double k = 0.0;
  for (size_t i = 0; i < set.samples.size(); ++i) {
    const double d = (set.samples[i] - p).norm2();
    if (d < best) { best = d; k = set.kappa[i]; }
  }
  return k;
}

}  // namespace detail

/// Empirical Theorem-1 certificate. Everything is evaluated in the basis's
/// normalized coordinates, where the analytic second-derivative budget lives.
/// For every tracked crossing the material point is advected by the PVSE
/// velocity and the curvature picked up at the next snapshot; the rate is
/// compared against |dtheta/dt|_2 * sum_i |D^2 V_i|_inf.
inline BoundCheckReport check_theorem1(const std::vector<LevelSetField>& snapshots,
                                       const PriorVariationBasis& basis,
                                       const std::vector<ParamVector>& velocities,
                                       double dt_between, double sigma_samples = 3.0,
                                       double allowance = 0.2) {
  if (snapshots.size() < 2)
    throw Error(ErrorCode::InsufficientSnapshots, "need at least two snapshots");
  if (velocities.size() + 1 < snapshots.size())
    throw Error(ErrorCode::InsufficientSnapshots, "need a velocity per step");

  const SecondDerivativeReport sd = second_derivative_norms(basis);
  BoundCheckReport rep;
  rep.allowance = allowance;
  rep.second_derivative_total = sd.total;

  std::vector<ZeroCrossingSet> sets;
  sets.reserve(snapshots.size());
  for (size_t k = 0; k < snapshots.size(); ++k) {
    ZeroCrossingSet s = find_zero_crossings(snapshots[k], sigma_samples, basis.normalization);
    s.iteration = static_cast<int>(k);
    sets.push_back(std::move(s));
  }
  // Gate expressed in normalized units: 5 grid cells through the frame scale.
  const Vec2 gx = basis.normalization.linear.apply({snapshots[0].spacing(), 0.0});
  const double gate = 5.0 * gx.norm();

  for (size_t k = 0; k + 1 < sets.size(); ++k) {
    const ParamVector& vel = velocities[k];
    double vel_norm = 0.0;
    for (double v : vel) vel_norm += v * v;
    vel_norm = std::sqrt(vel_norm);

    BoundStep step;
    step.index = static_cast<int>(k);
    step.bound = vel_norm * sd.total;

    const CrossingTracks tracks = track_crossings(sets[k], sets[k + 1], gate);
    step.births = static_cast<int>(tracks.births.size());
    step.deaths = static_cast<int>(tracks.deaths.size());
    for (const CrossingMatch& m : tracks.matches) {
      const ZeroCrossing& zc = sets[k].crossings[static_cast<size_t>(m.before_index)];
      Vec2 moved = zc.point;
      for (int c = 0; c < basis.count(); ++c)
        moved += basis.eval_normalized(c, zc.point) * (vel[static_cast<size_t>(c)] * dt_between);
      const double kap = detail::kappa_near(sets[k + 1], moved);
      step.measured_max = std::max(step.measured_max, std::abs(kap) / dt_between);
    }
    if (step.bound > 1e-12) {
      step.ratio = step.measured_max / step.bound;
      step.exceeded = step.ratio > 1.0 + allowance;
    }
    rep.max_ratio = std::max(rep.max_ratio, step.ratio);
    rep.asserted_pass = rep.asserted_pass && !step.exceeded;
    rep.steps.push_back(step);
  }
  return rep;
}

/// Corollary-1 record: rate of the normalized-arclength distance between the
/// two strongest persisting crossings against the printed bound
/// 2 /(|kappa_s| L) * |dtheta/dt| * sum |D^2 V|. The pointwise kappa_s makes
/// this a noisy pointwise bound; results are reported, not asserted.
inline BoundCheckReport check_corollary1(const std::vector<LevelSetField>& snapshots,
                                         const PriorVariationBasis& basis,
                                         const std::vector<ParamVector>& velocities,
                                         double dt_between, double sigma_samples = 3.0,
                                         double allowance = 0.2) {
  if (snapshots.size() < 2)
    throw Error(ErrorCode::InsufficientSnapshots, "need at least two snapshots");
  if (velocities.empty())
    throw Error(ErrorCode::InsufficientSnapshots, "need a velocity per step");
  const SecondDerivativeReport sd = second_derivative_norms(basis);
  BoundCheckReport rep;
  rep.allowance = allowance;
  rep.second_derivative_total = sd.total;

  std::vector<ZeroCrossingSet> sets;
  for (size_t k = 0; k < snapshots.size(); ++k)
    sets.push_back(find_zero_crossings(snapshots[k], sigma_samples, basis.normalization));

  const Vec2 gx = basis.normalization.linear.apply({snapshots[0].spacing(), 0.0});
  const double gate = 5.0 * gx.norm();

  for (size_t k = 0; k + 1 < sets.size(); ++k) {
    if (sets[k].crossings.size() < 2)
      throw Error(ErrorCode::InsufficientCrossings,
                  "corollary check needs at least two crossings");
    const CrossingTracks tracks = track_crossings(sets[k], sets[k + 1], gate);
    if (tracks.matches.size() < 2)
      throw Error(ErrorCode::InsufficientCrossings, "crossings did not persist");

    const ParamVector& vel = velocities[std::min(k, velocities.size() - 1)];
    double vel_norm = 0.0;
    for (double v : vel) vel_norm += v * v;
    vel_norm = std::sqrt(vel_norm);

    // Normalized parameters p = s / L, circular distance.
    auto par_dist = [](const ZeroCrossing& a, const ZeroCrossing& b, double len) {
      double d = std::abs(a.s - b.s) / len;
      return std::min(d, 1.0 - d);
    };
    const CrossingMatch& m0 = tracks.matches[0];
    const CrossingMatch& m1 = tracks.matches[1];
    const double before = par_dist(sets[k].crossings[static_cast<size_t>(m0.before_index)],
                                   sets[k].crossings[static_cast<size_t>(m1.before_index)],
                                   sets[k].contour_length);
    const double after = par_dist(sets[k + 1].crossings[static_cast<size_t>(m0.after_index)],
                                  sets[k + 1].crossings[static_cast<size_t>(m1.after_index)],
                                  sets[k + 1].contour_length);
    const double measured = std::abs(after - before) / dt_between;

    const double ks0 = std::abs(sets[k].crossings[static_cast<size_t>(m0.before_index)].kappa_s);
    const double ks1 = std::abs(sets[k].crossings[static_cast<size_t>(m1.before_index)].kappa_s);
    const double ks = std::max(std::min(ks0, ks1), 1e-12);
    const double cp = sets[k].contour_length;  // |C_p| with p = s/L

    BoundStep step;
    step.index = static_cast<int>(k);
    step.measured_max = measured;
    step.bound = 2.0 / (ks * cp) * vel_norm * sd.total;
    if (step.bound > 1e-12) {
      step.ratio = measured / step.bound;
      step.exceeded = step.ratio > 1.0 + allowance;
    }
    step.births = static_cast<int>(tracks.births.size());
    step.deaths = static_cast<int>(tracks.deaths.size());
    rep.max_ratio = std::max(rep.max_ratio, step.ratio);
    rep.asserted_pass = rep.asserted_pass && !step.exceeded;
    rep.steps.push_back(step);
  }
  return rep;
}

}  // namespace pvse
