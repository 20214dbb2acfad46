#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pvse/contour.hpp"
#include "pvse/level_set.hpp"
#include "pvse/rng.hpp"

namespace pvse {

enum class WarpKind { Similarity, Affine, Harmonic };

inline const char* warp_kind_name(WarpKind k) {
  switch (k) {
    case WarpKind::Similarity: return "similarity";
    case WarpKind::Affine: return "affine";
    case WarpKind::Harmonic: return "harmonic";
  }
  return "?";
}

/// Laplace-eigenfunction mode set for the harmonic displacement family.
/// Either the full rectangle 1 <= m <= M, 1 <= n <= N or the triangular
/// selection 1 <= m + n <= order. Modes are ordered by (m + n, m).
struct HarmonicModes {
  std::vector<std::pair<int, int>> modes;  // (m, n)

  static HarmonicModes rectangle(int M, int N) {
    HarmonicModes hm;
    for (int sum = 2; sum <= M + N; ++sum)
      for (int m = 1; m <= M; ++m) {
        const int n = sum - m;
        if (n >= 1 && n <= N) hm.modes.emplace_back(m, n);
      }
    return hm;
  }
  static HarmonicModes order_bound(int order) {
    HarmonicModes hm;
    for (int sum = 2; sum <= order; ++sum)
      for (int m = 1; m < sum; ++m) hm.modes.emplace_back(m, sum - m);
    return hm;
  }
  int count() const { return static_cast<int>(modes.size()); }
};

/// Displacement basis functions of the harmonic family, on [0,1]^2:
///   e1_mn = sin(pi n x) cos(pi m y) / (pi^2 (n^2 + m^2))
///   e2_mn = cos(pi m x) sin(pi n y) / (pi^2 (n^2 + m^2))
inline double harmonic_e1(int m, int n, const Vec2& u) {
  return std::sin(kPi * n * u.x) * std::cos(kPi * m * u.y) /
         (kPi * kPi * (n * n + m * m));
}
inline double harmonic_e2(int m, int n, const Vec2& u) {
  return std::cos(kPi * m * u.x) * std::sin(kPi * n * u.y) /
         (kPi * kPi * (n * n + m * m));
}

/// Warping parameter vector. Layout:
///   similarity: [lambda, omega, a, b]
///   affine:     [a11, a12, a21, a22, a, b]
///   harmonic:   [xi1, xi2] per mode, in HarmonicModes order
using ParamVector = std::vector<double>;

/// Parametric warping mapping f(x, theta) with f(x, 0) = x. Evaluation is in
/// normalized coordinates; `normalization` maps world coordinates into the
/// model domain ([-1,1]^2 about the center for the rigid kinds, [0,1]^2 for
/// harmonic).
struct WarpModel {
  WarpKind kind = WarpKind::Similarity;
  AffineMap2 normalization = AffineMap2::identity();
  HarmonicModes harmonic;  // used when kind == Harmonic

  static WarpModel similarity(const GridSpec& spec) {
    return {WarpKind::Similarity, spec.centered_unit_map(), {}};
  }
  static WarpModel affine(const GridSpec& spec) {
    return {WarpKind::Affine, spec.centered_unit_map(), {}};
  }
  static WarpModel harmonic_warp(const GridSpec& spec, HarmonicModes modes) {
    return {WarpKind::Harmonic, spec.unit_square_map(), std::move(modes)};
  }

  int param_count() const {
    switch (kind) {
      case WarpKind::Similarity: return 4;
      case WarpKind::Affine: return 6;
      case WarpKind::Harmonic: return 2 * harmonic.count();
    }
    return 0;
  }

  void check_params(const ParamVector& theta) const {
    if (static_cast<int>(theta.size()) != param_count())
      throw Error(ErrorCode::DimensionMismatch,
                  std::string("expected ") + std::to_string(param_count()) +
                      " parameters for " + warp_kind_name(kind) + ", got " +
                      std::to_string(theta.size()));
  }

  /// Normalized-coordinate warp u -> f(u, theta).
  Vec2 apply_normalized(const ParamVector& theta, const Vec2& u) const {
    switch (kind) {
      case WarpKind::Similarity: {
        const double el = std::exp(theta[0]) * std::cos(theta[1]);
        const double s = std::sin(theta[1]);
        return {el * u.x + s * u.y + theta[2], -s * u.x + el * u.y + theta[3]};
      }
      case WarpKind::Affine:
        return {(1 + theta[0]) * u.x + theta[1] * u.y + theta[4],
                theta[2] * u.x + (1 + theta[3]) * u.y + theta[5]};
      case WarpKind::Harmonic: {
        Vec2 out = u;
        for (int k = 0; k < harmonic.count(); ++k) {
          const auto [m, n] = harmonic.modes[static_cast<size_t>(k)];
          out.x += theta[static_cast<size_t>(2 * k)] * harmonic_e1(m, n, u);
          out.y += theta[static_cast<size_t>(2 * k + 1)] * harmonic_e2(m, n, u);
        }
        return out;
      }
    }
    return u;
  }

  /// Inverse of the one-shot normalized warp; rigid kinds only.
  Vec2 invert_normalized(const ParamVector& theta, const Vec2& v) const {
    Mat2 a;
    Vec2 t;
    if (kind == WarpKind::Similarity) {
      const double el = std::exp(theta[0]) * std::cos(theta[1]);
      const double s = std::sin(theta[1]);
      a = {el, s, -s, el};
      t = {theta[2], theta[3]};
    } else if (kind == WarpKind::Affine) {
      a = {1 + theta[0], theta[1], theta[2], 1 + theta[3]};
      t = {theta[4], theta[5]};
    } else {
      throw Error(ErrorCode::KindMismatch, "harmonic warp has no closed-form inverse");
    }
    if (std::abs(a.det()) < 1e-12)
      throw Error(ErrorCode::StepTooLarge, "warp is numerically singular");
    return a.inverse().apply(v - t);
  }
};

/// World-coordinate warp: x -> N^-1(f(N(x), theta)).
inline Vec2 apply_warp(const WarpModel& model, const ParamVector& theta, const Vec2& x) {
  model.check_params(theta);
  if (theta == ParamVector(theta.size(), 0.0)) return x;  // identity, bit-exact
  const Vec2 u = model.normalization.apply(x);
  return model.normalization.inverse().apply(model.apply_normalized(theta, u));
}

struct WarpVelocity {
  ParamVector dtheta_dt;
};

/// One-shot mask/field deformation by inverse resampling (rigid kinds). The
/// result is reinitialized since scaling breaks the unit-gradient property.
inline LevelSetField warp_field_rigid(const WarpModel& model, const ParamVector& theta,
                                      const LevelSetField& field) {
  model.check_params(theta);
  if (model.kind == WarpKind::Harmonic)
    throw Error(ErrorCode::KindMismatch, "use simulate_iterated_warp for harmonic warps");
  const GridSpec& spec = field.spec();
  LevelSetField out(spec);
  const AffineMap2 norm = model.normalization;
  const AffineMap2 denorm = norm.inverse();
  for (int j = 0; j < spec.height; ++j) {
    for (int i = 0; i < spec.width; ++i) {
      const Vec2 x = spec.cell_center(i, j);
      const Vec2 src = denorm.apply(model.invert_normalized(theta, norm.apply(x)));
      out.values.at(i, j) = sample_bilinear(field.values, spec.to_grid(src));
    }
  }
  out.time = field.time;
  return reinitialize_full(out);
}

struct IteratedWarpOptions {
  int reinit_every = 1;
  ReinitOptions reinit;
};

/// Forward shape synthesis by repeated small warps: at every step the field is
/// resampled through the inverse of the per-step map (exact for the rigid
/// kinds, first-order x - d(x) lookup for harmonic where no closed inverse
/// exists). Per-step point displacement must stay below one cell.
inline LevelSetField simulate_iterated_warp(const WarpModel& model,
                                            const WarpVelocity& velocity,
                                            const LevelSetField& field, int steps,
                                            double dt,
                                            const IteratedWarpOptions& opt = {}) {
  model.check_params(velocity.dtheta_dt);
  const GridSpec& spec = field.spec();
  ParamVector step_theta(velocity.dtheta_dt.size());
  for (size_t k = 0; k < step_theta.size(); ++k) step_theta[k] = velocity.dtheta_dt[k] * dt;

  // CFL-style precondition on the per-step displacement, measured where it
  // matters: the interface band. Far-field cells hold slowly varying
  // distances and resample accurately under larger motions.
  const double band = 7.5 * spec.spacing;
  double max_disp = 0.0;
  for (int j = 0; j < spec.height; ++j) {
    for (int i = 0; i < spec.width; ++i) {
      if (std::abs(field.values.at(i, j)) > band) continue;
      const Vec2 x = spec.cell_center(i, j);
      max_disp = std::max(max_disp, (apply_warp(model, step_theta, x) - x).norm());
    }
  }
  if (max_disp >= spec.spacing)
    throw Error(ErrorCode::StepTooLarge,
                "per-step band displacement " + std::to_string(max_disp) +
                    " exceeds one cell; reduce dt or velocity");

  const AffineMap2 norm = model.normalization;
  const AffineMap2 denorm = norm.inverse();
  LevelSetField cur = field;
  ScalarGrid next(spec, 0.0);
  for (int s = 0; s < steps; ++s) {
    for (int j = 0; j < spec.height; ++j) {
      for (int i = 0; i < spec.width; ++i) {
        const Vec2 x = spec.cell_center(i, j);
        Vec2 src;
        if (model.kind == WarpKind::Harmonic) {
          const Vec2 fwd = denorm.apply(model.apply_normalized(step_theta, norm.apply(x)));
          src = x - (fwd - x);
        } else {
          src = denorm.apply(model.invert_normalized(step_theta, norm.apply(x)));
        }
        next.at(i, j) = sample_bilinear(cur.values, spec.to_grid(src));
      }
    }
    std::swap(cur.values, next);
    cur.time += dt;
    if ((s + 1) % opt.reinit_every == 0) cur = reinitialize(cur, opt.reinit);
  }
  // Slope drift from repeated resampling is capped by the reinitialization
  // consistency band, so the per-step passes are sufficient.
  return cur;
}

/// Table-style uniform parameter draws:
///   similarity on [-1,1]^2: omega ~ U(-pi/4, pi/4), lambda ~ U(-0.9, 1.1),
///                           a, b ~ U(-0.1, 0.1)
///   harmonic on [0,1]^2:    xi ~ U(-0.125, 0.125) per coefficient
///   affine (no published row): linear part ~ U(-0.4, 0.4),
///                              translation ~ U(-0.1, 0.1)
inline ParamVector random_params(const WarpModel& model, std::uint64_t seed) {
  Rng rng(seed);
  ParamVector theta(static_cast<size_t>(model.param_count()), 0.0);
  switch (model.kind) {
    case WarpKind::Similarity:
      theta[0] = rng.uniform(-0.9, 1.1);
      theta[1] = rng.uniform(-kPi / 4, kPi / 4);
      theta[2] = rng.uniform(-0.1, 0.1);
      theta[3] = rng.uniform(-0.1, 0.1);
      break;
    case WarpKind::Affine:
      for (int k = 0; k < 4; ++k) theta[static_cast<size_t>(k)] = rng.uniform(-0.4, 0.4);
      theta[4] = rng.uniform(-0.1, 0.1);
      theta[5] = rng.uniform(-0.1, 0.1);
      break;
    case WarpKind::Harmonic:
      for (double& v : theta) v = rng.uniform(-0.125, 0.125);
      break;
  }
  return theta;
}

}  // namespace pvse
