#pragma once

#include <string>
#include <vector>

#include "pvse/warp.hpp"

namespace pvse {

enum class BasisKind { Similarity, Affine, Vibration, Composite };

inline const char* basis_kind_name(BasisKind k) {
  switch (k) {
    case BasisKind::Similarity: return "similarity";
    case BasisKind::Affine: return "affine";
    case BasisKind::Vibration: return "vibration";
    case BasisKind::Composite: return "composite";
  }
  return "?";
}

/// Matrix-valued prior variation basis [V^theta]: the theta-Jacobian of the
/// matching warp at theta = 0. Columns are evaluated in normalized
/// coordinates; eval_world() maps them back to world-space velocity
/// directions, absorbing the chain-rule factor of the normalization, so the
/// solver steps are grid-consistent.
struct PriorVariationBasis {
  BasisKind kind = BasisKind::Similarity;
  AffineMap2 normalization = AffineMap2::identity();
  HarmonicModes modes;                      // vibration only
  std::vector<PriorVariationBasis> parts;   // composite only

  static PriorVariationBasis similarity(const AffineMap2& norm) {
    return {BasisKind::Similarity, norm, {}, {}};
  }
  static PriorVariationBasis similarity(const GridSpec& spec) {
    return similarity(spec.centered_unit_map());
  }
  static PriorVariationBasis affine(const AffineMap2& norm) {
    return {BasisKind::Affine, norm, {}, {}};
  }
  static PriorVariationBasis affine(const GridSpec& spec) {
    return affine(spec.centered_unit_map());
  }
  static PriorVariationBasis vibration(const AffineMap2& norm, HarmonicModes m) {
    return {BasisKind::Vibration, norm, std::move(m), {}};
  }
  static PriorVariationBasis vibration(const GridSpec& spec, HarmonicModes m) {
    return vibration(spec.unit_square_map(), std::move(m));
  }
  static PriorVariationBasis composite(std::vector<PriorVariationBasis> ps) {
    PriorVariationBasis b;
    b.kind = BasisKind::Composite;
    b.parts = std::move(ps);
    return b;
  }

  int count() const {
    switch (kind) {
      case BasisKind::Similarity: return 4;
      case BasisKind::Affine: return 6;
      case BasisKind::Vibration: return 2 * modes.count();
      case BasisKind::Composite: {
        int n = 0;
        for (const auto& p : parts) n += p.count();
        return n;
      }
    }
    return 0;
  }

  /// V^{theta_k} at a normalized point. Not defined for composite bases,
  /// whose parts normalize independently.
  Vec2 eval_normalized(int k, const Vec2& u) const {
    switch (kind) {
      case BasisKind::Similarity:
        switch (k) {
          case 0: return {u.x, u.y};    // lambda
          case 1: return {u.y, -u.x};   // omega
          case 2: return {1.0, 0.0};    // a
          case 3: return {0.0, 1.0};    // b
        }
        break;
      case BasisKind::Affine:
        switch (k) {
          case 0: return {u.x, 0.0};
          case 1: return {u.y, 0.0};
          case 2: return {0.0, u.x};
          case 3: return {0.0, u.y};
          case 4: return {1.0, 0.0};
          case 5: return {0.0, 1.0};
        }
        break;
      case BasisKind::Vibration: {
        const auto [m, n] = modes.modes[static_cast<size_t>(k / 2)];
        if (k % 2 == 0) return {harmonic_e1(m, n, u), 0.0};
        return {0.0, harmonic_e2(m, n, u)};
      }
      case BasisKind::Composite:
        throw Error(ErrorCode::KindMismatch, "composite basis has no single normalization");
    }
    throw Error(ErrorCode::DimensionMismatch, "basis vector index out of range");
  }

  /// World-space velocity direction of basis vector k at world point x.
  Vec2 eval_world(int k, const Vec2& x) const {
    if (kind == BasisKind::Composite) {
      for (const auto& p : parts) {
        if (k < p.count()) return p.eval_world(k, x);
        k -= p.count();
      }
      throw Error(ErrorCode::DimensionMismatch, "basis vector index out of range");
    }
    const Vec2 u = normalization.apply(x);
    return normalization.linear.inverse().apply(eval_normalized(k, u));
  }
};

/// Per-vector sup of the infinity-norm of the 2x2x2 second-derivative tensor
/// over a normalized-domain sample lattice, against the analytic budget
/// (0 for the rigid families, 4 per harmonic mode).
struct SecondDerivativeReport {
  std::vector<double> per_vector;
  double total = 0.0;
  double bound = 0.0;
};

namespace detail {

/// Infinity-norm (max absolute row sum) of the Hessian of one displacement
/// component of a vibration vector, from the hand-differentiated closed form.
inline double vibration_hessian_inf_norm(int m, int n, bool first_component,
                                         const Vec2& u) {
  const double c = 1.0 / (kPi * kPi * (n * n + m * m));
  double hxx, hxy, hyy;
  if (first_component) {
    const double sc = std::sin(kPi * n * u.x) * std::cos(kPi * m * u.y);
    const double cs = std::cos(kPi * n * u.x) * std::sin(kPi * m * u.y);
    hxx = -kPi * kPi * n * n * c * sc;
    hxy = -kPi * kPi * n * m * c * cs;
    hyy = -kPi * kPi * m * m * c * sc;
  } else {
    const double cs = std::cos(kPi * m * u.x) * std::sin(kPi * n * u.y);
    const double sc = std::sin(kPi * m * u.x) * std::cos(kPi * n * u.y);
    hxx = -kPi * kPi * m * m * c * cs;
    hxy = -kPi * kPi * m * n * c * sc;
    hyy = -kPi * kPi * n * n * c * cs;
  }
  return std::max(std::abs(hxx) + std::abs(hxy), std::abs(hxy) + std::abs(hyy));
}

}  // namespace detail

inline SecondDerivativeReport second_derivative_norms(const PriorVariationBasis& basis,
                                                      int sample_density = 64) {
  if (sample_density < 16)
    throw Error(ErrorCode::ConfigError, "sample_density must be at least 16 per unit");
  SecondDerivativeReport rep;
  switch (basis.kind) {
    case BasisKind::Similarity:
    case BasisKind::Affine:
      // Linear in position: second derivatives vanish identically.
      rep.per_vector.assign(static_cast<size_t>(basis.count()), 0.0);
      rep.total = 0.0;
      rep.bound = 0.0;
      return rep;
    case BasisKind::Vibration: {
      rep.per_vector.assign(static_cast<size_t>(basis.count()), 0.0);
      for (int k = 0; k < basis.count(); ++k) {
        const auto [m, n] = basis.modes.modes[static_cast<size_t>(k / 2)];
        double sup = 0.0;
        for (int j = 0; j <= sample_density; ++j) {
          for (int i = 0; i <= sample_density; ++i) {
            const Vec2 u{static_cast<double>(i) / sample_density,
                         static_cast<double>(j) / sample_density};
            sup = std::max(sup, detail::vibration_hessian_inf_norm(m, n, k % 2 == 0, u));
          }
        }
        rep.per_vector[static_cast<size_t>(k)] = sup;
        rep.total += sup;
      }
      rep.bound = 4.0 * basis.modes.count();
      return rep;
    }
    case BasisKind::Composite: {
      for (const auto& p : basis.parts) {
        const SecondDerivativeReport sub = second_derivative_norms(p, sample_density);
        rep.per_vector.insert(rep.per_vector.end(), sub.per_vector.begin(),
                              sub.per_vector.end());
        rep.total += sub.total;
        rep.bound += sub.bound;
      }
      return rep;
    }
  }
  return rep;
}

/// Max deviation between eval_world and central finite differences of
/// apply_warp in theta at theta = 0. This is the basis/warp consistency
/// contract (the basis must be the warp's theta-Jacobian).
inline double verify_jacobian_consistency(const PriorVariationBasis& basis,
                                          const WarpModel& model, int samples,
                                          std::uint64_t rng_seed) {
  const bool match = (basis.kind == BasisKind::Similarity && model.kind == WarpKind::Similarity) ||
                     (basis.kind == BasisKind::Affine && model.kind == WarpKind::Affine) ||
                     (basis.kind == BasisKind::Vibration && model.kind == WarpKind::Harmonic &&
                      basis.modes.modes == model.harmonic.modes);
  if (!match)
    throw Error(ErrorCode::KindMismatch,
                std::string(basis_kind_name(basis.kind)) + " basis vs " +
                    warp_kind_name(model.kind) + " warp");
  const int n = model.param_count();
  const double step = 1e-5;
  const AffineMap2 denorm = model.normalization.inverse();
  Rng rng(rng_seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec2 u = model.kind == WarpKind::Harmonic
                       ? Vec2{rng.next_double(), rng.next_double()}
                       : Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec2 x = denorm.apply(u);
    for (int k = 0; k < n; ++k) {
      ParamVector plus(static_cast<size_t>(n), 0.0), minus(static_cast<size_t>(n), 0.0);
      plus[static_cast<size_t>(k)] = step;
      minus[static_cast<size_t>(k)] = -step;
      const Vec2 fd = (apply_warp(model, plus, x) - apply_warp(model, minus, x)) / (2 * step);
      const Vec2 an = basis.eval_world(k, x);
      worst = std::max({worst, std::abs(fd.x - an.x), std::abs(fd.y - an.y)});
    }
  }
  return worst;
}

}  // namespace pvse
