#pragma once

#include "pvse/common.hpp"

namespace pvse {

/// Compactly supported C^2 Heaviside/Dirac pair on [-eps, eps]:
///   H(t) = 1/2 (1 + t/eps + sin(pi t/eps)/pi),  delta = dH/dt,
/// with eps in world units (default 1.5 cells so the interface band spans
/// about three cells). Compact support keeps region masses and contour
/// integrals free of far-field leakage, which the globally supported arctan
/// pair cannot provide on small domains.
struct SmoothKernels {
  double epsilon = 1.5;

  explicit SmoothKernels(double eps = 1.5) : epsilon(eps) {}
  static SmoothKernels for_spacing(double spacing) { return SmoothKernels(1.5 * spacing); }

  double heaviside(double t) const {
    if (t <= -epsilon) return 0.0;
    if (t >= epsilon) return 1.0;
    const double u = t / epsilon;
    return 0.5 * (1.0 + u + std::sin(kPi * u) / kPi);
  }
  double delta(double t) const {
    if (t <= -epsilon || t >= epsilon) return 0.0;
    return 0.5 / epsilon * (1.0 + std::cos(kPi * t / epsilon));
  }
  /// Band window of the level set update: 1 on the interface plateau
  /// (|t| <= 2 eps) with a smooth taper to zero by 5 eps. The flat plateau
  /// keeps the zero crossing moving at exactly the requested normal speed;
  /// a bare delta would scale the speed by its local value.
  double band_window(double t) const {
    const double a = std::abs(t);
    if (a <= 2.0 * epsilon) return 1.0;
    if (a >= 5.0 * epsilon) return 0.0;
    const double s = (a - 2.0 * epsilon) / (3.0 * epsilon);
    const double c = std::cos(0.5 * kPi * s);
    return c * c;
  }
};

}  // namespace pvse
