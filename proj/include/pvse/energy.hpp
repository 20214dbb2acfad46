#pragma once

#include <algorithm>
#include <vector>

#include "pvse/level_set.hpp"

namespace pvse {

enum class EnergyKind { ChanVese, Gac };

/// Active contour energy configuration.
///
/// Chan-Vese (region energy):
///   J = mu * Length + nu * Area_inside
///       + lambda1 * int_inside (u0 - c1)^2 + lambda2 * int_outside (u0 - c2)^2
/// with c1/c2 the inside/outside means of the feature image u0.
///
/// GAC (edge energy):  J = contour integral of the edge indicator g.
struct EnergyModel {
  EnergyKind kind = EnergyKind::ChanVese;

  // Chan-Vese
  ScalarGrid u0;
  double mu = 0.1 * 255.0 * 255.0;  // scaled to 8-bit dynamic range
  double nu = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  // GAC: positive edge indicator and its central-difference gradient.
  ScalarGrid g;
  Grid<Vec2> grad_g;

  static EnergyModel chan_vese(ScalarGrid feature, double mu_ = 0.1 * 255.0 * 255.0,
                               double nu_ = 0.0, double l1 = 1.0, double l2 = 1.0) {
    if (l1 < 0 || l2 < 0 || mu_ < 0 || nu_ < 0)
      throw Error(ErrorCode::ConfigError, "penalty coefficients must be non-negative");
    EnergyModel m;
    m.kind = EnergyKind::ChanVese;
    m.u0 = std::move(feature);
    m.mu = mu_;
    m.nu = nu_;
    m.lambda1 = l1;
    m.lambda2 = l2;
    return m;
  }

  static EnergyModel gac(ScalarGrid indicator) {
    EnergyModel m;
    m.kind = EnergyKind::Gac;
    for (double v : indicator.data())
      if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, "edge indicator must be positive");
    const GridSpec& spec = indicator.spec();
    m.grad_g = Grid<Vec2>(spec);
    const double h = spec.spacing;
    for (int j = 0; j < spec.height; ++j)
      for (int i = 0; i < spec.width; ++i)
        m.grad_g.at(i, j) = {
            (indicator.at_clamped(i + 1, j) - indicator.at_clamped(i - 1, j)) / (2 * h),
            (indicator.at_clamped(i, j + 1) - indicator.at_clamped(i, j - 1)) / (2 * h)};
    m.g = std::move(indicator);
    return m;
  }

  const GridSpec& spec() const { return kind == EnergyKind::ChanVese ? u0.spec() : g.spec(); }
};

/// Separable Gaussian blur with edge replication.
inline ScalarGrid gaussian_blur(const ScalarGrid& src, double sigma_cells) {
  const GridSpec& spec = src.spec();
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_cells)));
  std::vector<double> w(static_cast<size_t>(radius) + 1);
  double norm = 0.0;
  for (int k = 0; k <= radius; ++k) {
    w[static_cast<size_t>(k)] = std::exp(-0.5 * (k * k) / (sigma_cells * sigma_cells));
    norm += (k == 0 ? 1.0 : 2.0) * w[static_cast<size_t>(k)];
  }
  for (double& v : w) v /= norm;

  ScalarGrid tmp(spec, 0.0), out(spec, 0.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      double acc = w[0] * src.at(i, j);
      for (int k = 1; k <= radius; ++k)
        acc += w[static_cast<size_t>(k)] * (src.at_clamped(i - k, j) + src.at_clamped(i + k, j));
      tmp.at(i, j) = acc;
    }
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      double acc = w[0] * tmp.at(i, j);
      for (int k = 1; k <= radius; ++k)
        acc += w[static_cast<size_t>(k)] * (tmp.at_clamped(i, j - k) + tmp.at_clamped(i, j + k));
      out.at(i, j) = acc;
    }
  return out;
}

/// g = 1 / (1 + (|grad(G_sigma * I)| / beta)^2). beta defaults to the 90th
/// percentile of the smoothed gradient magnitude so the indicator adapts to
/// the image contrast.
inline ScalarGrid edge_indicator(const ScalarGrid& image, double sigma_cells = 1.5,
                                 double beta = 0.0) {
  const GridSpec& spec = image.spec();
  const ScalarGrid smooth = gaussian_blur(image, sigma_cells);
  ScalarGrid mag(spec, 0.0);
  const double h = spec.spacing;
  std::vector<double> all;
  all.reserve(static_cast<size_t>(spec.cell_count()));
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const double gx = (smooth.at_clamped(i + 1, j) - smooth.at_clamped(i - 1, j)) / (2 * h);
      const double gy = (smooth.at_clamped(i, j + 1) - smooth.at_clamped(i, j - 1)) / (2 * h);
      mag.at(i, j) = std::hypot(gx, gy);
      all.push_back(mag.at(i, j));
    }
  if (beta <= 0.0) {
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    beta = sorted[static_cast<size_t>(0.9 * (sorted.size() - 1))];
    if (beta <= 0.0) beta = 1.0;
  }
  ScalarGrid g(spec, 1.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const double r = mag.at(i, j) / beta;
      g.at(i, j) = 1.0 / (1.0 + r * r);
    }
  return g;
}

/// Means of the feature image over the two sides of the contour.
/// c1 is the inside (phi < 0) mean, c2 the outside mean, both under the
/// smoothed-region weighting.
struct RegionMeans {
  double c1 = 0.0;
  double c2 = 0.0;
};

inline RegionMeans region_means(const EnergyModel& model, const LevelSetField& field) {
  if (model.kind != EnergyKind::ChanVese)
    throw Error(ErrorCode::KindMismatch, "region_means requires a Chan-Vese model");
  if (!(model.u0.spec() == field.spec()))
    throw Error(ErrorCode::DimensionMismatch, "feature image grid mismatch");
  const SmoothKernels ker = SmoothKernels::for_spacing(field.spacing());
  double min_mass = 1e-6;
  double mass_in = 0.0, mass_out = 0.0, sum_in = 0.0, sum_out = 0.0;
  const GridSpec& spec = field.spec();
  const double area = spec.spacing * spec.spacing;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const double hv = ker.heaviside(field.values.at(i, j));
      const double u = model.u0.at(i, j);
      mass_out += hv * area;
      mass_in += (1.0 - hv) * area;
      sum_out += u * hv * area;
      sum_in += u * (1.0 - hv) * area;
    }
  if (mass_in <= min_mass || mass_out <= min_mass)
    throw Error(ErrorCode::DegenerateRegion, "one side of the contour has vanishing mass");
  return {sum_in / mass_in, sum_out / mass_out};
}

/// Scalar normal-speed field F such that C_t = F * N (outward N) is the
/// energy-DECREASING motion; the functional gradient is grad J = -F * N.
struct GradientField {
  ScalarGrid speed;
  GradientField negated() const {
    GradientField g = *this;
    for (double& v : g.speed.data()) v = -v;
    return g;
  }
};

/// Chan-Vese descent speed:
///   F = -mu*kappa - nu + lambda2 (u0 - c2)^2 - lambda1 (u0 - c1)^2.
/// Positive F moves the contour outward (toward phi > 0). Signs are pinned by
/// the directional-derivative tests against energy_value, not by convention.
inline GradientField gradient_chan_vese(const EnergyModel& model, const LevelSetField& field,
                                        const CurveGeometry& geo) {
  const RegionMeans rm = region_means(model, field);
  const GridSpec& spec = field.spec();
  GradientField out{ScalarGrid(spec, 0.0)};
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const double u = model.u0.at(i, j);
      const double d1 = u - rm.c1, d2 = u - rm.c2;
      out.speed.at(i, j) = -model.mu * geo.curvature.at(i, j) - model.nu +
                           model.lambda2 * d2 * d2 - model.lambda1 * d1 * d1;
    }
  return out;
}

/// GAC descent speed: F = -g*kappa - <grad g, N>.
inline GradientField gradient_gac(const EnergyModel& model, const LevelSetField& field,
                                  const CurveGeometry& geo) {
  if (model.kind != EnergyKind::Gac)
    throw Error(ErrorCode::KindMismatch, "gradient_gac requires a GAC model");
  const GridSpec& spec = field.spec();
  GradientField out{ScalarGrid(spec, 0.0)};
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const Vec2 n = geo.normal.at(i, j);
      out.speed.at(i, j) = -model.g.at(i, j) * geo.curvature.at(i, j) -
                           model.grad_g.at(i, j).dot(n);
    }
  return out;
}

/// Discrete energy value; used for monotonicity and step-acceptance checks.
inline double energy_value(const EnergyModel& model, const LevelSetField& field) {
  const GridSpec& spec = field.spec();
  const double h = spec.spacing;
  const double area = h * h;
  const SmoothKernels ker = SmoothKernels::for_spacing(h);
  const ScalarGrid& phi = field.values;

  auto grad_norm = [&](int i, int j) {
    const double gx = (phi.at_clamped(i + 1, j) - phi.at_clamped(i - 1, j)) / (2 * h);
    const double gy = (phi.at_clamped(i, j + 1) - phi.at_clamped(i, j - 1)) / (2 * h);
    return std::hypot(gx, gy);
  };

  if (model.kind == EnergyKind::Gac) {
    double e = 0.0;
    for (int j = 0; j < spec.height; ++j)
      for (int i = 0; i < spec.width; ++i)
        e += model.g.at(i, j) * ker.delta(phi.at(i, j)) * grad_norm(i, j) * area;
    return e;
  }

  const RegionMeans rm = region_means(model, field);
  double e = 0.0;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const double p = phi.at(i, j);
      const double hv = ker.heaviside(p);
      const double u = model.u0.at(i, j);
      const double d1 = u - rm.c1, d2 = u - rm.c2;
      e += model.mu * ker.delta(p) * grad_norm(i, j) * area;
      e += model.nu * (1.0 - hv) * area;
      e += model.lambda1 * d1 * d1 * (1.0 - hv) * area;
      e += model.lambda2 * d2 * d2 * hv * area;
    }
  return e;
}

}  // namespace pvse
