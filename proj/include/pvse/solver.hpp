#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pvse/energy.hpp"
#include "pvse/variations.hpp"

namespace pvse {

enum class VelocityNormalization { None, UnitTheta, UnitSpeed };

struct SolverConfig {
  double dt = 1.0;
  int max_iterations = 500;
  int convergence_window = 20;
  double convergence_threshold = 1e-3;  // mean normal speed, cells/iteration
  int reinit_period = 1;                // reinitialize every k iterations
  VelocityNormalization velocity_normalization = VelocityNormalization::UnitSpeed;
  double target_step_cells = 0.45;      // per-iteration interface displacement cap
  ReinitOptions reinit;

  void validate() const {
    if (dt <= 0.0) throw Error(ErrorCode::ConfigError, "dt must be positive");
    if (convergence_window < 1)
      throw Error(ErrorCode::ConfigError, "convergence_window must be at least 1");
    if (reinit_period < 1)
      throw Error(ErrorCode::ConfigError, "reinit_period must be at least 1");
  }
};

enum class SolverStatus { Converged, MaxIterations, Error };

struct TraceRow {
  int iteration = 0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double dtheta_norm = 0.0;              // L2 norm of the applied dtheta/dt
  double max_speed_cells = 0.0;          // max normal displacement on the band
  double directional_derivative = 0.0;   // sum_i <grad J, V_i> dtheta_i/dt
  double reinit_energy_delta = 0.0;      // energy change caused by reinitialization
  std::vector<double> theta_total;       // accumulated parameter displacement
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  SolverStatus status = SolverStatus::MaxIterations;
};

/// Basis columns evaluated once per cell; [V^theta] depends only on position,
/// so it is constant for the whole run.
struct BasisFieldCache {
  std::vector<Grid<Vec2>> columns;

  BasisFieldCache(const PriorVariationBasis& basis, const GridSpec& spec) {
    const int n = basis.count();
    columns.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      Grid<Vec2> col(spec);
      for (int j = 0; j < spec.height; ++j)
        for (int i = 0; i < spec.width; ++i)
          col.at(i, j) = basis.eval_world(k, spec.cell_center(i, j));
      columns.push_back(std::move(col));
    }
  }
  int count() const { return static_cast<int>(columns.size()); }
};

/// Gradient-descent velocity for the warp parameters (the calculus of prior
/// variations): dtheta_i/dt = -<V^{theta_i}, grad J>, discretized as the
/// co-area band integral
///   dtheta_i/dt = -sum_cells (V_i . N) F delta_eps(phi) |grad phi| h^2,
/// where grad J = F N. Degenerate-gradient cells are excluded.
inline WarpVelocity project_gradient(const LevelSetField& field, const CurveGeometry& geo,
                                     const BasisFieldCache& basis_fields,
                                     const GradientField& gradient) {
  const GridSpec& spec = field.spec();
  const SmoothKernels ker = SmoothKernels::for_spacing(spec.spacing);
  const double area = spec.spacing * spec.spacing;
  const int n = basis_fields.count();
  WarpVelocity vel{ParamVector(static_cast<size_t>(n), 0.0)};

  bool any_band = false;
  for (int j = 0; j < spec.height; ++j) {
    for (int i = 0; i < spec.width; ++i) {
      if (geo.degenerate.at(i, j)) continue;
      const double dl = ker.delta(field.values.at(i, j));
      if (dl <= 1e-12) continue;
      any_band = true;
      const double w = gradient.speed.at(i, j) * dl * geo.grad_norm.at(i, j) * area;
      const Vec2 nrm = geo.normal.at(i, j);
      for (int k = 0; k < n; ++k) {
        const Vec2 v = basis_fields.columns[static_cast<size_t>(k)].at(i, j);
        vel.dtheta_dt[static_cast<size_t>(k)] -= v.dot(nrm) * w;
      }
    }
  }
  if (!any_band) throw Error(ErrorCode::EmptyBand, "no cells under the Dirac band");
  return vel;
}

inline WarpVelocity project_gradient(const LevelSetField& field,
                                     const PriorVariationBasis& basis,
                                     const GradientField& gradient) {
  const BasisFieldCache cache(basis, field.spec());
  return project_gradient(field, geometry(field), cache, gradient);
}

struct StepStats {
  double max_speed_cells = 0.0;
};

namespace detail {

/// Max per-cell displacement (world units) of [V] v dt over the active band.
inline double max_band_displacement(const LevelSetField& field,
                                    const BasisFieldCache& basis_fields,
                                    const ParamVector& v, double dt) {
  const GridSpec& spec = field.spec();
  const SmoothKernels ker = SmoothKernels::for_spacing(spec.spacing);
  const double band_limit = 5.0 * ker.epsilon;  // window support of pvse_step
  double worst = 0.0;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      if (std::abs(field.values.at(i, j)) > band_limit) continue;
      Vec2 p{0, 0};
      for (int k = 0; k < basis_fields.count(); ++k)
        p += basis_fields.columns[static_cast<size_t>(k)].at(i, j) * v[static_cast<size_t>(k)];
      worst = std::max(worst, p.norm() * dt);
    }
  return worst;
}

}  // namespace detail

/// One explicit level-set update (Algorithm step): on the interface band,
///   phi <- phi - dt <P, grad phi> w(phi),   P = [V] dtheta/dt,
/// where w is the unit-plateau band window, so the zero level set moves at
/// exactly the composite speed. Guards against steps over 0.9 cells.
inline LevelSetField pvse_step(const LevelSetField& field, const BasisFieldCache& basis_fields,
                               const WarpVelocity& velocity, double dt,
                               StepStats* stats = nullptr) {
  const GridSpec& spec = field.spec();
  const double h = spec.spacing;
  const SmoothKernels ker = SmoothKernels::for_spacing(h);
  if (static_cast<int>(velocity.dtheta_dt.size()) != basis_fields.count())
    throw Error(ErrorCode::DimensionMismatch, "velocity length does not match basis");

  const double max_disp =
      detail::max_band_displacement(field, basis_fields, velocity.dtheta_dt, dt);
  if (max_disp >= 0.9 * h)
    throw Error(ErrorCode::StepTooLarge,
                "band displacement " + std::to_string(max_disp / h) +
                    " cells per step; reduce dt");

  LevelSetField out = field;
  double max_speed = 0.0;
  for (int j = 0; j < spec.height; ++j) {
    for (int i = 0; i < spec.width; ++i) {
      const double p = field.values.at(i, j);
      const double w = ker.band_window(p);
      if (w <= 1e-6) continue;
      Vec2 pv{0, 0};
      for (int k = 0; k < basis_fields.count(); ++k)
        pv += basis_fields.columns[static_cast<size_t>(k)].at(i, j) *
              velocity.dtheta_dt[static_cast<size_t>(k)];
      // Upwind ENO2 transport; central differences round off corners.
      const auto d = detail::eno2(field.values, i, j);
      const double gx = pv.x > 0.0 ? d.minus_x : d.plus_x;
      const double gy = pv.y > 0.0 ? d.minus_y : d.plus_y;
      const double upd = dt * (pv.x * gx + pv.y * gy) * w;
      out.values.at(i, j) = p - upd;
      const double gn = std::hypot(gx, gy);
      if (gn > 0.25 && std::abs(p) < 2.0 * ker.epsilon)
        max_speed = std::max(max_speed, std::abs(upd) / (gn * h));
    }
  }
  out.time = field.time + dt;
  if (stats) stats->max_speed_cells = max_speed;
  return out;
}

inline LevelSetField pvse_step(const LevelSetField& field, const PriorVariationBasis& basis,
                               const WarpVelocity& velocity, double dt,
                               StepStats* stats = nullptr) {
  const BasisFieldCache cache(basis, field.spec());
  return pvse_step(field, cache, velocity, dt, stats);
}

using SnapshotSink = std::function<void(int iteration, const LevelSetField&)>;

/// Forward PVSE with a prescribed parameter velocity (no energy involved).
/// The sink, when set, receives the field after every step.
inline std::pair<LevelSetField, SolverTrace> evolve_forward(
    const LevelSetField& field, const PriorVariationBasis& basis,
    const WarpVelocity& velocity, int steps, const SolverConfig& config = {},
    const SnapshotSink& sink = {}) {
  config.validate();
  field.require_interface("evolve_forward");
  const BasisFieldCache cache(basis, field.spec());
  LevelSetField cur = field;
  SolverTrace trace;
  ParamVector theta_total(velocity.dtheta_dt.size(), 0.0);

  for (int it = 0; it < steps; ++it) {
    StepStats st;
    cur = pvse_step(cur, cache, velocity, config.dt, &st);
    if ((it + 1) % config.reinit_period == 0) cur = reinitialize(cur, config.reinit);
    for (size_t k = 0; k < theta_total.size(); ++k)
      theta_total[k] += velocity.dtheta_dt[k] * config.dt;

    TraceRow row;
    row.iteration = it;
    double nn = 0.0;
    for (double v : velocity.dtheta_dt) nn += v * v;
    row.dtheta_norm = std::sqrt(nn);
    row.max_speed_cells = st.max_speed_cells;
    row.theta_total = theta_total;
    trace.rows.push_back(std::move(row));
    if (sink) sink(it, cur);
  }
  trace.status = SolverStatus::MaxIterations;
  return {cur, trace};
}

/// Energy-minimizing PVSE: iterate reinitialize -> functional gradient ->
/// projection onto the prior variations -> band-limited level set update.
///
/// Step size policy: the projected velocity is rescaled to a target interface
/// displacement (UnitSpeed mode) and the step is accepted only if the energy
/// does not increase; otherwise the step is halved and retried. Convergence
/// is the windowed mean of the interface speed falling under the threshold.
inline std::pair<LevelSetField, SolverTrace> minimize(const LevelSetField& field,
                                                      const PriorVariationBasis& basis,
                                                      const EnergyModel& energy,
                                                      const SolverConfig& config = {},
                                                      const SnapshotSink& sink = {}) {
  config.validate();
  field.require_interface("minimize");
  if (!(energy.spec() == field.spec()))
    throw Error(ErrorCode::DimensionMismatch, "energy and field grids differ");

  const BasisFieldCache cache(basis, field.spec());
  const double h = field.spacing();
  LevelSetField cur = field;
  SolverTrace trace;
  ParamVector theta_total(static_cast<size_t>(basis.count()), 0.0);

  auto eval_energy = [&](const LevelSetField& f) { return energy_value(energy, f); };

  double e_prev = eval_energy(cur);
  double scale = 1.0;
  std::vector<double> recent_energy{e_prev};

  for (int it = 0; it < config.max_iterations; ++it) {
    TraceRow row;
    row.iteration = it;

    if (it % config.reinit_period == 0) {
      cur = reinitialize(cur, config.reinit);
      const double e_re = eval_energy(cur);
      row.reinit_energy_delta = e_re - e_prev;
      e_prev = e_re;
    }

    const CurveGeometry geo = geometry(cur);
    GradientField grad_desc = energy.kind == EnergyKind::ChanVese
                                  ? gradient_chan_vese(energy, cur, geo)
                                  : gradient_gac(energy, cur, geo);
    // project_gradient consumes grad J = F N; the descent field is -grad J.
    const WarpVelocity raw = project_gradient(cur, geo, cache, grad_desc.negated());

    // Velocity normalization (direction preserved).
    double factor = 1.0;
    if (config.velocity_normalization == VelocityNormalization::UnitTheta) {
      double nn = 0.0;
      for (double v : raw.dtheta_dt) nn += v * v;
      factor = nn > 0.0 ? 1.0 / std::sqrt(nn) : 0.0;
    } else if (config.velocity_normalization == VelocityNormalization::UnitSpeed) {
      const double disp =
          detail::max_band_displacement(cur, cache, raw.dtheta_dt, config.dt);
      factor = disp > 0.0 ? config.target_step_cells * h / disp : 0.0;
    }
    factor *= scale;

    bool stepped = false;
    LevelSetField candidate = cur;
    double e_new = e_prev;
    StepStats st;
    for (int attempt = 0; attempt < 12 && factor > 0.0; ++attempt) {
      WarpVelocity v{raw.dtheta_dt};
      for (double& x : v.dtheta_dt) x *= factor;
      candidate = pvse_step(cur, cache, v, config.dt, &st);
      e_new = eval_energy(candidate);
      if (e_new <= e_prev + 1e-9 * (1.0 + std::abs(e_prev))) {
        stepped = true;
        row.dtheta_norm = 0.0;
        for (double x : v.dtheta_dt) row.dtheta_norm += x * x;
        row.dtheta_norm = std::sqrt(row.dtheta_norm);
        // Descent identity: <grad J, V_i> = -raw_i, applied dtheta_i = factor*raw_i.
        double dd = 0.0;
        for (double x : raw.dtheta_dt) dd += (-x) * (factor * x);
        row.directional_derivative = dd;
        for (size_t k = 0; k < theta_total.size(); ++k)
          theta_total[k] += v.dtheta_dt[k] * config.dt;
        break;
      }
      factor *= 0.5;
      scale *= 0.5;
    }

    if (stepped) {
      cur = std::move(candidate);
      e_prev = e_new;
      scale = std::min(1.0, scale * 1.25);
      row.max_speed_cells = st.max_speed_cells;
    } else {
      row.max_speed_cells = 0.0;  // stalled; counts toward convergence
    }
    row.energy = e_prev;
    row.theta_total = theta_total;
    trace.rows.push_back(std::move(row));
    if (sink) sink(it, cur);

    recent_energy.push_back(e_prev);
    if (recent_energy.size() > 51) recent_energy.erase(recent_energy.begin());
    if (recent_energy.size() >= 2 && e_prev > recent_energy.front() * 1.1 + 1e-9) {
      trace.status = SolverStatus::Error;
      throw Error(ErrorCode::Diverged, "energy grew more than 10% over a 50-iteration span");
    }

    if (static_cast<int>(trace.rows.size()) >= config.convergence_window) {
      double mean = 0.0;
      for (size_t k = trace.rows.size() - static_cast<size_t>(config.convergence_window);
           k < trace.rows.size(); ++k)
        mean += trace.rows[k].max_speed_cells;
      mean /= config.convergence_window;
      if (mean < config.convergence_threshold) {
        trace.status = SolverStatus::Converged;
        return {cur, trace};
      }
    }
  }
  trace.status = SolverStatus::MaxIterations;
  return {cur, trace};
}

struct Stage {
  PriorVariationBasis basis;
  EnergyModel energy;
  SolverConfig config;
};

/// Sequential minimize calls, each seeded by the previous result; traces are
/// concatenated with cumulative iteration numbering.
inline std::pair<LevelSetField, SolverTrace> staged_minimize(const LevelSetField& field,
                                                             const std::vector<Stage>& stages,
                                                             const SnapshotSink& sink = {}) {
  if (stages.empty()) throw Error(ErrorCode::EmptyList, "staged_minimize needs stages");
  LevelSetField cur = field;
  SolverTrace all;
  int offset = 0;
  for (const Stage& st : stages) {
    auto [next, trace] = minimize(cur, st.basis, st.energy, st.config, sink);
    cur = std::move(next);
    for (TraceRow& row : trace.rows) {
      row.iteration += offset;
      all.rows.push_back(std::move(row));
    }
    offset = static_cast<int>(all.rows.size());
    all.status = trace.status;
  }
  return {cur, all};
}

}  // namespace pvse
