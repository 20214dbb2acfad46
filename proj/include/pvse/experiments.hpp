#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pvse/metrics.hpp"
#include "pvse/parallel.hpp"
#include "pvse/serialize.hpp"
#include "pvse/stats.hpp"
#include "pvse/templates.hpp"

namespace pvse {

inline std::uint64_t mask_hash(const MaskGrid& m) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(static_cast<std::uint64_t>(m.spec().width));
  mix(static_cast<std::uint64_t>(m.spec().height));
  for (std::uint8_t v : m.data()) mix(v);
  return h;
}

enum class Corruption { None, Missing, Merged };

inline const char* corruption_name(Corruption c) {
  switch (c) {
    case Corruption::None: return "none";
    case Corruption::Missing: return "missing";
    case Corruption::Merged: return "merged";
  }
  return "?";
}

/// One synthetic benchmark case: the deformed template is the ground truth;
/// the corrupted mask is what the solver sees.
struct TestCase {
  int index = 0;
  std::uint64_t seed = 0;
  std::string deformation_kind;  // "similarity" | "harmonic"
  ParamVector deformation;
  Corruption corruption = Corruption::None;
  MaskGrid template_mask;
  MaskGrid truth_mask;
  MaskGrid corrupted_mask;
};

struct SuiteDesign {
  int n_rigid = 50;
  int n_nonrigid = 50;
  Corruption corruption = Corruption::Missing;
  int nonrigid_order = 3;   // harmonic modes with m + n <= order
  int warp_steps = 40;      // iterated-warp steps for non-rigid synthesis
};

namespace detail {

/// Erases a seeded rectangle covering 10-20% of the foreground.
inline MaskGrid corrupt_missing(const MaskGrid& truth, Rng& rng) {
  const GridSpec& spec = truth.spec();
  const int fg = count_foreground(truth);
  int lo_i = spec.width, hi_i = 0, lo_j = spec.height, hi_j = 0;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      if (truth.at(i, j)) {
        lo_i = std::min(lo_i, i);
        hi_i = std::max(hi_i, i);
        lo_j = std::min(lo_j, j);
        hi_j = std::max(hi_j, j);
      }
  MaskGrid best = truth;
  double best_gap = 1e9;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int ci = lo_i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi_i - lo_i + 1)));
    const int cj = lo_j + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi_j - lo_j + 1)));
    const int hw = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(
                         std::max(2, (hi_i - lo_i) / 3))));
    const int hh = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(
                         std::max(2, (hi_j - lo_j) / 3))));
    int erased = 0;
    for (int j = std::max(0, cj - hh); j <= std::min(spec.height - 1, cj + hh); ++j)
      for (int i = std::max(0, ci - hw); i <= std::min(spec.width - 1, ci + hw); ++i)
        erased += truth.at(i, j);
    const double frac = static_cast<double>(erased) / fg;
    const double gap = frac < 0.10 ? 0.10 - frac : frac > 0.20 ? frac - 0.20 : 0.0;
    if (gap <= best_gap) {
      best_gap = gap;
      MaskGrid m = truth;
      for (int j = std::max(0, cj - hh); j <= std::min(spec.height - 1, cj + hh); ++j)
        for (int i = std::max(0, ci - hw); i <= std::min(spec.width - 1, ci + hw); ++i)
          m.at(i, j) = 0;
      best = std::move(m);
      if (gap == 0.0) break;
    }
  }
  return best;
}

/// Merges a seeded elliptical blob overlapping the truth boundary.
inline MaskGrid corrupt_merged(const MaskGrid& truth, Rng& rng) {
  const GridSpec& spec = truth.spec();
  const int fg = count_foreground(truth);
  std::vector<Vec2> boundary;
  for (int j = 1; j + 1 < spec.height; ++j)
    for (int i = 1; i + 1 < spec.width; ++i)
      if (truth.at(i, j) && (!truth.at(i - 1, j) || !truth.at(i + 1, j) ||
                             !truth.at(i, j - 1) || !truth.at(i, j + 1)))
        boundary.push_back(spec.cell_center(i, j));
  if (boundary.empty()) return truth;
  const Vec2 c = boundary[static_cast<size_t>(rng.next_below(boundary.size()))];
  // Blob area targeted at 10-20% of the foreground.
  const double target = (0.10 + 0.10 * rng.next_double()) * fg;
  const double r = std::sqrt(target / kPi) * spec.spacing;
  const double rx = r * (0.7 + 0.6 * rng.next_double());
  const double ry = target / kPi * spec.spacing * spec.spacing / rx;
  const double ang = rng.uniform(0, kPi);
  const Mat2 rot = Mat2::rotation(ang);
  MaskGrid m = truth;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const Vec2 d = rot.apply(spec.cell_center(i, j) - c);
      if ((d.x * d.x) / (rx * rx) + (d.y * d.y) / (ry * ry) <= 1.0) m.at(i, j) = 1;
    }
  return m;
}

inline bool usable_mask(const MaskGrid& m) {
  const int fg = count_foreground(m);
  return fg >= 30 && fg <= m.spec().cell_count() - 30;
}

}  // namespace detail

/// Deterministic test-suite synthesis: rigid cases by one-shot similarity
/// warps with the published parameter distributions, non-rigid cases by
/// iterated harmonic warping, both corrupted after deformation.
inline std::vector<TestCase> synthesize_suite(const MaskGrid& template_mask,
                                              const SuiteDesign& design,
                                              std::uint64_t seed) {
  const GridSpec& spec = template_mask.spec();
  const LevelSetField template_field = init_from_mask(template_mask, spec);
  const WarpModel rigid = WarpModel::similarity(spec);
  const WarpModel nonrigid =
      WarpModel::harmonic_warp(spec, HarmonicModes::order_bound(design.nonrigid_order));

  std::vector<TestCase> suite;
  const int total = design.n_rigid + design.n_nonrigid;
  suite.reserve(static_cast<size_t>(total));

  for (int idx = 0; idx < total; ++idx) {
    const bool is_rigid = idx < design.n_rigid;
    TestCase tc;
    tc.index = idx;
    tc.template_mask = template_mask;
    tc.corruption = design.corruption;

    for (int attempt = 0;; ++attempt) {
      tc.seed = Rng::derive(seed, static_cast<std::uint64_t>(idx) * 131 + attempt);
      LevelSetField truth_field(spec);
      if (is_rigid) {
        tc.deformation_kind = "similarity";
        tc.deformation = random_params(rigid, tc.seed);
        truth_field = warp_field_rigid(rigid, tc.deformation, template_field);
      } else {
        tc.deformation_kind = "harmonic";
        tc.deformation = random_params(nonrigid, tc.seed);
        WarpVelocity vel{tc.deformation};
        for (double& v : vel.dtheta_dt) v /= design.warp_steps;
        truth_field = simulate_iterated_warp(nonrigid, vel, template_field,
                                             design.warp_steps, 1.0);
      }
      tc.truth_mask = truth_field.to_mask();
      if (detail::usable_mask(tc.truth_mask)) break;
      if (attempt >= 20)
        throw Error(ErrorCode::EmptyMask, "could not synthesize a usable deformation");
    }

    Rng rng(Rng::derive(tc.seed, 7));
    switch (design.corruption) {
      case Corruption::None: tc.corrupted_mask = tc.truth_mask; break;
      case Corruption::Missing: tc.corrupted_mask = detail::corrupt_missing(tc.truth_mask, rng); break;
      case Corruption::Merged: tc.corrupted_mask = detail::corrupt_merged(tc.truth_mask, rng); break;
    }
    suite.push_back(std::move(tc));
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Forward-evolution evaluation (shape-distance protocol)
// ---------------------------------------------------------------------------

struct ForwardEvalReport {
  std::vector<std::vector<double>> distances;  // [iteration][velocity]
  std::vector<SummaryStats> per_iteration;
  std::vector<double> medians;
  double spearman_median_vs_iteration = 0.0;
};

namespace detail {

/// Scales a velocity draw down (deterministically) until the forward-Euler
/// affine orbit of the template bounding box stays inside the canvas margin.
/// The published distributions say nothing about velocities, so draws are
/// anchored to the parameter distributions and made canvas-safe.
inline ParamVector canvas_safe_velocity(const PriorVariationBasis& basis,
                                        const GridSpec& spec, ParamVector vel, int steps,
                                        double dt, const MaskGrid& mask) {
  int lo_i = spec.width, hi_i = 0, lo_j = spec.height, hi_j = 0;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      if (mask.at(i, j)) {
        lo_i = std::min(lo_i, i);
        hi_i = std::max(hi_i, i);
        lo_j = std::min(lo_j, j);
        hi_j = std::max(hi_j, j);
      }
  const Vec2 corners[4] = {spec.cell_center(lo_i, lo_j), spec.cell_center(hi_i, lo_j),
                           spec.cell_center(lo_i, hi_j), spec.cell_center(hi_i, hi_j)};
  const double margin = 3.0 * spec.spacing;
  const double x_lo = spec.origin.x + margin, x_hi = spec.origin.x + (spec.width - 1) * spec.spacing - margin;
  const double y_lo = spec.origin.y + margin, y_hi = spec.origin.y + (spec.height - 1) * spec.spacing - margin;

  auto stays_inside = [&](const ParamVector& v) {
    Vec2 pts[4];
    for (int k = 0; k < 4; ++k) pts[k] = corners[k];
    for (int s = 0; s < steps; ++s) {
      for (auto& p : pts) {
        Vec2 motion{0, 0};
        for (int c = 0; c < basis.count(); ++c)
          motion += basis.eval_world(c, p) * v[static_cast<size_t>(c)];
        // CFL guard of the level-set update: extreme points move the most
        // under the rigid families, so checking corners covers the band.
        if (motion.norm() * dt >= 0.8 * spec.spacing) return false;
        p += motion * dt;
        if (p.x < x_lo || p.x > x_hi || p.y < y_lo || p.y > y_hi) return false;
      }
    }
    return true;
  };

  double scale = 1.0;
  for (int tries = 0; tries < 24 && !stays_inside(vel); ++tries) {
    scale *= 0.8;
    for (double& v : vel) v *= 0.8;
  }
  (void)scale;
  return vel;
}

}  // namespace detail

/// Forward-evolution protocol: seeded random velocities, run the PVSE for a
/// fixed number of iterations, and score every recorded shape against the
/// initial shape with the matching alignment-invariant distance.
inline ForwardEvalReport run_forward_eval(const MaskGrid& template_mask,
                                          const BasisSpecDesc& basis_desc, int n_velocities,
                                          int steps, std::uint64_t seed) {
  const GridSpec& spec = template_mask.spec();
  const LevelSetField start = init_from_mask(template_mask, spec);
  const PriorVariationBasis basis = basis_desc.build(spec);
  const WarpModel model = basis_desc.build_warp(spec);
  const TransformClass cls =
      basis_desc.kind == "affine" ? TransformClass::Affine : TransformClass::Similarity;
  const PointSet initial = contour_point_set(start, spec.spacing, "initial");

  ForwardEvalReport rep;
  rep.distances.assign(static_cast<size_t>(steps), std::vector<double>(static_cast<size_t>(n_velocities), 0.0));

  std::vector<std::vector<PointSet>> snapshots(
      static_cast<size_t>(n_velocities), std::vector<PointSet>(static_cast<size_t>(steps)));
  parallel_for_index(n_velocities, [&](int v) {
    ParamVector total = random_params(model, Rng::derive(seed, static_cast<std::uint64_t>(v)));
    ParamVector vel = total;
    for (double& x : vel) x /= steps;
    vel = detail::canvas_safe_velocity(basis, spec, vel, steps, 1.0, template_mask);

    SolverConfig cfg;
    cfg.dt = 1.0;
    cfg.reinit_period = 1;
    evolve_forward(start, basis, WarpVelocity{vel}, steps, cfg,
                   [&](int it, const LevelSetField& f) {
                     snapshots[static_cast<size_t>(v)][static_cast<size_t>(it)] =
                         contour_point_set(f, spec.spacing);
                   });
  });

  // Alignment scoring; parallel across iterations, deterministic assembly.
  parallel_for_index(steps, [&](int it) {
    for (int v = 0; v < n_velocities; ++v) {
      const PointSet& ps = snapshots[static_cast<size_t>(v)][static_cast<size_t>(it)];
      rep.distances[static_cast<size_t>(it)][static_cast<size_t>(v)] =
          aligned_distance(ps, initial, cls).residual_distance;
    }
  });

  std::vector<double> iteration_index;
  for (int it = 0; it < steps; ++it) {
    rep.per_iteration.push_back(summarize(rep.distances[static_cast<size_t>(it)]));
    rep.medians.push_back(rep.per_iteration.back().median);
    iteration_index.push_back(static_cast<double>(it));
  }
  rep.spearman_median_vs_iteration = spearman(iteration_index, rep.medians);
  return rep;
}

// ---------------------------------------------------------------------------
// Recovery evaluation (registration + recovery protocol)
// ---------------------------------------------------------------------------

struct StageSpec {
  BasisSpecDesc basis;
  SolverConfig config;
};

struct PipelineSpec {
  std::vector<StageSpec> stages;
  double mu = 0.1 * 255.0 * 255.0;
  double nu = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double noise_sigma = 0.0;  // optional Gaussian noise on the rendered image
};

struct RecoveryCase {
  int index = 0;
  double jaccard = 0.0;
  double aligned_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string error;
};

struct RecoveryReport {
  std::vector<RecoveryCase> cases;
  std::vector<double> preamble_distance;  // aligned template-vs-truth distances
  SummaryStats jaccard_stats;
  double mean_jaccard = 0.0;
};

/// Renders the corrupted mask as a two-level image (0/255), optionally with
/// seeded Gaussian noise.
inline ScalarGrid render_case_image(const TestCase& tc, double noise_sigma) {
  const GridSpec& spec = tc.corrupted_mask.spec();
  ScalarGrid u0(spec, 0.0);
  Rng rng(Rng::derive(tc.seed, 99));
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      double v = tc.corrupted_mask.at(i, j) ? 255.0 : 0.0;
      if (noise_sigma > 0.0) v += noise_sigma * rng.next_gaussian();
      u0.at(i, j) = v;
    }
  return u0;
}

/// Initializes from the template mask and runs the staged pipeline on each
/// corrupted image; scores against the uncorrupted deformed truth. Per-case
/// failures are recorded, not fatal. Cases run in parallel; the report is
/// assembled in case order.
inline RecoveryReport run_recovery_eval(const std::vector<TestCase>& suite,
                                        const PipelineSpec& pipeline,
                                        bool with_preamble = false) {
  if (suite.empty()) throw Error(ErrorCode::EmptyList, "recovery suite is empty");
  RecoveryReport rep;
  rep.cases.assign(suite.size(), RecoveryCase{});
  if (with_preamble) rep.preamble_distance.assign(suite.size(), 0.0);

  parallel_for_index(static_cast<int>(suite.size()), [&](int k) {
    const TestCase& tc = suite[static_cast<size_t>(k)];
    RecoveryCase rc;
    rc.index = tc.index;
    try {
      const GridSpec& spec = tc.template_mask.spec();
      const LevelSetField init = init_from_mask(tc.template_mask, spec);
      const ScalarGrid u0 = render_case_image(tc, pipeline.noise_sigma);

      std::vector<Stage> stages;
      for (const StageSpec& ss : pipeline.stages) {
        Stage st{ss.basis.build(spec),
                 EnergyModel::chan_vese(u0, pipeline.mu, pipeline.nu, pipeline.lambda1,
                                        pipeline.lambda2),
                 ss.config};
        stages.push_back(std::move(st));
      }
      auto [final_field, trace] = staged_minimize(init, stages);
      const MaskGrid result = final_field.to_mask();
      rc.jaccard = jaccard(result, tc.truth_mask);
      rc.converged = trace.status == SolverStatus::Converged;
      rc.iterations = static_cast<int>(trace.rows.size());
      try {
        const PointSet a = contour_point_set(final_field, spec.spacing);
        const LevelSetField truth_field = init_from_mask(tc.truth_mask, spec);
        const PointSet b = contour_point_set(truth_field, spec.spacing);
        rc.aligned_residual = hausdorff(a, b);
      } catch (const Error&) {
        rc.aligned_residual = -1.0;
      }

      if (with_preamble) {
        const LevelSetField truth_field = init_from_mask(tc.truth_mask, spec);
        const PointSet t = contour_point_set(init, spec.spacing);
        const PointSet d = contour_point_set(truth_field, spec.spacing);
        rep.preamble_distance[static_cast<size_t>(k)] =
            aligned_distance(d, t,
                             tc.deformation_kind == "similarity" ? TransformClass::Similarity
                                                                 : TransformClass::Affine)
                .residual_distance;
      }
    } catch (const std::exception& e) {
      rc.error = e.what();
      rc.jaccard = 0.0;
    }
    rep.cases[static_cast<size_t>(k)] = std::move(rc);
  });

  std::vector<double> js;
  for (const RecoveryCase& rc : rep.cases) js.push_back(rc.jaccard);
  rep.jaccard_stats = summarize(js);
  rep.mean_jaccard = rep.jaccard_stats.mean;
  return rep;
}

}  // namespace pvse
