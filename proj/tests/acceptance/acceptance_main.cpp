// Acceptance suite: runs every agreed criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code 0 only if all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pvse/pvse.hpp"

using namespace pvse;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// --------------------------------------------------------------------------
// 1. Forward-PVSE orbit confinement
// --------------------------------------------------------------------------
void criterion1() {
  const auto t0 = Clock::now();
  GridSpec spec(64, 64);
  const MaskGrid bold = builtin_template("glyph-a", spec);
  const MaskGrid slanted = builtin_template("glyph-a-slanted", spec);
  const LevelSetField bold_f = init_from_mask(bold, spec);
  const LevelSetField slant_f = init_from_mask(slanted, spec);
  const PointSet bold_pts = contour_point_set(bold_f, 1.0);
  const PointSet slant_pts = contour_point_set(slant_f, 1.0);

  const double baseline_affine =
      aligned_distance(bold_pts, slant_pts, TransformClass::Affine).residual_distance;
  const double baseline_similarity =
      aligned_distance(bold_pts, slant_pts, TransformClass::Similarity).residual_distance;

  bool pass = true;
  std::string detail;
  for (const std::string kind : {"similarity", "affine"}) {
    BasisSpecDesc desc;
    desc.kind = kind;
    const ForwardEvalReport rep = run_forward_eval(bold, desc, 10, 50, 7);
    const double baseline = kind == "affine" ? baseline_affine : baseline_similarity;
    double worst_median = 0.0;
    for (double m : rep.medians) worst_median = std::max(worst_median, m);
    const bool below = worst_median < baseline;
    const bool no_trend = rep.spearman_median_vs_iteration <= 0.3;
    pass = pass && below && no_trend;
    detail += kind + ": max median " + fmt(worst_median) + " vs baseline " + fmt(baseline) +
              ", spearman " + fmt(rep.spearman_median_vs_iteration) + "; ";
  }
  const double dt = seconds_since(t0);
  const bool in_time = dt < 60.0;
  pass = pass && in_time;
  detail += "runtime " + fmt(dt) + "s (target < 60)";
  report(1, "forward-PVSE orbit confinement", pass, detail);
}

// --------------------------------------------------------------------------
// 2. Rigid recovery with missing parts
// --------------------------------------------------------------------------
void criterion2() {
  const auto t0 = Clock::now();
  GridSpec spec(128, 128);
  const MaskGrid tmpl = builtin_template("animal", spec, 0.55);
  SuiteDesign design;
  design.n_rigid = 50;
  design.n_nonrigid = 0;
  design.corruption = Corruption::Missing;
  const auto suite = synthesize_suite(tmpl, design, 2031);

  PipelineSpec pipeline;
  StageSpec st;
  st.basis.kind = "similarity";
  st.config.max_iterations = 600;
  pipeline.stages.push_back(st);
  const RecoveryReport rep = run_recovery_eval(suite, pipeline);

  const double dt = seconds_since(t0);
  const bool pass = rep.mean_jaccard >= 0.90 && dt < 600.0;
  report(2, "rigid recovery (missing parts)", pass,
         "mean jaccard " + fmt(rep.mean_jaccard) + " (need >= 0.90), median " +
             fmt(rep.jaccard_stats.median) + ", runtime " + fmt(dt) + "s (target < 600)");
}

// --------------------------------------------------------------------------
// 3. Non-rigid staging benefit
// --------------------------------------------------------------------------
void criterion3() {
  GridSpec spec(128, 128);
  const MaskGrid tmpl = builtin_template("animal", spec, 0.55);
  SuiteDesign design;
  design.n_rigid = 0;
  design.n_nonrigid = 50;
  design.corruption = Corruption::Missing;
  const auto suite = synthesize_suite(tmpl, design, 4057);

  PipelineSpec affine_only;
  {
    StageSpec st;
    st.basis.kind = "affine";
    st.config.max_iterations = 500;
    affine_only.stages.push_back(st);
  }
  PipelineSpec staged = affine_only;
  {
    StageSpec st;
    st.basis.kind = "vibration";
    st.basis.order = 3;
    st.config.max_iterations = 300;
    staged.stages.push_back(st);
  }

  const RecoveryReport base = run_recovery_eval(suite, affine_only);
  const RecoveryReport improved = run_recovery_eval(suite, staged);

  int wins = 0, losses = 0;
  for (size_t k = 0; k < suite.size(); ++k) {
    const double a = base.cases[k].jaccard;
    const double b = improved.cases[k].jaccard;
    if (b > a) ++wins;
    else if (b < a) ++losses;
  }
  const double p = sign_test_p(wins, losses);
  const bool pass = improved.jaccard_stats.median > base.jaccard_stats.median && p < 0.05;
  report(3, "non-rigid staging benefit", pass,
         "median affine-only " + fmt(base.jaccard_stats.median) + ", staged " +
             fmt(improved.jaccard_stats.median) + ", wins " + std::to_string(wins) + "/" +
             std::to_string(wins + losses) + ", sign-test p " + fmt(p) + " (need < 0.05)");
}

// --------------------------------------------------------------------------
// 4. Second-derivative budget certification
// --------------------------------------------------------------------------
void criterion4() {
  GridSpec spec(64, 64);
  bool pass = true;
  std::string detail;
  for (int M = 1; M <= 4 && pass; ++M) {
    for (int N = 1; N <= 4; ++N) {
      const auto basis = PriorVariationBasis::vibration(spec, HarmonicModes::rectangle(M, N));
      const SecondDerivativeReport rep = second_derivative_norms(basis, 256);
      if (!(rep.total <= 4.0 * M * N + 1e-9)) {
        pass = false;
        detail = "vibration(" + std::to_string(M) + "," + std::to_string(N) + ") total " +
                 fmt(rep.total) + " exceeds " + fmt(4.0 * M * N);
        break;
      }
    }
  }
  const double sim_total = second_derivative_norms(PriorVariationBasis::similarity(spec), 256).total;
  const double aff_total = second_derivative_norms(PriorVariationBasis::affine(spec), 256).total;
  if (sim_total != 0.0 || aff_total != 0.0) {
    pass = false;
    detail += " rigid totals nonzero";
  }
  if (detail.empty())
    detail = "all (M,N) in {1..4}^2 within 4MN on a 256^2 lattice; rigid totals exactly 0";
  report(4, "second-derivative budgets", pass, detail);
}

// --------------------------------------------------------------------------
// 5. Curvature zero-crossing bound and count invariance
// --------------------------------------------------------------------------
void criterion5() {
  GridSpec spec(128, 128);
  const Vec2 c{63.5, 63.5};
  MaskGrid peanut(spec, 0);
  for (int j = 0; j < 128; ++j)
    for (int i = 0; i < 128; ++i) {
      const Vec2 p = spec.cell_center(i, j) - c;
      const double a = std::atan2(p.y, p.x);
      peanut.at(i, j) = p.norm() <= 28.0 * (1.0 + 0.4 * std::cos(2 * a)) ? 1 : 0;
    }
  const LevelSetField start = init_from_mask(peanut, spec);

  // Vibration(1,1) forward evolution: measured curvature drift at tracked
  // crossings within 1.2x the printed bound at every snapshot.
  const PriorVariationBasis vib =
      PriorVariationBasis::vibration(spec, HarmonicModes::rectangle(1, 1));
  std::vector<LevelSetField> snaps{start};
  std::vector<ParamVector> vels;
  LevelSetField cur = start;
  const WarpVelocity vel{{0.5, -0.35}};
  SolverConfig cfg;
  for (int s = 0; s < 8; ++s) {
    auto [next, trace] = evolve_forward(cur, vib, vel, 4, cfg);
    cur = std::move(next);
    snaps.push_back(cur);
    vels.push_back(vel.dtheta_dt);
  }
  const BoundCheckReport rep = check_theorem1(snaps, vib, vels, 4.0);
  bool drift_ok = true;
  for (const BoundStep& st : rep.steps)
    drift_ok = drift_ok && st.measured_max <= 1.2 * st.bound;

  // Rigid bases preserve the crossing count exactly across 100 steps.
  bool count_ok = true;
  for (const std::string kind : {"similarity", "affine"}) {
    BasisSpecDesc desc;
    desc.kind = kind;
    const PriorVariationBasis basis = desc.build(spec);
    WarpVelocity rigid_vel;
    if (kind == "similarity") rigid_vel.dtheta_dt = {0.0015, 0.006, 0.0008, -0.0006};
    else rigid_vel.dtheta_dt = {0.002, -0.002, 0.0015, 0.001, 0.0008, -0.0005};
    LevelSetField rcur = start;
    for (int s = 0; s < 10; ++s) {
      auto [next, trace] = evolve_forward(rcur, basis, rigid_vel, 10, cfg);
      rcur = std::move(next);
      const size_t n = find_zero_crossings(rcur, 3.0, basis.normalization).crossings.size();
      count_ok = count_ok && n == 4;
    }
  }
  report(5, "curvature zero-crossing bounds", drift_ok && count_ok,
         std::string("vibration drift max ratio ") + fmt(rep.max_ratio) +
             " (need <= 1.2); rigid crossing count " + (count_ok ? "invariant" : "CHANGED") +
             " across 100 steps");
}

// --------------------------------------------------------------------------
// 6. Descent identity and energy monotonicity
// --------------------------------------------------------------------------
void criterion6() {
  GridSpec spec(96, 96);
  const MaskGrid tmpl = builtin_template("animal", spec, 0.5);
  SuiteDesign design;
  design.n_rigid = 4;
  design.n_nonrigid = 4;
  design.corruption = Corruption::Missing;
  const auto suite = synthesize_suite(tmpl, design, 515);

  long total_iters = 0;
  long bad_identity = 0;
  long bad_monotonic = 0;
  for (const TestCase& tc : suite) {
    const LevelSetField init = init_from_mask(tc.template_mask, spec);
    const ScalarGrid u0 = render_case_image(tc, 0.0);
    const EnergyModel energy = EnergyModel::chan_vese(u0);
    std::vector<Stage> stages;
    SolverConfig cfg;
    cfg.max_iterations = 120;
    stages.push_back({PriorVariationBasis::affine(spec), energy, cfg});
    SolverConfig cfg2 = cfg;
    cfg2.max_iterations = 60;
    stages.push_back(
        {PriorVariationBasis::vibration(spec, HarmonicModes::order_bound(3)), energy, cfg2});
    auto [out, trace] = staged_minimize(init, stages);

    double prev = trace.rows.empty()
                      ? 0.0
                      : trace.rows[0].energy + std::abs(trace.rows[0].reinit_energy_delta);
    for (const TraceRow& r : trace.rows) {
      ++total_iters;
      if (r.directional_derivative > 1e-12) ++bad_identity;
      // Increases are only ever attributable to reinitialization; allow that
      // share (up to 1% of the energy scale) and nothing else.
      const double allowance = std::min(std::abs(r.reinit_energy_delta), 0.01 * std::abs(prev)) +
                               1e-6 * (1.0 + std::abs(prev));
      if (r.energy > prev + allowance) ++bad_monotonic;
      prev = r.energy;
    }
  }
  const bool pass = total_iters >= 1000 && bad_identity == 0 && bad_monotonic == 0;
  report(6, "descent identity and monotonicity", pass,
         std::to_string(total_iters) + " iterations, identity violations " +
             std::to_string(bad_identity) + ", monotonicity violations " +
             std::to_string(bad_monotonic));
}

// --------------------------------------------------------------------------
// 7. Oracle equivalences
// --------------------------------------------------------------------------
void criterion7() {
  bool pass = true;
  std::string detail;

  // (a) project_gradient vs the polyline contour-integral quadrature.
  {
    GridSpec spec(64, 64);
    double worst_rel = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed * 31 + 5);
      const Vec2 c{rng.uniform(26, 38), rng.uniform(26, 38)};
      const double radius = rng.uniform(9, 14);
      const LevelSetField disk = disk_field(spec, c, radius);
      const PriorVariationBasis basis = seed % 2 == 0
                                            ? PriorVariationBasis::similarity(spec)
                                            : PriorVariationBasis::affine(spec);
      GradientField grad{ScalarGrid(spec, 0.0)};
      const double fx = rng.uniform(0.05, 0.2), fy = rng.uniform(0.05, 0.2);
      for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
          const Vec2 p = spec.cell_center(i, j);
          grad.speed.at(i, j) = std::sin(fx * p.x) + std::cos(fy * p.y);
        }
      const WarpVelocity v = project_gradient(disk, basis, grad);

      const Contour ct = principal_contour(extract_contour(disk));
      double norm_ref = 0.0;
      std::vector<double> oracle(static_cast<size_t>(basis.count()), 0.0);
      for (size_t k = 0; k < ct.points.size(); ++k) {
        const Vec2 a = ct.points[k];
        const Vec2 b = ct.points[(k + 1) % ct.points.size()];
        const Vec2 mid = (a + b) * 0.5;
        const double ds = (b - a).norm();
        const Vec2 t = (b - a) / std::max(ds, 1e-12);
        const Vec2 n{t.y, -t.x};
        const double f = std::sin(fx * mid.x) + std::cos(fy * mid.y);
        for (int col = 0; col < basis.count(); ++col)
          oracle[static_cast<size_t>(col)] -= basis.eval_world(col, mid).dot(n) * f * ds;
      }
      for (double o : oracle) norm_ref = std::max(norm_ref, std::abs(o));
      for (int col = 0; col < basis.count(); ++col) {
        const double err = std::abs(v.dtheta_dt[static_cast<size_t>(col)] -
                                    oracle[static_cast<size_t>(col)]);
        worst_rel = std::max(worst_rel, err / std::max(norm_ref, 1e-9));
      }
    }
    if (worst_rel > 0.05) pass = false;
    detail += "projection vs quadrature rel err " + fmt(worst_rel) + " (need <= 0.05); ";
  }

  // (b) hausdorff equals the O(n^2) brute force exactly.
  {
    bool equal = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed);
      PointSet a, b;
      for (int k = 0; k < 60; ++k) {
        a.points.push_back({rng.uniform(0, 50), rng.uniform(0, 50)});
        b.points.push_back({rng.uniform(0, 50), rng.uniform(0, 50)});
      }
      auto directed = [](const PointSet& p, const PointSet& q) {
        double worst = 0.0;
        for (const Vec2& x : p.points) {
          double best = 1e300;
          for (const Vec2& y : q.points)
            best = std::min(best, (x.x - y.x) * (x.x - y.x) + (x.y - y.y) * (x.y - y.y));
          worst = std::max(worst, best);
        }
        return worst;
      };
      const double brute = std::sqrt(std::max(directed(a, b), directed(b, a)));
      equal = equal && hausdorff(a, b) == brute;
    }
    if (!equal) pass = false;
    detail += std::string("hausdorff == brute force: ") + (equal ? "exact; " : "MISMATCH; ");
  }

  // (c) eval_basis vs finite-difference theta-Jacobians.
  {
    GridSpec spec(64, 64);
    const double dev = std::max(
        {verify_jacobian_consistency(PriorVariationBasis::similarity(spec),
                                     WarpModel::similarity(spec), 250, 3),
         verify_jacobian_consistency(PriorVariationBasis::affine(spec),
                                     WarpModel::affine(spec), 250, 4),
         verify_jacobian_consistency(
             PriorVariationBasis::vibration(spec, HarmonicModes::rectangle(2, 2)),
             WarpModel::harmonic_warp(spec, HarmonicModes::rectangle(2, 2)), 250, 5)});
    if (dev > 1e-5) pass = false;
    detail += "basis vs FD jacobian " + fmt(dev) + " (need <= 1e-5); ";
  }

  // (d) energy directional derivatives vs finite differences of energy_value.
  {
    GridSpec spec(64, 64);
    const Vec2 c{31.5, 31.5};
    const LevelSetField f = disk_field(spec, c, 12.0);
    ScalarGrid img(spec, 20.0);
    for (int j = 0; j < 64; ++j)
      for (int i = 0; i < 64; ++i)
        if ((spec.cell_center(i, j) - c).norm() <= 14.0) img.at(i, j) = 200.0;
    const SmoothKernels ker = SmoothKernels::for_spacing(1.0);
    double worst = 0.0;
    const EnergyModel models[2] = {EnergyModel::chan_vese(img, 50.0, 0.0, 1.0, 1.0),
                                   EnergyModel::gac(edge_indicator(img, 1.5))};
    for (const EnergyModel& m : models) {
      const CurveGeometry geo = geometry(f);
      const GradientField g = m.kind == EnergyKind::ChanVese ? gradient_chan_vese(m, f, geo)
                                                             : gradient_gac(m, f, geo);
      ScalarGrid delta(spec, 0.0);
      for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
          const Vec2 p = spec.cell_center(i, j);
          delta.at(i, j) = ker.band_window(f.values.at(i, j)) * std::sin(0.19 * p.x) *
                           std::cos(0.23 * p.y);
        }
      const double h = 1e-3;
      LevelSetField plus = f, minus = f;
      for (size_t k = 0; k < f.values.data().size(); ++k) {
        plus.values.data()[k] += h * delta.data()[k];
        minus.values.data()[k] -= h * delta.data()[k];
      }
      const double fd = (energy_value(m, plus) - energy_value(m, minus)) / (2 * h);
      double analytic = 0.0;
      for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
          analytic += g.speed.at(i, j) * ker.delta(f.values.at(i, j)) * delta.at(i, j);
      worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(fd), 1e-9));
    }
    if (worst > 0.05) pass = false;
    detail += "energy directional derivative rel err " + fmt(worst) + " (need <= 0.05)";
  }

  report(7, "oracle equivalences", pass, detail);
}

// --------------------------------------------------------------------------
// 8. Determinism of the benchmark CLI
// --------------------------------------------------------------------------
void criterion8() {
  const char* cli = std::getenv("PVSE_CLI");
  if (!cli) {
    report(8, "bench determinism", false, "PVSE_CLI not set (run through ctest)");
    return;
  }
  const std::string base = "/tmp/pvse_accept_bench";
  std::system(("rm -rf " + base + "1 " + base + "2").c_str());
  const std::string flags =
      " bench --seed 7 --n-rigid 6 --n-nonrigid 0 --n-velocities 3 --steps 10 --size 96";
  const int rc1 = std::system((std::string(cli) + flags + " --out-dir " + base + "1").c_str());
  const int rc2 = std::system((std::string(cli) + flags + " --out-dir " + base + "2").c_str());

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool pass = rc1 == 0 && rc2 == 0;
  std::string detail = "exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2);
  for (const std::string name :
       {"forward_similarity.csv", "forward_affine.csv", "recovery.csv", "summary.json"}) {
    const std::string a = slurp(base + "1/" + name);
    const std::string b = slurp(base + "2/" + name);
    const bool same = !a.empty() && a == b;
    pass = pass && same;
    detail += ", " + name + (same ? " identical" : " DIFFERS");
  }
  report(8, "bench determinism", pass, detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("%s: %d/8 criteria passed in %.1f s\n", g_failures == 0 ? "OK" : "FAILED",
              8 - g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
