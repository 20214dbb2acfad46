#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace pvse;
using namespace testutil;

TEST_CASE("apply_warp: identity property is bit-exact for all models") {
  GridSpec spec(64, 64);
  const WarpModel models[] = {WarpModel::similarity(spec), WarpModel::affine(spec),
                              WarpModel::harmonic_warp(spec, HarmonicModes::rectangle(2, 2))};
  Rng rng(101);
  for (const WarpModel& m : models) {
    const ParamVector zero(static_cast<size_t>(m.param_count()), 0.0);
    for (int k = 0; k < 1000; ++k) {
      const Vec2 x{rng.uniform(0, 63), rng.uniform(0, 63)};
      const Vec2 y = apply_warp(m, zero, x);
      CHECK(y.x == x.x);
      CHECK(y.y == x.y);
    }
  }
}

TEST_CASE("apply_warp: similarity scaling row") {
  // Identity normalization; evaluates the closed form directly.
  WarpModel m{WarpKind::Similarity, AffineMap2::identity(), {}};
  const ParamVector theta{std::log(2.0), 0.0, 0.0, 0.0};
  const Vec2 y = apply_warp(m, theta, {1.0, 0.0});
  CHECK(y.x == Catch::Approx(2.0).margin(1e-12));
  CHECK(y.y == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("apply_warp: harmonic single-mode displacement") {
  WarpModel m{WarpKind::Harmonic, AffineMap2::identity(), HarmonicModes::rectangle(1, 1)};
  const ParamVector theta{0.1, 0.0};
  const Vec2 y = apply_warp(m, theta, {0.5, 0.0});
  // Independent scalar computation: 0.5 + 0.1 sin(pi/2) cos(0) / (2 pi^2).
  const double expected = 0.5 + 0.1 / (2.0 * kPi * kPi);
  CHECK(y.x == Catch::Approx(expected).margin(1e-9));
  CHECK(expected == Catch::Approx(0.505066).margin(1e-6));
  CHECK(y.y == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("apply_warp: dimension mismatch rejected") {
  GridSpec spec(32, 32);
  const WarpModel m = WarpModel::similarity(spec);
  CHECK_THROWS_AS(apply_warp(m, {0.0, 0.0}, {1, 1}), Error);
}

TEST_CASE("warp consistency bound: small parameters give small displacements") {
  GridSpec spec(64, 64);
  const WarpModel models[] = {WarpModel::similarity(spec), WarpModel::affine(spec),
                              WarpModel::harmonic_warp(spec, HarmonicModes::order_bound(3))};
  Rng rng(77);
  for (const WarpModel& m : models) {
    const int n = m.param_count();
    // K: max Jacobian norm over sampled points, by finite differences.
    double K = 0.0;
    for (int s = 0; s < 40; ++s) {
      const Vec2 x{rng.uniform(4, 60), rng.uniform(4, 60)};
      for (int k = 0; k < n; ++k) {
        ParamVector p(static_cast<size_t>(n), 0.0), q(static_cast<size_t>(n), 0.0);
        p[static_cast<size_t>(k)] = 1e-5;
        q[static_cast<size_t>(k)] = -1e-5;
        const Vec2 d = (apply_warp(m, p, x) - apply_warp(m, q, x)) / 2e-5;
        K = std::max(K, d.norm());
      }
    }
    K *= std::sqrt(static_cast<double>(n));  // row-sum bound over the full Jacobian
    for (int trial = 0; trial < 50; ++trial) {
      ParamVector theta(static_cast<size_t>(n));
      double norm2 = 0.0;
      for (double& v : theta) {
        v = rng.uniform(-1e-3, 1e-3);
        norm2 += v * v;
      }
      const Vec2 x{rng.uniform(4, 60), rng.uniform(4, 60)};
      const double disp = (apply_warp(m, theta, x) - x).norm();
      CHECK(disp <= 1.05 * K * std::sqrt(norm2));
    }
  }
}

TEST_CASE("simulate_iterated_warp: zero velocity leaves the field unchanged") {
  GridSpec spec(64, 64);
  const LevelSetField disk = disk_field(spec, {31.5, 31.5}, 12.0);
  const WarpModel m = WarpModel::similarity(spec);
  const LevelSetField out =
      simulate_iterated_warp(m, WarpVelocity{{0, 0, 0, 0}}, disk, 10, 1.0);
  CHECK(max_abs_diff(out.values, disk.values) < 1e-3);
}

TEST_CASE("simulate_iterated_warp: 50 small rotations compose to a quarter turn") {
  GridSpec spec(64, 64);
  const MaskGrid m0 = square_mask(spec, 24, 40);
  LevelSetField f = init_from_mask(m0, spec);
  // Break the square's 90-degree symmetry with a notch so rotation matters.
  for (int j = 24; j < 29; ++j)
    for (int i = 24; i < 29; ++i) f.values.at(i, j) = std::max(f.values.at(i, j), 1.0);
  f = reinitialize_full(f);
  const MaskGrid before = f.to_mask();

  const WarpModel m = WarpModel::similarity(spec);
  const WarpVelocity vel{{0.0, kPi / 100.0, 0.0, 0.0}};
  const LevelSetField out = simulate_iterated_warp(m, vel, f, 50, 1.0);

  // Oracle: analytic rotation of the original mask by pi/2 about the center.
  const Vec2 c = grid_center(spec);
  MaskGrid rotated(spec, 0);
  const double ang = -kPi / 2.0;  // inverse lookup
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      const Vec2 p = spec.cell_center(i, j) - c;
      const Vec2 src = Mat2::rotation(ang).apply(p) + c;
      const Vec2 g = spec.to_grid(src);
      const int si = static_cast<int>(std::round(g.x)), sj = static_cast<int>(std::round(g.y));
      if (si >= 0 && si < 64 && sj >= 0 && sj < 64) rotated.at(i, j) = before.at(si, sj);
    }
  CHECK(jaccard(out.to_mask(), rotated) >= 0.97);
}

TEST_CASE("simulate_iterated_warp: uniform scaling grows area as the square") {
  GridSpec spec(96, 96);
  const LevelSetField disk = disk_field(spec, {47.5, 47.5}, 14.0);
  const WarpModel m = WarpModel::similarity(spec);
  const double rate = std::log(1.2) / 50.0;
  const LevelSetField out = simulate_iterated_warp(m, WarpVelocity{{rate, 0, 0, 0}}, disk, 50, 1.0);
  const double area0 = std::abs(extract_contour(disk)[0].signed_area());
  const double area1 = std::abs(extract_contour(out)[0].signed_area());
  CHECK(area1 / area0 == Catch::Approx(1.2 * 1.2).epsilon(0.03));
}

TEST_CASE("simulate_iterated_warp: rejects steps over one cell") {
  GridSpec spec(64, 64);
  const LevelSetField disk = disk_field(spec, {31.5, 31.5}, 12.0);
  const WarpModel m = WarpModel::similarity(spec);
  CHECK_THROWS_AS(
      simulate_iterated_warp(m, WarpVelocity{{0, 0, 0.2, 0}}, disk, 5, 1.0), Error);
}

TEST_CASE("simulate_iterated_warp: rigid forward-then-back approximately reverses") {
  GridSpec spec(64, 64);
  LevelSetField f = init_from_mask(square_mask(spec, 22, 42), spec);
  const WarpModel m = WarpModel::similarity(spec);
  const WarpVelocity vel{{0.004, 0.01, 0.002, -0.003}};
  WarpVelocity back = vel;
  for (double& v : back.dtheta_dt) v = -v;
  const LevelSetField fwd = simulate_iterated_warp(m, vel, f, 25, 1.0);
  const LevelSetField rt = simulate_iterated_warp(m, back, fwd, 25, 1.0);
  CHECK(jaccard(rt.to_mask(), f.to_mask()) >= 0.95);
}

TEST_CASE("random_params: published distributions and determinism") {
  GridSpec spec(64, 64);
  const WarpModel sim = WarpModel::similarity(spec);
  for (std::uint64_t seed : {1ULL, 7ULL, 912ULL}) {
    const ParamVector t = random_params(sim, seed);
    REQUIRE(t.size() == 4);
    CHECK((t[0] >= -0.9 && t[0] <= 1.1));          // lambda
    CHECK((t[1] >= -kPi / 4 && t[1] <= kPi / 4));  // omega
    CHECK((t[2] >= -0.1 && t[2] <= 0.1));
    CHECK((t[3] >= -0.1 && t[3] <= 0.1));
    CHECK(random_params(sim, seed) == t);
  }

  const WarpModel har = WarpModel::harmonic_warp(spec, HarmonicModes::order_bound(3));
  REQUIRE(har.harmonic.modes ==
          std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}});
  const ParamVector xi = random_params(har, 5);
  REQUIRE(xi.size() == 6);
  for (double v : xi) CHECK((v >= -0.125 && v <= 0.125));
}

TEST_CASE("harmonic displacement vanishes on the sine lattice lines") {
  GridSpec spec(64, 64);
  for (int n = 1; n <= 3; ++n) {
    WarpModel m{WarpKind::Harmonic, AffineMap2::identity(), HarmonicModes::rectangle(3, 3)};
    ParamVector theta(static_cast<size_t>(m.param_count()), 0.0);
    // activate e1 of the mode (m=2, n): x-displacement ~ sin(pi n x)
    int idx = 0;
    for (int k = 0; k < m.harmonic.count(); ++k)
      if (m.harmonic.modes[static_cast<size_t>(k)] == std::make_pair(2, n)) idx = 2 * k;
    theta[static_cast<size_t>(idx)] = 0.2;
    for (int k = 0; k <= n; ++k) {
      const double x = static_cast<double>(k) / n;
      const Vec2 y = apply_warp(m, theta, {x, 0.37});
      CHECK(std::abs(y.x - x) < 1e-12);
    }
  }
}

TEST_CASE("harmonic mode sets: rectangle and order-bound selections") {
  CHECK(HarmonicModes::rectangle(3, 2).count() == 6);
  CHECK(HarmonicModes::order_bound(3).count() == 3);
  CHECK(HarmonicModes::order_bound(4).count() == 6);
  GridSpec spec(32, 32);
  CHECK(WarpModel::harmonic_warp(spec, HarmonicModes::rectangle(2, 2)).param_count() == 8);
}
