#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ruelle/convexity.hpp"

using namespace ruelle;
using doctest::Approx;

namespace {

std::vector<double> random_widths(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 5.0);
  std::vector<double> a(n);
  for (double& x : a) x = w(rng);
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

TEST_CASE("ellipsoid quantities against quadrature") {
  const auto q = ellipsoid_quantities({1, 2});
  CHECK(q.systole == 1.0);
  CHECK(q.volume == Approx(1.0).epsilon(1e-14));
  CHECK(q.laplacian == Approx(6 * kPi).epsilon(1e-14));

  const auto q3 = ellipsoid_quantities({1, 2, 3});
  CHECK(q3.volume == Approx(1.0).epsilon(1e-14));
  CHECK(q3.laplacian == Approx(22 * kPi / 3).epsilon(1e-14));

  const auto q1 = ellipsoid_quantities({2});
  CHECK(q1.systole == 2.0);
  CHECK(q1.volume == 2.0);
  CHECK(q1.laplacian == Approx(4 * kPi).epsilon(1e-14));

  std::mt19937_64 rng(5);
  for (int n = 2; n <= 4; ++n) {
    const auto a = random_widths(n, rng);
    const auto region = MomentRegion::ellipsoid(a);
    const auto qa = ellipsoid_quantities(a);
    CHECK(volume_toric(region).value == Approx(qa.volume).epsilon(1e-9));
    CHECK(laplacian_functional(region).value == Approx(qa.laplacian).epsilon(1e-9));
    CHECK(systole_concave(region).value == Approx(qa.systole).epsilon(1e-9));
  }

  CHECK_THROWS_AS(ellipsoid_quantities({2, 1}), Error);
  try {
    ellipsoid_quantities({2, 1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsortedWidths);
  }
  CHECK_THROWS_AS(ellipsoid_quantities({0, 1}), Error);
}

TEST_CASE("ellipsoid double inequality and the Ruelle-systole shadow") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 5;
    const auto a = random_widths(n, rng);
    const auto q = ellipsoid_quantities(a);
    const double cs = q.systole * q.laplacian;
    CHECK(4 * kPi * q.volume <= cs * (1 + 1e-12));
    CHECK(cs <= 4 * kPi * n * q.volume * (1 + 1e-12));
    // Ru = vol sum 1/a_i, so Ru c = vol sum a_1/a_i <= n vol.
    double inv = 0.0;
    for (double x : a) inv += 1.0 / x;
    CHECK(q.volume * inv * q.systole <= n * q.volume * (1 + 1e-12));
  }
}

TEST_CASE("main constant in log space") {
  const auto c1 = main_constant(1);
  CHECK(c1.log_value == Approx(7 * std::log(2.0) + 8));
  CHECK_FALSE(c1.overflowing);
  CHECK(c1.value == Approx(128 * std::exp(8.0)));
  const auto c2 = main_constant(2);
  CHECK(c2.log_value == Approx(16 * std::log(2.0) + 128));
  CHECK_FALSE(c2.overflowing);
  const auto c3 = main_constant(3);
  CHECK(c3.log_value == Approx(11 * std::log(2.0) + 9 * std::log(3.0) + 648));
  CHECK_FALSE(c3.overflowing);  // about e^665, still a double
  const auto c4 = main_constant(4);
  CHECK(c4.overflowing);
  CHECK(std::isinf(c4.value));
  CHECK_THROWS_AS(main_constant(0), Error);
}

TEST_CASE("main inequality on convex toric regions") {
  const auto r = check_main_inequality(MomentRegion::ellipsoid({1, 2}));
  CHECK(r.lhs == Approx(1.5).epsilon(1e-9));
  CHECK(r.log_rhs == Approx(16 * std::log(2.0) + 128).epsilon(1e-9));
  CHECK(r.satisfied);
  CHECK(r.margin > 0);

  // Quarter disc x^2 + y^2 <= 1: vol = pi/4 by hit-or-miss on the unit square.
  const auto disc = check_main_inequality(MomentRegion::pfamily({1, 1}, 2.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long hits = 0;
  const long draws = 200000;
  for (long i = 0; i < draws; ++i) {
    const double x = unit(rng), y = unit(rng);
    if (x * x + y * y <= 1.0) ++hits;
  }
  const double mc = double(hits) / draws;
  CHECK(std::abs(disc.volume - mc) < 4 * std::sqrt(mc * (1 - mc) / draws));
  CHECK(disc.systole == 1.0);
  CHECK(disc.satisfied);

  std::mt19937_64 wr(9);
  for (int n = 1; n <= 4; ++n) {
    const auto rep = check_main_inequality(MomentRegion::ellipsoid(random_widths(n, wr)));
    CHECK(rep.satisfied);
    CHECK(rep.lhs <= n * rep.volume * (1 + 1e-9));
  }
  CHECK_THROWS_AS(check_main_inequality(MomentRegion::pfamily({1, 1}, 0.5)), Error);
}

TEST_CASE("sandwich estimate on nested ellipsoids") {
  const auto inner = MomentRegion::ellipsoid({1, 1});
  const auto outer = MomentRegion::ellipsoid({2, 2});
  const auto r = sandwich_check(inner, outer, 2.0);
  CHECK(r.laplacian_inner == Approx(4 * kPi).epsilon(1e-9));
  CHECK(r.laplacian_outer == Approx(8 * kPi).epsilon(1e-9));
  CHECK(r.log_factor == Approx(16.0));
  CHECK(r.L_computed == Approx(2.0));
  CHECK(r.holds);

  const auto same = sandwich_check(inner, inner, 1.0);
  CHECK(same.log_ratio == Approx(0.0));
  CHECK(same.holds);

  CHECK_THROWS_AS(sandwich_check(inner, outer, 1.5), Error);
  try {
    sandwich_check(outer, inner, 2.0);
    FAIL("expected SandwichHypothesisFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SandwichHypothesisFailed);
  }

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> grow(1.0, 2.5);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    auto a = random_widths(n, rng);
    auto b = a;
    for (double& x : b) x *= grow(rng);
    std::sort(b.begin(), b.end());
    // The k-th smallest of b still dominates the k-th smallest of a.
    const auto rep = sandwich_check(MomentRegion::ellipsoid(a),
                                    MomentRegion::ellipsoid(b));
    CHECK(rep.holds);
    double ratio = 0.0;
    for (int i = 0; i < n; ++i) ratio = std::max(ratio, b[i] / a[i]);
    CHECK(rep.L_computed == Approx(ratio).epsilon(1e-9));
    const auto qa = ellipsoid_quantities(a), qb = ellipsoid_quantities(b);
    CHECK(rep.laplacian_inner == Approx(qa.laplacian).epsilon(1e-8));
    CHECK(rep.laplacian_outer == Approx(qb.laplacian).epsilon(1e-8));
  }
}

TEST_CASE("inscribed ellipsoid") {
  const auto self = inscribed_ellipsoid(MomentRegion::ellipsoid({1, 2}));
  CHECK(self.widths[0] == Approx(1.0).epsilon(1e-8));
  CHECK(self.widths[1] == Approx(2.0).epsilon(1e-8));
  CHECK(self.factor == Approx(1.0).epsilon(1e-8));

  // Largest kappa with the segment from (kappa, 0) to (0, kappa) inside the
  // quarter disc, by a one-parameter scan.
  double kappa = 0.0;
  for (double k = 0.5; k <= 1.5; k += 1e-4) {
    bool inside = true;
    for (int i = 0; i <= 400 && inside; ++i) {
      const double t = i / 400.0;
      const double x = k * t, y = k * (1 - t);
      inside = x * x + y * y <= 1.0 + 1e-12;
    }
    if (inside) kappa = k;
  }
  const auto disc = inscribed_ellipsoid(MomentRegion::pfamily({1, 1}, 2.0));
  CHECK(disc.widths[0] == Approx(kappa).epsilon(2e-4));
  CHECK(disc.widths[1] == Approx(kappa).epsilon(2e-4));

  // Covering factor: max of x + y/4 over (x)^3 + (y/4)^3 = 1.
  const auto cubic = inscribed_ellipsoid(MomentRegion::pfamily({1, 4}, 3.0));
  double cover = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double t = i / 100000.0;
    const double x = std::cbrt(t), y = 4 * std::cbrt(1 - t);
    cover = std::max(cover, x / cubic.widths[0] + y / cubic.widths[1]);
  }
  CHECK(cubic.factor == Approx(cover).epsilon(1e-4));
  CHECK(cubic.factor <= 4.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pd(1.0, 4.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + trial % 2;
    const auto e = inscribed_ellipsoid(MomentRegion::pfamily(random_widths(n, rng), pd(rng)));
    CHECK(e.factor <= 2.0 * n);
  }
}

TEST_CASE("counterexample in two and three dimensions") {
  const auto base2 = MomentRegion::ellipsoid({1, 1});
  const auto s2 = build_counterexample(base2, 50, 0.1);
  CHECK_FALSE(s2.unchanged);
  CHECK(s2.B == 1.0);
  CHECK(s2.report.verified());
  CHECK(s2.report.volume >= 0.5);
  CHECK(s2.report.volume <= 0.6);
  CHECK(s2.report.ruelle >= 50);
  CHECK(s2.report.systole >= 1.0 - 1e-9);
  CHECK(s2.report.systole_complete);
  // The two constraints are tight at the returned A up to the bisection.
  CHECK(counterexample_tail_bound(2, s2.A, s2.B) >= 50);
  CHECK(counterexample_tail_bound(2, s2.A * (1 - 1e-6), s2.B) < 50);
  // Independent volume bracket: base and Delta overlap in the tiny box
  // [0, A^-2] x [0, 1], and the smoothing inflates by at most (1 + delta).
  const double vd = 0.5 / s2.A;
  CHECK(s2.report.volume >= 0.5 + vd - 1.0 / (s2.A * s2.A) - 1e-9);
  CHECK(s2.report.volume <= std::pow(1 + s2.delta, 2) * (0.5 + vd) + 1e-9);
  CHECK(s2.report.ruelle >= s2.A / 2);  // Ru of Delta alone

  const auto s3 = build_counterexample(MomentRegion::ellipsoid({1, 1, 1}), 20, 0.5);
  CHECK(s3.report.verified());
  CHECK(s3.report.ruelle >= 20);
}

TEST_CASE("counterexample edge cases") {
  const auto base = MomentRegion::ellipsoid({1, 1});
  const auto same = build_counterexample(base, 0.0, 0.1);
  CHECK(same.unchanged);
  CHECK(same.report.verified());
  CHECK(same.report.volume == Approx(0.5));

  try {
    build_counterexample(base, 1e6, 1e-12);
    FAIL("expected NoFeasibleA");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoFeasibleA);
  }
  CHECK_THROWS_AS(build_counterexample(MomentRegion::pfamily({1, 1}, 2.0), 50, 0.1),
                  Error);
  CHECK_THROWS_AS(build_counterexample(MomentRegion::ellipsoid({1}), 50, 0.1), Error);

  // A wider base needs a larger B.
  const auto wide = build_counterexample(MomentRegion::pfamily({1, 3}, 0.5), 40, 0.5);
  CHECK(wide.B == 4.0);
  CHECK(wide.report.verified());
}
