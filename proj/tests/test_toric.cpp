#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ruelle/toric.hpp"

using namespace ruelle;

namespace {

std::vector<double> random_widths(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.2, 5.0);
  std::vector<double> a(n);
  for (double& x : a) x = d(rng);
  std::sort(a.begin(), a.end());
  return a;
}

double product(const std::vector<double>& a) {
  double p = 1.0;
  for (double x : a) p *= x;
  return p;
}

double inverse_sum(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += 1.0 / x;
  return s;
}

// Dense scan of <x, v> along the boundary of a 2d region, by bisection on
// each ray for f = 1 (no use of the region's radius function).
double scan_bracket_2d(const CanonicalFunction& f, double v0, double v1,
                       int rays) {
  double best = 1e300;
  for (int k = 0; k <= rays; ++k) {
    const double t = double(k) / rays;
    Point u(2);
    u << t, 1.0 - t;
    double lo = 0.0, hi = 1.0;
    while (f.value(hi * u) < 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f.value(mid * u) < 1.0 ? lo : hi) = mid;
    }
    if (v0 == 0.0 && t > 0.0) continue;
    if (v1 == 0.0 && t < 1.0) continue;
    best = std::min(best, lo * (v0 * u(0) + v1 * u(1)));
  }
  return best;
}

}  // namespace

TEST_CASE("Ruelle invariant of ellipsoids matches the closed form") {
  CHECK(ruelle_invariant_toric(MomentRegion::ellipsoid({1, 2})).value ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(ruelle_invariant_toric(MomentRegion::ellipsoid({1, 1, 1})).value ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ruelle_invariant_toric(MomentRegion::ellipsoid({7.0})).value ==
        doctest::Approx(1.0).epsilon(1e-14));
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const auto a = random_widths(n, rng);
    const double expect = product(a) / oracle::factorial(n) * inverse_sum(a);
    const Estimate e = ruelle_invariant_toric(MomentRegion::ellipsoid(a));
    REQUIRE(e.value == doctest::Approx(expect).epsilon(1e-8));
    REQUIRE(e.error <= 1e-8 * expect);
  }
}

TEST_CASE("volume and Laplacian functional of ellipsoids") {
  CHECK(volume_toric(MomentRegion::ellipsoid({1, 2})).value == doctest::Approx(1.0));
  CHECK(volume_toric(MomentRegion::ellipsoid({2})).value == doctest::Approx(2.0));
  CHECK(laplacian_functional(MomentRegion::ellipsoid({1, 2})).value ==
        doctest::Approx(6 * kPi).epsilon(1e-10));
  CHECK(laplacian_functional(MomentRegion::ellipsoid({1, 2, 3})).value ==
        doctest::Approx(22 * kPi / 3).epsilon(1e-10));
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const auto a = random_widths(n, rng);
    const double expect =
        4 * kPi / oracle::factorial(n) * inverse_sum(a) * product(a);
    CHECK(laplacian_functional(MomentRegion::ellipsoid(a)).value ==
          doctest::Approx(expect).epsilon(1e-8));
    // The non-closed-form path (pfamily with p = 1) agrees.
    CHECK(volume_toric(MomentRegion::pfamily(a, 1.0)).value ==
          doctest::Approx(product(a) / oracle::factorial(n)).epsilon(1e-8));
  }
}

TEST_CASE("pfamily p = 1/2 against independent oracles") {
  const auto region = MomentRegion::pfamily({1, 1}, 0.5);
  // Monte Carlo volume of {sqrt x + sqrt y <= 1}.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const long N = 10000000;
  long hits = 0;
  for (long i = 0; i < N; ++i) {
    if (std::sqrt(u(rng)) + std::sqrt(u(rng)) <= 1.0) ++hits;
  }
  const Estimate vol = volume_toric(region);
  CHECK(vol.value == doctest::Approx(double(hits) / N).epsilon(1e-3));
  CHECK(vol.value == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  // With x = s^2, y = t^2 the density is (s + t)^2 / (s t) and dx dy =
  // 4 s t ds dt, so Ru = 4 * integral of r^3 dr = 1.
  CHECK(ruelle_invariant_toric(region).value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_FALSE(laplacian_functional(region).non_integrable_hessian);
  CHECK(laplacian_functional(MomentRegion::pfamily({1, 1}, 0.4)).non_integrable_hessian);
}

TEST_CASE("pfamily quadrature is stable under panel doubling") {
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    const auto region = MomentRegion::pfamily({1.0, 1.5, 2.5}, p);
    QuadratureSpec coarse;
    coarse.outer_panels = 8;
    QuadratureSpec fine;
    fine.outer_panels = 16;
    const double a = ruelle_invariant_toric(region, coarse).value;
    const double b = ruelle_invariant_toric(region, fine).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
  }
}

TEST_CASE("serial and parallel toric quadrature agree bitwise") {
  const auto region = MomentRegion::pfamily({1.0, 2.0, 3.0}, 0.7);
  QuadratureSpec s;
  s.exec = Execution::Serial;
  QuadratureSpec p;
  p.exec = Execution::Parallel;
  CHECK(ruelle_invariant_toric(region, s).value ==
        ruelle_invariant_toric(region, p).value);
}

TEST_CASE("strict monotonicity") {
  CHECK(is_strictly_monotone(MomentRegion::ellipsoid({1, 2})).monotone);
  CHECK(is_strictly_monotone(MomentRegion::pfamily({1, 1}, 2.0)).monotone);
  CHECK(is_strictly_monotone(MomentRegion::pfamily({1, 2, 3}, 0.5), 2000).monotone);
  // R(u) = 1 + 5 u_1 rises so steeply that the outward normal at u_1 = 0
  // points away from the first axis.
  std::vector<double> values;
  for (int k = 0; k <= 3; ++k) values.push_back(1.0 + 5.0 * k / 3.0);
  const auto dented = MomentRegion::radial_profile(2, 3, values);
  const auto r = is_strictly_monotone(dented, 1000);
  REQUIRE_FALSE(r.monotone);
  // Finite-difference oracle for the witness component.
  const CanonicalFunction f(dented);
  Point xp = r.witness, xm = r.witness;
  const double h = 1e-6;
  xp(r.component) += h;
  xm(r.component) -= h;
  CHECK((f.value(xp) - f.value(xm)) / (2 * h) <= 0.0);

  std::mt19937_64 rng(24);
  const auto monotone = MomentRegion::pfamily({1.0, 3.0}, 0.6);
  const CanonicalFunction g(monotone);
  for (int k = 0; k < 1000; ++k) {
    Point u(2);
    u(0) = std::uniform_real_distribution<double>(1e-6, 1.0)(rng);
    u(1) = 1.0 - u(0);
    CHECK(g.gradient(u).sum() > 0.0);
  }
}

TEST_CASE("concavity certificate") {
  CHECK(concavity_certificate(MomentRegion::ellipsoid({1, 2, 3})).concave);
  CHECK(concavity_certificate(MomentRegion::pfamily({1, 2}, 0.5)).concave);
  const auto convex = concavity_certificate(MomentRegion::pfamily({1, 2}, 2.0));
  CHECK_FALSE(convex.concave);
  CHECK(convex.worst_midpoint < 1.0);
  CHECK(concavity_certificate(MomentRegion::smoothed_union(
                                  MomentRegion::pfamily({1, 1, 1}, 0.5),
                                  MomentRegion::ellipsoid({0.05, 4, 4}), 0.01))
            .concave);
}

TEST_CASE("systole bracket examples") {
  const auto e = MomentRegion::ellipsoid({1, 2});
  const CanonicalFunction fe(e);
  CHECK(systole_bracket(e, {1, 1}).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(scan_bracket_2d(fe, 1, 1, 2000) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(systole_bracket(e, {1, 0}).value == doctest::Approx(1.0).epsilon(1e-12));
  const auto p = MomentRegion::pfamily({1, 1}, 0.5);
  const CanonicalFunction fp(p);
  // With x = s^2, y = t^2, s + t = 1: min 2 s^2 + 3 t^2 at s = 3/5 gives
  // 6/5, below both vertex values 2 and 3.
  CHECK(systole_bracket(p, {2, 3}).value == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(scan_bracket_2d(fp, 2, 3, 4000) == doctest::Approx(1.2).epsilon(1e-6));
  CHECK_THROWS_AS(systole_bracket(MomentRegion::pfamily({1, 1}, 2.0), {1, 1}),
                  Error);
  CHECK_THROWS_AS(systole_bracket(e, {0, 0}), Error);
}

TEST_CASE("bracket interior minimum on a union region") {
  // Two ellipsoids meeting at an interior corner; the blended boundary makes
  // the minimum of <x, (1, 1)> interior to the open stratum.
  const auto u = MomentRegion::smoothed_union(MomentRegion::ellipsoid({1, 4}),
                                              MomentRegion::ellipsoid({1, 4}).scaled(1.0),
                                              0.01);
  const CanonicalFunction f(u);
  CHECK(systole_bracket(u, {1, 1}).value ==
        doctest::Approx(scan_bracket_2d(f, 1, 1, 20000)).epsilon(1e-7));
  const auto w = MomentRegion::smoothed_union(MomentRegion::ellipsoid({2, 2}),
                                              MomentRegion::ellipsoid({0.5, 6}),
                                              0.05);
  const CanonicalFunction g(w);
  for (auto v : {std::vector<long>{1, 1}, {3, 1}, {1, 5}}) {
    CHECK(systole_bracket(w, v).value ==
          doctest::Approx(scan_bracket_2d(g, v[0], v[1], 20000)).epsilon(1e-7));
  }
}

TEST_CASE("systole of concave regions") {
  CHECK(systole_concave(MomentRegion::ellipsoid({1, 2})).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(systole_concave(MomentRegion::ellipsoid({3, 5, 7})).value ==
        doctest::Approx(3.0).epsilon(1e-12));
  const auto p = MomentRegion::pfamily({1, 2}, 0.5);
  const auto r = systole_concave(p);
  // [(1, 1)]: x = s^2, y = 2 t^2, min s^2 + 2 t^2 on s + t = 1 is 2/3.
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(r.complete);
  CHECK(r.v_max >= 1);
  // Exhaustive oracle: all v with |v|_1 <= 10 by dense boundary scans.
  const CanonicalFunction f(p);
  double best = 1e300;
  for (int a = 0; a <= 10; ++a) {
    for (int b = 0; a + b <= 10; ++b) {
      if (a + b == 0) continue;
      best = std::min(best, scan_bracket_2d(f, a, b, 400));
    }
  }
  CHECK(r.value == doctest::Approx(best).epsilon(1e-5));
  CHECK(r.value <= best + 1e-12);

  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const auto a = random_widths(n, rng);
    REQUIRE(std::abs(systole_concave(MomentRegion::ellipsoid(a)).value - a[0]) <=
            1e-8);
  }
  CHECK_THROWS_AS(systole_concave(MomentRegion::pfamily({1, 1}, 2.0)), Error);
}

TEST_CASE("systole is monotone under inclusion of concave regions") {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> pd(0.3, 1.0);
  std::uniform_real_distribution<double> grow(1.0, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const auto a = random_widths(n, rng);
    const double p = pd(rng);
    // Larger widths and larger p (for p <= 1) both enlarge the region.
    std::vector<double> b = a;
    const double s = grow(rng);
    for (double& x : b) x *= s;
    const double q = std::min(1.0, p + 0.2);
    const auto inner = MomentRegion::pfamily(a, p);
    const auto outer = MomentRegion::pfamily(b, q);
    CHECK(systole_concave(inner).value <= systole_concave(outer).value + 1e-12);
  }
}
