#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ruelle/orbits.hpp"

using namespace ruelle;

namespace {

const OrbitRecord* find(const OrbitEnumeration& e, std::vector<int> support,
                        double period, std::vector<long> winding = {}) {
  for (const auto& r : e.records) {
    if (r.support != support || std::abs(r.period - period) > 1e-9) continue;
    bool match = true;
    for (std::size_t a = 0; a < winding.size(); ++a) {
      if (r.rotation(support[a]) != double(winding[a])) match = false;
    }
    if (match) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("ellipsoid with irrational width ratio has only axis orbits") {
  const double r2 = std::sqrt(2.0);
  const auto region = MomentRegion::ellipsoid({1.0, r2});
  const auto e = enumerate_orbits(region, 5.0);
  int axis0 = 0, axis1 = 0;
  for (const auto& r : e.records) {
    REQUIRE(r.support.size() == 1);
    if (r.support[0] == 0) {
      ++axis0;
      CHECK(r.period == doctest::Approx(axis0));
      CHECK(r.rotation(1) == doctest::Approx(axis0 / r2));
    } else {
      ++axis1;
      CHECK(r.period == doctest::Approx(axis1 * r2));
    }
    CHECK_FALSE(r.family);
  }
  CHECK(axis0 == 5);
  CHECK(axis1 == 3);
  CHECK_FALSE(e.truncated);
}

TEST_CASE("round ellipsoid closes everywhere at T = 1") {
  const auto e = enumerate_orbits(MomentRegion::ellipsoid({1, 1}), 1.5);
  const OrbitRecord* r = find(e, {0, 1}, 1.0);
  REQUIRE(r != nullptr);
  CHECK(r->family);
  // Axis orbits have integer normal rotation and are degenerate too.
  const OrbitRecord* a = find(e, {0}, 1.0);
  REQUIRE(a != nullptr);
  CHECK(a->family);
}

TEST_CASE("index of ellipsoid orbits") {
  const auto region = MomentRegion::ellipsoid({1, 2});
  const auto e = enumerate_orbits(region, 2.0);
  const OrbitRecord* g1 = find(e, {0}, 1.0);
  const OrbitRecord* g2 = find(e, {1}, 2.0);
  REQUIRE(g1 != nullptr);
  REQUIRE(g2 != nullptr);
  CHECK(g1->rotation(1) == doctest::Approx(0.5));
  const auto h1 = lcz_toric_orbit(*g1, region);
  CHECK(h1.exact);
  CHECK(h1.value == 2);
  CHECK(lcz_toric_orbit(*g1, region, OrbitFrame::Reeb).value == 3);
  const auto h2 = lcz_toric_orbit(*g2, region);
  CHECK(h2.exact);
  CHECK(h2.value == 4);
  // The k = 2 iterate of the first orbit: (2*2 - 1) + (2*1 - 1) = 4.
  const OrbitRecord* g1k2 = find(e, {0}, 2.0);
  REQUIRE(g1k2 != nullptr);
  CHECK(lcz_toric_orbit(*g1k2, region).value == 4);
}

TEST_CASE("pfamily p = 1/2 two-dimensional families match the closed form") {
  // With x = (s^2, t^2), s + t = 1, grad f = (1/s, 1/t). Closing requires
  // T/s = k1 and T/t = k2, i.e. s = k2/(k1+k2) and T = k1 k2/(k1+k2).
  const auto region = MomentRegion::pfamily({1, 1}, 0.5);
  const double t_max = 3.0;
  const auto e = enumerate_orbits(region, t_max);
  long expected = 0;
  for (long k1 = 1; k1 <= 200; ++k1) {
    for (long k2 = 1; k2 <= 200; ++k2) {
      const double T = double(k1 * k2) / (k1 + k2);
      const double s = double(k2) / (k1 + k2);
      // Only directions the default grid can resolve.
      if (T > t_max || s < 1.0 / 64 || s > 63.0 / 64) continue;
      ++expected;
      const OrbitRecord* r = find(e, {0, 1}, T, {k1, k2});
      REQUIRE(r != nullptr);
      CHECK(r->family);
      CHECK(r->moment_point(0) == doctest::Approx(s * s).epsilon(1e-9));
    }
  }
  long found = 0;
  for (const auto& r : e.records) {
    if (r.support.size() != 2) continue;
    ++found;
    const double s = std::sqrt(r.moment_point(0));
    const double t = std::sqrt(r.moment_point(1));
    CHECK(s + t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.period / s == doctest::Approx(std::round(r.period / s)).epsilon(1e-8));
    CHECK(r.period / t == doctest::Approx(std::round(r.period / t)).epsilon(1e-8));
  }
  CHECK(found >= expected);
  CHECK(expected > 10);
}

TEST_CASE("three-dimensional stratum solved by Newton") {
  // a = (1,1,1), p = 1/2: grad f = (1/s_i) with sum s_i = 1, so the orbit
  // with windings k has s_i = T / k_i and T = 1 / sum(1/k_i).
  const auto region = MomentRegion::pfamily({1, 1, 1}, 0.5);
  const double t_max = 0.45;
  const auto e = enumerate_orbits(region, t_max);
  int checked = 0;
  for (long a = 1; a <= 8; ++a) {
    for (long b = 1; b <= 8; ++b) {
      for (long c = 1; c <= 8; ++c) {
        const double T = 1.0 / (1.0 / a + 1.0 / b + 1.0 / c);
        if (T > t_max) continue;
        const OrbitRecord* r = find(e, {0, 1, 2}, T, {a, b, c});
        REQUIRE(r != nullptr);
        CHECK(std::sqrt(r->moment_point(0)) == doctest::Approx(T / a).epsilon(1e-9));
        ++checked;
      }
    }
  }
  // (1,1,1) and the permutations of (1,1,c), c = 2..4.
  CHECK(checked == 10);
  long three = 0;
  for (const auto& r : e.records) {
    if (r.support.size() == 3) ++three;
    CHECK(lcz_toric_orbit(r, region).at_least(3));
  }
  CHECK(three == checked);
}

TEST_CASE("certified index bound is at least n on strictly monotone regions") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> width(0.5, 3.0);
  OrbitOptions opts;
  opts.budget = 20000;
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial % 2;
    std::vector<double> a(n);
    for (double& x : a) x = width(rng);
    std::sort(a.begin(), a.end());
    for (double p : {0.5, 0.8}) {
      const auto region = MomentRegion::pfamily(a, p);
      const auto e = enumerate_orbits(region, (n == 2 ? 2.0 : 1.2) * a.back(), opts);
      CHECK(!e.records.empty());
      for (const auto& r : e.records) {
        CHECK(lcz_toric_orbit(r, region).at_least(n));
        CHECK(lcz_toric_orbit(r, region, OrbitFrame::Reeb).at_least(n + 1));
      }
    }
  }
}

TEST_CASE("orbit enumeration preconditions") {
  std::vector<double> dented;
  for (int k = 0; k <= 3; ++k) dented.push_back(1.0 + 5.0 * k / 3.0);
  CHECK_THROWS_AS(
      enumerate_orbits(MomentRegion::radial_profile(2, 3, dented), 1.0), Error);
  CHECK_THROWS_AS(enumerate_orbits(MomentRegion::ellipsoid({1, 1}), 0.0), Error);
  OrbitOptions small;
  small.budget = 3;
  const auto e = enumerate_orbits(MomentRegion::ellipsoid({1, 2}), 10.0, small);
  CHECK(e.truncated);
}
