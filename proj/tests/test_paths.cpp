#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ruelle/paths.hpp"

using namespace ruelle;

namespace {

Matrix rot2(double phi) {
  Matrix m(2, 2);
  m << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return m;
}

SymplecticPath rotation_path(double theta, int intervals = 400) {
  return SymplecticPath::sample(
      1, [&](double t) { return rot2(kTwoPi * theta * t); }, 1.0, intervals,
      PathTag::DiagonalUnitary);
}

SymplecticPath diagonal_path(double a, double b, int intervals = 400) {
  return SymplecticPath::sample(
      2,
      [&](double t) {
        Eigen::VectorXd ang(2);
        ang << kTwoPi * a * t, kTwoPi * b * t;
        return diagonal_unitary(ang);
      },
      1.0, intervals, PathTag::DiagonalUnitary);
}

SymplecticPath shear_path(double t_end, int intervals = 100) {
  return SymplecticPath::sample(
      1,
      [](double t) {
        Matrix m(2, 2);
        m << 1.0, t, 0.0, 1.0;
        return m;
      },
      t_end, intervals, PathTag::Unipotent);
}

SymplecticPath hyperbolic_path(int intervals = 50) {
  return SymplecticPath::sample(
      1,
      [](double t) {
        Matrix m(2, 2);
        m << std::exp(t), 0.0, 0.0, std::exp(-t);
        return m;
      },
      1.0, intervals);
}

// Path generated by piecewise constant symmetric S_k: A' = W S A.
struct GeneratedPath {
  SymplecticPath path;
  double trace_integral;
};

GeneratedPath psd_generated_path(int n, std::mt19937_64& rng, int steps,
                                 double dt, bool psd) {
  const Matrix w = oracle::standard_omega(n);
  std::vector<double> t{0.0};
  std::vector<Matrix> m{Matrix::Identity(2 * n, 2 * n)};
  double trace = 0.0;
  Matrix a = m.front();
  for (int k = 0; k < steps; ++k) {
    const Matrix s = psd ? oracle::random_psd(2 * n, rng, 0.7)
                         : oracle::random_symmetric(2 * n, rng, 0.7);
    trace += s.trace() * dt;
    a = oracle::expm(w * s * dt) * a;
    t.push_back((k + 1) * dt);
    m.push_back(a);
  }
  return {SymplecticPath(n, t, m, PathTag::General, 1e-8), trace};
}

}  // namespace

TEST_CASE("path validation") {
  CHECK_THROWS_AS(SymplecticPath(1, {0.0, 0.0}, {rot2(0), rot2(0.1)}), Error);
  CHECK_THROWS_AS(SymplecticPath(1, {0.1}, {rot2(0)}), Error);
  CHECK_THROWS_AS(SymplecticPath(1, {0.0}, {rot2(0.3)}), Error);
}

TEST_CASE("determinant lift") {
  CHECK(lift_rotation(rotation_path(3.7)).value ==
        doctest::Approx(3.7).epsilon(1e-12));
  CHECK(lift_rotation(diagonal_path(1.3, -0.4)).value ==
        doctest::Approx(0.9).epsilon(1e-12));
  CHECK(std::abs(lift_rotation(hyperbolic_path()).value) < 1e-14);
  // Polar oracle: the unitary factor of every hyperbolic sample is I.
  const auto hp = hyperbolic_path();
  for (std::size_t i = 0; i < hp.size(); ++i) {
    REQUIRE(max_abs(oracle::svd_unitary(hp.matrix(i)) -
                    Matrix::Identity(2, 2)) < 1e-14);
  }
  CHECK_THROWS_AS(lift_rotation(rotation_path(3.7, 10)), Error);
  try {
    lift_rotation(rotation_path(3.7, 10));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UndersampledPath);
  }
}

TEST_CASE("eigenvalue lift") {
  CHECK(std::abs(lift_eigenvalue_rotation(shear_path(1.0)).value) == 0.0);
  CHECK(std::abs(lift_eigenvalue_rotation(shear_path(50.0)).value) == 0.0);
  CHECK(lift_eigenvalue_rotation(rotation_path(1.25)).value ==
        doctest::Approx(1.25).epsilon(1e-12));
  const auto constant = SymplecticPath::sample(
      2, [](double) { return Matrix(Matrix::Identity(4, 4)); }, 1.0, 10);
  CHECK(lift_eigenvalue_rotation(constant).value == 0.0);
}

TEST_CASE("Maslov index of loops") {
  CHECK(maslov_index(rotation_path(2.0)) == 2);
  const auto constant = SymplecticPath::sample(
      1, [](double) { return Matrix(Matrix::Identity(2, 2)); }, 1.0, 5);
  CHECK(maslov_index(constant) == 0);
  CHECK(maslov_index(diagonal_path(1.0, -1.0)) == 0);
  CHECK(maslov_index(diagonal_path(1.0, 2.0)) == 3);
  CHECK_THROWS_AS(maslov_index(rotation_path(1.5)), Error);
}

TEST_CASE("loop property of the determinant lift") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = psd_generated_path(1, rng, 200, 0.005, false);
    const auto loop = rotation_path(trial % 5 - 2, 200);
    const auto prod = loop.pointwise_product(g.path);
    REQUIRE(lift_rotation(prod).value ==
            doctest::Approx(maslov_index(loop) + lift_rotation(g.path).value)
                .epsilon(1e-6));
  }
}

TEST_CASE("signature axiom") {
  CHECK(cz_signature_axiom(0.1 * Matrix::Identity(2, 2)).index == 1);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.1;
  d(1, 1) = -0.1;
  CHECK(cz_signature_axiom(d).index == 0);
  CHECK(cz_signature_axiom(-0.1 * Matrix::Identity(4, 4)).index == -2);
  CHECK_THROWS_AS(cz_signature_axiom(Matrix::Zero(2, 2)), Error);
  CHECK_THROWS_AS(cz_signature_axiom(1.5 * Matrix::Identity(2, 2)), Error);

  // For A = alpha I on a complex line the path is a rotation by alpha turns,
  // whose index from the U(1) formula is 2 ceil(alpha) - 1.
  for (double alpha : {0.3, -0.3, 0.9, -0.9}) {
    const auto ax = cz_signature_axiom(alpha * Matrix::Identity(2, 2));
    CHECK(ax.index == lcz_u1(alpha));
    CHECK(lift_rotation(ax.path).value == doctest::Approx(alpha).epsilon(1e-12));
  }
}

TEST_CASE("U(1) index formula") {
  CHECK(lcz_u1(0.0) == -1);
  CHECK(lcz_u1(1.0) == 1);
  CHECK(lcz_u1(-0.5) == -1);
  CHECK(lcz_u1(0.5) == 1);
  CHECK(lcz_u1(1.000001) == 3);
  CHECK(lcz_u1(-1.0) == -3);
}

TEST_CASE("block sums") {
  auto r = lcz_block_sum({U1Rotation{1.0}, U1Rotation{0.5}});
  CHECK(r.exact);
  CHECK(r.value == 2);
  r = lcz_block_sum({Loop{3}, U1Rotation{0.0}});
  CHECK(r.exact);
  CHECK(r.value == 5);
  r = lcz_block_sum({U1Rotation{1.0}, UnipotentZeroRho{1}});
  CHECK_FALSE(r.exact);
  CHECK(r.exact_part == 1);
  CHECK(r.value == 0);
  r = lcz_block_sum({U1Rotation{std::numeric_limits<double>::infinity()},
                     Loop{1}});
  CHECK(r.unbounded);
  CHECK(r.at_least(1000));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BlockIndex> blocks;
    for (int i = 0; i < 5; ++i) {
      if (i % 2) blocks.push_back(U1Rotation{th(rng)});
      else blocks.push_back(Loop{static_cast<long>(th(rng) * 3)});
    }
    const long v = lcz_block_sum(blocks).value;
    std::shuffle(blocks.begin(), blocks.end(), rng);
    REQUIRE(lcz_block_sum(blocks).value == v);
  }
}

TEST_CASE("homogenized rotation") {
  auto h = homogenized_rotation(rotation_path(0.3, 50), 10);
  CHECK(h.rho == doctest::Approx(0.3).epsilon(1e-9));
  auto hd = homogenized_rotation(rotation_path(0.3, 50), 10,
                                 LiftMethod::Determinant);
  CHECK(hd.rho == doctest::Approx(0.3).epsilon(1e-9));

  const auto shear = shear_path(1.0, 20);
  auto hs = homogenized_rotation(shear, 20);
  CHECK(std::abs(hs.rho) < 1e-6);
  CHECK(lift_eigenvalue_rotation(shear.power(20)).value == 0.0);

  auto hh = homogenized_rotation(hyperbolic_path(20), 10);
  CHECK(std::abs(hh.rho) < 1e-12);
  CHECK(hh.sequence.front().first == 1);
  CHECK(hh.sequence.back().first == 10);
}

TEST_CASE("quasimorphism defect and equivalence of the two lifts") {
  std::mt19937_64 rng(97);
  double worst_defect = 0.0;
  double worst_gap = 0.0;
  int eigen_failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto a = psd_generated_path(2, rng, 40, 0.05, false);
    auto b = psd_generated_path(2, rng, 40, 0.05, false);
    const double ra = lift_rotation(a.path).value;
    const double rb = lift_rotation(b.path).value;
    const double rab = lift_rotation(a.path.pointwise_product(b.path)).value;
    worst_defect = std::max(worst_defect, std::abs(rab - ra - rb));
    if (trial < 100) {
      try {
        const double ea = lift_eigenvalue_rotation(a.path).value;
        worst_gap = std::max(worst_gap, std::abs(ra - ea));
      } catch (const Error& e) {
        // Krein collisions can defeat the fixed sampling of the eigenvalue
        // lift; these samples are counted, not compared.
        ++eigen_failures;
      }
    }
  }
  MESSAGE("max determinant defect " << worst_defect << ", max |r - e| "
                                    << worst_gap);
  CHECK(worst_defect < 2.0);
  CHECK(worst_gap < 2.0);
  CHECK(eigen_failures < 10);
}

TEST_CASE("trace bound for paths generated by positive semidefinite S") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    auto g = psd_generated_path(n, rng, 60, 0.02, true);
    const double r = lift_rotation(g.path).value;
    REQUIRE(r <= 8.0 * n * n / kPi * g.trace_integral);
  }
}
