#pragma once

#include <cstdint>
#include <vector>

#include "ruelle/quadrature.hpp"
#include "ruelle/region.hpp"

namespace ruelle {

// A computed number with its error estimate. closed_form results carry a
// zero error.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool closed_form = false;
  long evaluations = 0;
};

// Sum_i of the integral of d_i f over the region. Degree-0 integrands are
// integrated radially in closed form, leaving a simplex quadrature.
Estimate ruelle_invariant_toric(const MomentRegion& region,
                                QuadratureSpec spec = {});

// Euclidean volume of the moment region (= symplectic volume of X).
Estimate volume_toric(const MomentRegion& region, QuadratureSpec spec = {});

struct LaplacianEstimate : Estimate {
  // Set for PFamily constituents with p < 1/2, where the Hessian is not
  // known to be integrable.
  bool non_integrable_hessian = false;
};

// Integral over X of the Euclidean Laplacian of f o mu, written on the
// moment region as sum_j 4 pi (d_j f + x_j d_jj f).
LaplacianEstimate laplacian_functional(const MomentRegion& region,
                                       QuadratureSpec spec = {});

// Integral of g over the region for g homogeneous of degree 0.
Estimate integrate_degree_zero(const MomentRegion& region,
                               const SimplexIntegrand& g, QuadratureSpec spec);

struct MonotonicityResult {
  bool monotone = true;
  Point witness;  // direction with a nonpositive gradient component
  int component = -1;
  long checked = 0;
};

// Samples grad f at interior simplex lattice directions (at least `samples`
// of them). The gradient is degree 0, so directions cover the boundary.
MonotonicityResult is_strictly_monotone(const MomentRegion& region,
                                        long samples = 10000);

struct ConcavityResult {
  bool concave = true;
  Point witness_a, witness_b;  // boundary chord whose midpoint lies in Omega
  double worst_midpoint = 0.0; // smallest f at a chord midpoint
  long chords = 0;
};

// Midpoint test for convexity of the complement: for boundary points x, y
// with f = 1, f((x+y)/2) must be >= 1.
ConcavityResult concavity_certificate(const MomentRegion& region,
                                      long chords = 2000,
                                      std::uint64_t seed = 0,
                                      double tol = 1e-9);

struct BracketResult {
  double value = 0.0;
  Point argmin;
};

struct BracketOptions {
  bool check_concavity = true;
  long concavity_chords = 500;
};

// min <x, v> over the closure of the boundary stratum with support supp(v).
BracketResult systole_bracket(const MomentRegion& region,
                              const std::vector<long>& v,
                              const BracketOptions& opts = {});

struct SystoleOptions {
  // Lower bound on <x, 1>/n for the enumeration radius; <= 0 means
  // estimate it on a boundary grid.
  double delta = 0.0;
  long budget = 1L << 20;  // bracket evaluations
  BracketOptions bracket;
};

struct SystoleResult {
  double value = 0.0;
  std::vector<long> minimizer;
  Point argmin;
  long v_max = 0;        // |v|_1 radius implied by the spec'd bound
  long evaluated = 0;    // brackets computed
  long pruned = 0;       // lattice vectors in the radius dominated by a
                         // computed bracket
  bool complete = true;  // false when the budget ran out
};

// c(X) = min [v] over nonzero v in Z^n_{>=0}. Since v >= 1_S on its support
// S, [v] >= [1_S]; the indicator vectors therefore decide the minimum and
// every other lattice vector is pruned.
SystoleResult systole_concave(const MomentRegion& region,
                              const SystoleOptions& opts = {});

}  // namespace ruelle
