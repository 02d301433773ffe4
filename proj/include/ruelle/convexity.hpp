#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ruelle/toric.hpp"

namespace ruelle {

struct EllipsoidQuantities {
  double systole = 0.0;    // a_1
  double laplacian = 0.0;  // S(H_E) = (4 pi / n!) (sum 1/a_i) prod a_i
  double volume = 0.0;     // prod a_i / n!
};

// Closed forms for E(a). Widths must be positive and ascending.
EllipsoidQuantities ellipsoid_quantities(const std::vector<double>& widths);

struct MainConstant {
  int n = 0;
  double log_value = 0.0;
  double value = 0.0;        // +inf when exp(log_value) overflows
  bool overflowing = false;
};

// C(n) = 2^(2n+5) n^(2n+3) exp(8 n^4), kept in log space.
MainConstant main_constant(int n);

struct InequalityReport {
  int n = 0;
  double ruelle = 0.0;
  double ruelle_error = 0.0;
  double systole = 0.0;
  double volume = 0.0;
  double volume_error = 0.0;
  MainConstant constant;
  double lhs = 0.0;      // Ru * c
  double rhs = 0.0;      // C(n) * vol, +inf when the constant overflows
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double margin = 0.0;   // log_rhs - log_lhs
  bool satisfied = false;
};

// Ru(X) c(X) <= C(n) vol(X) for a convex toric region (Ellipsoid or PFamily
// with p >= 1). The systole of these regions is the smallest axis width.
InequalityReport check_main_inequality(const MomentRegion& region,
                                       QuadratureSpec spec = {});

struct SandwichReport {
  int n = 0;
  double laplacian_inner = 0.0;  // S(H), H the canonical Hamiltonian of inner
  double laplacian_inner_error = 0.0;
  double laplacian_outer = 0.0;  // S(G), G that of outer
  double laplacian_outer_error = 0.0;
  double L = 0.0;                // constant used in the bound
  double L_computed = 0.0;       // max H / G on the direction grid
  double log_factor = 0.0;       // L d^2 / 2 with d = 2n
  double log_ratio = 0.0;        // log S(H) - log S(G)
  long grid_points = 0;
  long hessian_samples = 0;
  bool holds = false;
};

struct SandwichOptions {
  int grid_points = 5000;   // simplex directions for G <= H <= L G
  int hessian_samples = 200;
  std::uint64_t seed = 0;
  QuadratureSpec quadrature;
};

// S(H) <= exp(L d^2 / 2) S(G) for G <= H <= L G. inner must lie inside
// outer, which makes H >= G. When L is absent the smallest valid L is used.
// Throws SandwichHypothesisFailed with a witness when the ordering, the
// supplied L or the sampled convexity of either Hamiltonian fails.
SandwichReport sandwich_check(const MomentRegion& inner,
                              const MomentRegion& outer,
                              std::optional<double> L = std::nullopt,
                              const SandwichOptions& opts = {});

struct InscribedEllipsoid {
  std::vector<double> widths;  // ascending order is not imposed
  double factor = 0.0;         // smallest s with region inside s E
  long grid_points = 0;
  long iterations = 0;
};

// Largest-volume axis-aligned ellipsoid region inside the given region,
// by pattern search over log widths with containment checked on a
// direction grid. Throws ContainmentCheckFailed when the result leaves the
// region on a finer validation grid.
InscribedEllipsoid inscribed_ellipsoid(const MomentRegion& region,
                                       int grid_points = 20000);

struct CounterexampleReport {
  double volume_base = 0.0;
  double volume = 0.0;
  double volume_error = 0.0;
  double ruelle = 0.0;
  double ruelle_error = 0.0;
  double tail_bound = 0.0;     // lower bound for Ru from the part of Delta
                               // outside Xi
  double systole_base = 0.0;
  double systole = 0.0;
  bool systole_complete = true;
  bool contains_base = true;   // R >= R_base on the direction grid
  bool concave = true;
  long concavity_chords = 0;

  bool volume_ok = false;      // vol_base <= vol <= vol_base + eps
  bool ruelle_ok = false;      // Ru >= C_target
  bool systole_ok = false;     // c >= c_base
  bool tail_ok = false;        // Ru >= tail_bound

  bool verified() const {
    return volume_ok && ruelle_ok && systole_ok && tail_ok && contains_base &&
           concave;
  }
};

struct CounterexampleSpec {
  MomentRegion base;
  double c_target = 0.0;
  double epsilon = 0.0;
  double A = 0.0;
  double B = 0.0;
  double delta = 0.0;       // smoothing collar; 0 when unchanged
  bool unchanged = false;   // base already has Ru >= C_target
  MomentRegion result;
  CounterexampleReport report;
};

struct CounterexampleOptions {
  double a_max = 1048576.0;        // 2^20
  double volume_tol = 1e-3;        // relative slack on the volume checks
  double max_collar = 0.01;
  int concavity_retries = 3;       // collar divided by 4 on each retry
  long concavity_chords = 2000;
  std::uint64_t seed = 0;
  QuadratureSpec quadrature{1e-7, 1e-14, 16, -1, 4000, Execution::Parallel};
};

// Concave region with vol <= vol(base) + eps and Ru >= C_target whose
// systole is at least that of the base: the union of the base with a thin
// ellipsoid Delta = E(A^-n, A, ..., A), smoothed. Throws NoFeasibleA when no
// A <= a_max satisfies both constraints and ConcavityLost when smoothing
// keeps failing the concavity certificate.
CounterexampleSpec build_counterexample(const MomentRegion& base,
                                        double c_target, double epsilon,
                                        const CounterexampleOptions& opts = {});

// The two constraints on A, exposed for reporting.
double counterexample_tail_bound(int n, double A, double B);
double counterexample_volume_bound(int n, double A, double base_volume);

}  // namespace ruelle
