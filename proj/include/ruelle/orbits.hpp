#pragma once

#include <vector>

#include "ruelle/paths.hpp"
#include "ruelle/region.hpp"

namespace ruelle {

enum class OrbitFrame { Hamiltonian, Reeb };

// Closed orbit of the canonical Hamiltonian on the boundary of a toric
// domain, described in moment coordinates.
struct OrbitRecord {
  Point moment_point;        // x on the outer boundary, x_j = 0 off support
  std::vector<int> support;  // coordinates with x_j > 0
  double period = 0.0;
  Point rotation;            // theta_j = T d_j f(x); +inf allowed off support
  // Part of a continuum of closed orbits: every |support| >= 2 orbit sweeps
  // a torus of orbits, and integer off-support theta makes the orbit
  // degenerate in the normal directions.
  bool family = false;
};

struct OrbitOptions {
  int grid = 64;           // lattice resolution of each boundary stratum
  long budget = 200000;    // winding vectors examined per stratum
  double integer_tol = 1e-8;
};

struct OrbitEnumeration {
  std::vector<OrbitRecord> records;
  long candidates = 0;     // winding vectors examined
  bool truncated = false;  // some stratum ran out of budget
};

// All closed orbits with period <= t_max, stratum by stratum. Ellipsoid
// strata are handled exactly; other regions by a grid scan of the gradient
// direction followed by bisection (two-dimensional strata) or Newton's
// method. Throws ResolutionTooCoarse when Newton stalls inside a stratum.
OrbitEnumeration enumerate_orbits(const MomentRegion& region, double t_max,
                                  const OrbitOptions& opts = {});

// Index from the block decomposition of the linearised flow: a loop for each
// supported coordinate, the nilpotent shear on the support (exact when the
// Hessian block vanishes, otherwise the bound -|support|), and a rotation
// block for every other coordinate. Reeb frame adds one.
IndexResult lcz_toric_orbit(const OrbitRecord& record,
                            const MomentRegion& region,
                            OrbitFrame frame = OrbitFrame::Hamiltonian);

}  // namespace ruelle
