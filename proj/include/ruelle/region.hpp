#pragma once

#include <memory>
#include <vector>

#include "ruelle/core.hpp"

namespace ruelle {

enum class RegionKind { Ellipsoid, PFamily, RadialProfile, SmoothedUnion };

std::string_view to_string(RegionKind kind);

struct RegionData;

// Star-shaped moment region in [0, inf)^n. Immutable; copies share data.
class MomentRegion {
 public:
  // Widths must be ascending (UnsortedWidths otherwise).
  static MomentRegion ellipsoid(std::vector<double> widths);
  // f = (sum (x_i / a_i)^p)^(1/p); p = 1 is the ellipsoid, p < 1 concave,
  // p > 1 convex.
  static MomentRegion pfamily(std::vector<double> widths, double p);
  // R on the simplex lattice {k in Z^n_{>=0} : sum k = resolution}, values
  // in lexicographic order of (k_1, ..., k_{n-1}). Resolution must be a
  // positive multiple of 3 (cubic interpolation on macro-simplices).
  static MomentRegion radial_profile(int n, int resolution,
                                     std::vector<double> values);
  // Power-mean blend f = (f_L^-q + f_R^-q)^(-1/q) with q chosen so that
  // L u R is contained in the result, which is contained in (1 + collar)
  // times L u R.
  static MomentRegion smoothed_union(const MomentRegion& left,
                                     const MomentRegion& right, double collar);

  int dim() const;
  RegionKind kind() const;

  const std::vector<double>& widths() const;  // Ellipsoid, PFamily
  double exponent() const;                    // PFamily
  int resolution() const;                     // RadialProfile
  const std::vector<double>& values() const;  // RadialProfile
  const MomentRegion& left() const;           // SmoothedUnion
  const MomentRegion& right() const;          // SmoothedUnion
  double collar() const;                      // SmoothedUnion
  double blend_exponent() const;              // SmoothedUnion, q

  // s * Omega.
  MomentRegion scaled(double s) const;

  // Radius R(e_i) of the region along each coordinate axis.
  std::vector<double> intercepts() const;
  // Geometric refinement levels the angular quadrature should place at the
  // ends of each coordinate range.
  int grading_levels() const;
  // True when f is linear, so its Hessian vanishes identically.
  bool is_linear() const;
  // True when derivatives are closed form (no finite differences).
  bool analytic_derivatives() const;
  // Smallest exponent among PFamily constituents (1 for other kinds).
  double min_exponent() const;

  // Number of lattice values a radial profile of this size needs.
  static int profile_lattice_size(int n, int resolution);

  const RegionData& data() const { return *data_; }

 private:
  explicit MomentRegion(std::shared_ptr<const RegionData> d)
      : data_(std::move(d)) {}
  std::shared_ptr<const RegionData> data_;
};

// Degree-1 homogeneous function with f = 1 on the outer boundary.
class CanonicalFunction {
 public:
  explicit CanonicalFunction(MomentRegion region);

  const MomentRegion& region() const { return region_; }
  int dim() const { return region_.dim(); }

  // Throw EvaluationAtOrigin if |x|_1 < 1e-12.
  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  void value_gradient(const Point& x, double& f, Point& grad) const;
  PointMatrix hessian(const Point& x) const;
  // R(u) = 1 / f(u) for a unit direction u (sum u = 1).
  double radius(const Point& u) const;

 private:
  MomentRegion region_;
};

CanonicalFunction canonical_function(const MomentRegion& region);

}  // namespace ruelle
