#include "ruelle/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "ruelle/flows.hpp"

namespace ruelle {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double lattice_count(int n, int m) {
  double c = 1.0;
  for (int q = 1; q < n; ++q) c = c * (m + q) / q;
  return c;
}

// All simplex lattice directions k / m with m the largest resolution giving
// at most `target` points (axes included).
std::vector<Point> direction_grid(int n, long target) {
  int m = 1;
  while (lattice_count(n, m + 1) <= double(target)) ++m;
  std::vector<Point> out;
  std::vector<int> k(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      k[pos] = left;
      Point u(n);
      for (int i = 0; i < n; ++i) u(i) = double(k[i]) / m;
      out.push_back(u);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, m);
  return out;
}

std::string describe(const Point& u) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u(i);
  os << ")";
  return os.str();
}

bool convex_toric(const MomentRegion& region) {
  return region.kind() == RegionKind::Ellipsoid ||
         (region.kind() == RegionKind::PFamily && region.exponent() >= 1.0);
}

void require_convex_toric(const MomentRegion& region, const char* what) {
  if (!convex_toric(region)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " needs an ellipsoid or a pfamily with p >= 1");
  }
}

// Sampled positive semidefiniteness of hess (f o mu). Returns false and the
// moment point of the witness on failure.
bool hessian_psd(const MomentRegion& region, int samples, std::uint64_t seed,
                 Point& witness) {
  const ToricField field(region);
  const int n = region.dim();
  const Vector box = field.half_widths();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector z(2 * n), grad(2 * n);
  Matrix hess(2 * n, 2 * n);
  for (int s = 0; s < samples; ++s) {
    for (int a = 0; a < 2 * n; ++a) z(a) = box(a) * unit(rng);
    if (z.squaredNorm() < 1e-12) continue;
    field.derivatives(z, grad, hess);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hess, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
      witness = field.moment(z);
      return false;
    }
  }
  return true;
}

}  // namespace

EllipsoidQuantities ellipsoid_quantities(const std::vector<double>& widths) {
  if (widths.empty()) {
    throw Error(ErrorCode::InvalidArgument, "ellipsoid needs at least one width");
  }
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (!(widths[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "widths must be positive");
    }
    if (i > 0 && widths[i] < widths[i - 1]) {
      throw Error(ErrorCode::UnsortedWidths, "ellipsoid widths must ascend");
    }
  }
  const int n = int(widths.size());
  double prod = 1.0, inv = 0.0;
  for (double a : widths) {
    prod *= a;
    inv += 1.0 / a;
  }
  EllipsoidQuantities q;
  q.systole = widths.front();
  q.volume = prod / factorial(n);
  q.laplacian = 4.0 * kPi * inv * q.volume;
  return q;
}

MainConstant main_constant(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "main_constant needs n >= 1");
  MainConstant c;
  c.n = n;
  const double nd = n;
  c.log_value = (2 * nd + 5) * std::log(2.0) + (2 * nd + 3) * std::log(nd) +
                8.0 * nd * nd * nd * nd;
  c.overflowing = c.log_value >= std::log(std::numeric_limits<double>::max());
  c.value = c.overflowing ? std::numeric_limits<double>::infinity()
                          : std::exp(c.log_value);
  return c;
}

InequalityReport check_main_inequality(const MomentRegion& region,
                                       QuadratureSpec spec) {
  require_convex_toric(region, "check_main_inequality");
  InequalityReport r;
  r.n = region.dim();
  const Estimate ru = ruelle_invariant_toric(region, spec);
  const Estimate vol = volume_toric(region, spec);
  r.ruelle = ru.value;
  r.ruelle_error = ru.error;
  r.volume = vol.value;
  r.volume_error = vol.error;
  r.systole = *std::min_element(region.widths().begin(), region.widths().end());
  r.constant = main_constant(r.n);
  r.lhs = r.ruelle * r.systole;
  r.rhs = r.constant.overflowing ? std::numeric_limits<double>::infinity()
                                 : r.constant.value * r.volume;
  r.log_lhs = std::log(r.lhs);
  r.log_rhs = r.constant.log_value + std::log(r.volume);
  r.margin = r.log_rhs - r.log_lhs;
  r.satisfied = r.log_lhs <= r.log_rhs;
  return r;
}

SandwichReport sandwich_check(const MomentRegion& inner,
                              const MomentRegion& outer,
                              std::optional<double> L,
                              const SandwichOptions& opts) {
  if (inner.dim() != outer.dim()) {
    throw Error(ErrorCode::InvalidArgument, "sandwich regions of unequal dim");
  }
  require_convex_toric(inner, "sandwich_check");
  require_convex_toric(outer, "sandwich_check");
  if (L && !(*L >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sandwich constant L must be >= 1");
  }
  const int n = inner.dim();
  SandwichReport r;
  r.n = n;

  // H = f_inner o mu and G = f_outer o mu are both degree one, so the
  // ordering is decided on directions of the simplex.
  const CanonicalFunction h(inner), g(outer);
  const auto grid = direction_grid(n, opts.grid_points);
  r.grid_points = long(grid.size());
  double worst = 0.0;
  Point worst_u;
  for (const Point& u : grid) {
    const double fh = h.value(u), fg = g.value(u);
    if (fg > fh * (1.0 + 1e-9)) {
      throw Error(ErrorCode::SandwichHypothesisFailed,
                  "G > H at moment direction " + describe(u));
    }
    if (fh / fg > worst) {
      worst = fh / fg;
      worst_u = u;
    }
  }
  r.L_computed = std::max(1.0, worst);
  r.L = L ? *L : r.L_computed;
  if (r.L_computed > r.L * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "H > L G with L = " << r.L << " at moment direction "
       << describe(worst_u) << " (needs L >= " << r.L_computed << ")";
    throw Error(ErrorCode::SandwichHypothesisFailed, os.str());
  }

  Point witness;
  if (!hessian_psd(inner, opts.hessian_samples, opts.seed, witness) ||
      !hessian_psd(outer, opts.hessian_samples, opts.seed + 1, witness)) {
    throw Error(ErrorCode::SandwichHypothesisFailed,
                "Hessian not positive semidefinite at moment point " +
                    describe(witness));
  }
  r.hessian_samples = 2L * opts.hessian_samples;

  const LaplacianEstimate sh = laplacian_functional(inner, opts.quadrature);
  const LaplacianEstimate sg = laplacian_functional(outer, opts.quadrature);
  r.laplacian_inner = sh.value;
  r.laplacian_inner_error = sh.error;
  r.laplacian_outer = sg.value;
  r.laplacian_outer_error = sg.error;
  const double d = 2.0 * n;
  r.log_factor = 0.5 * r.L * d * d;
  r.log_ratio = std::log(sh.value) - std::log(sg.value);
  r.holds = r.log_ratio <= r.log_factor;
  return r;
}

InscribedEllipsoid inscribed_ellipsoid(const MomentRegion& region,
                                       int grid_points) {
  const int n = region.dim();
  const CanonicalFunction f(region);
  const auto grid = direction_grid(n, grid_points);
  std::vector<double> radius(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) radius[i] = f.radius(grid[i]);

  // E(a) lies in the region iff R_E(u) = 1 / sum(u_i / a_i) <= R(u) for every
  // direction u. Work with b = log a.
  auto slack = [&](const std::vector<double>& b) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += grid[i](j) * std::exp(-b[j]);
      worst = std::min(worst, radius[i] * s);  // >= 1 when contained
    }
    return worst;
  };

  const auto ax = region.intercepts();
  std::vector<double> b(n);
  for (int j = 0; j < n; ++j) b[j] = std::log(ax[j]);
  const double s0 = slack(b);
  if (s0 < 1.0) {
    for (double& x : b) x += std::log(s0);
  }

  InscribedEllipsoid out;
  out.grid_points = long(grid.size());
  // Pattern search on sum b with single-coordinate moves and transfers
  // between coordinates.
  std::vector<std::vector<double>> moves;
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    moves.push_back(e);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<double> t(n, 0.0);
      t[i] = 1.0;
      t[j] = -0.5;
      moves.push_back(t);
    }
  }
  double step = 0.25;
  while (step > 1e-10) {
    bool improved = false;
    for (const auto& mv : moves) {
      std::vector<double> trial = b;
      double gain = 0.0;
      for (int j = 0; j < n; ++j) {
        trial[j] += step * mv[j];
        gain += step * mv[j];
      }
      ++out.iterations;
      if (gain > 0.0 && slack(trial) >= 1.0 - 1e-12) {
        b = trial;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }

  out.widths.resize(n);
  for (int j = 0; j < n; ++j) out.widths[j] = std::exp(b[j]);

  // Validation on a finer grid, and the covering factor max R / R_E.
  const auto fine = direction_grid(n, 4L * grid_points);
  double factor = 0.0;
  for (const Point& u : fine) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += u(j) / out.widths[j];
    const double ratio = f.radius(u) * s;
    if (ratio < 1.0 - 1e-6) {
      throw Error(ErrorCode::ContainmentCheckFailed,
                  "inscribed ellipsoid leaves the region at direction " +
                      describe(u));
    }
    factor = std::max(factor, ratio);
  }
  out.factor = factor;
  return out;
}

double counterexample_tail_bound(int n, double A, double B) {
  return (1.0 / (factorial(n) * A) - std::pow(A, -n) * std::pow(B, n - 1)) *
         (std::pow(A, n) + (n - 1) / A);
}

double counterexample_volume_bound(int n, double A, double base_volume) {
  return std::pow(1.0 + 1.0 / A, n) * (base_volume + 1.0 / (factorial(n) * A));
}

namespace {

void verify(CounterexampleSpec& spec, const CounterexampleOptions& opts) {
  const int n = spec.base.dim();
  CounterexampleReport& r = spec.report;
  const Estimate vol = volume_toric(spec.result, opts.quadrature);
  const Estimate ru = ruelle_invariant_toric(spec.result, opts.quadrature);
  r.volume = vol.value;
  r.volume_error = vol.error;
  r.ruelle = ru.value;
  r.ruelle_error = ru.error;

  const SystoleResult cb = systole_concave(spec.base);
  const SystoleResult c = systole_concave(spec.result);
  r.systole_base = cb.value;
  r.systole = c.value;
  r.systole_complete = c.complete && cb.complete;

  const CanonicalFunction fb(spec.base), fr(spec.result);
  r.contains_base = true;
  for (const Point& u : direction_grid(n, 20000)) {
    if (fr.radius(u) < fb.radius(u) * (1.0 - 1e-12)) r.contains_base = false;
  }

  const double tol = opts.volume_tol;
  r.volume_ok = r.volume >= r.volume_base * (1.0 - tol) &&
                r.volume <= (r.volume_base + spec.epsilon) * (1.0 + tol);
  r.ruelle_ok = r.ruelle >= spec.c_target;
  r.systole_ok = r.systole >= r.systole_base * (1.0 - 1e-9);
  r.tail_ok = r.ruelle >= r.tail_bound * (1.0 - tol);
}

}  // namespace

CounterexampleSpec build_counterexample(const MomentRegion& base,
                                        double c_target, double epsilon,
                                        const CounterexampleOptions& opts) {
  const int n = base.dim();
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "counterexample needs n >= 2");
  }
  if (!(c_target >= 0.0) || !(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "counterexample needs C_target >= 0 and epsilon > 0");
  }
  const ConcavityResult base_concave =
      concavity_certificate(base, opts.concavity_chords, opts.seed);
  if (!base_concave.concave) {
    throw Error(ErrorCode::NotConcave,
                "counterexample base fails the concavity certificate");
  }

  // Xi = {x_2 + ... + x_n <= B}. For a star-shaped region the maximum of the
  // linear form is on the outer boundary.
  const CanonicalFunction fb(base);
  double reach = 0.0;
  for (const Point& u : direction_grid(n, 20000)) {
    reach = std::max(reach, fb.radius(u) * (1.0 - u(0)));
  }
  const auto ax = base.intercepts();
  for (int j = 1; j < n; ++j) reach = std::max(reach, ax[j]);
  const double B = std::exp2(std::ceil(std::log2(reach) - 1e-12));

  const double vol_base = volume_toric(base, opts.quadrature).value;
  const double ru_base = ruelle_invariant_toric(base, opts.quadrature).value;

  CounterexampleSpec spec{base, c_target, epsilon, 1.0, B, 0.0, false, base, {}};
  spec.report.volume_base = vol_base;

  if (c_target <= ru_base) {
    spec.unchanged = true;
    spec.report.tail_bound = 0.0;
    spec.report.concave = true;
    spec.report.concavity_chords = base_concave.chords;
    verify(spec, opts);
    return spec;
  }

  auto ruelle_ok = [&](double A) {
    return counterexample_tail_bound(n, A, B) >= c_target;
  };
  auto volume_ok = [&](double A) {
    return counterexample_volume_bound(n, A, vol_base) <= vol_base + epsilon;
  };
  if (!ruelle_ok(opts.a_max) || !volume_ok(opts.a_max)) {
    std::ostringstream os;
    os << "no A <= " << opts.a_max << " satisfies ";
    if (!ruelle_ok(opts.a_max)) os << "the Ruelle bound >= " << c_target;
    if (!ruelle_ok(opts.a_max) && !volume_ok(opts.a_max)) os << " and ";
    if (!volume_ok(opts.a_max)) os << "the volume bound <= vol + " << epsilon;
    throw Error(ErrorCode::NoFeasibleA, os.str());
  }
  // Both constraints only get easier as A grows.
  double lo = 0.0, hi = std::log(opts.a_max);
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double A = std::exp(mid);
    if (ruelle_ok(A) && volume_ok(A)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double A = std::exp(hi);
  spec.A = A;
  spec.report.tail_bound = counterexample_tail_bound(n, A, B);

  std::vector<double> w(n, A);
  w[0] = std::pow(A, -n);
  const MomentRegion delta_region = MomentRegion::ellipsoid(w);

  double collar = std::min(opts.max_collar, 1.0 / A);
  for (int attempt = 0;; ++attempt) {
    const MomentRegion result =
        MomentRegion::smoothed_union(base, delta_region, collar);
    const ConcavityResult cc =
        concavity_certificate(result, opts.concavity_chords, opts.seed);
    if (cc.concave) {
      spec.result = result;
      spec.delta = collar;
      spec.report.concave = true;
      spec.report.concavity_chords = cc.chords;
      break;
    }
    if (attempt >= opts.concavity_retries) {
      throw Error(ErrorCode::ConcavityLost,
                  "smoothed union fails the concavity certificate at collar " +
                      std::to_string(collar));
    }
    collar *= 0.25;
  }
  verify(spec, opts);
  return spec;
}

}  // namespace ruelle
