#include "ruelle/toric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace ruelle {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Calls visit(u) for every simplex lattice direction k / m with k_i >= lo.
void for_each_lattice_direction(int n, int m, int lo,
                                const std::function<void(const Point&)>& visit) {
  std::vector<int> k(n, 0);
  Point u(n);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      if (left < lo) return;
      k[pos] = left;
      for (int i = 0; i < n; ++i) u(i) = double(k[i]) / m;
      visit(u);
      return;
    }
    for (int v = lo; v <= left - lo * (n - 1 - pos); ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, m);
}

double binomial(double a, int b) {
  double r = 1.0;
  for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

}  // namespace

Estimate integrate_degree_zero(const MomentRegion& region,
                               const SimplexIntegrand& g, QuadratureSpec spec) {
  const int n = region.dim();
  if (spec.grading_levels < 0) spec.grading_levels = region.grading_levels();
  const CanonicalFunction f(region);
  auto integrand = [&](const Point& u) {
    return g(u) * std::pow(f.value(u), -n);
  };
  const QuadratureResult r = integrate_simplex(n, integrand, spec);
  Estimate e;
  e.value = r.value / n;
  e.error = r.error / n;
  e.evaluations = r.evaluations;
  return e;
}

Estimate ruelle_invariant_toric(const MomentRegion& region,
                                QuadratureSpec spec) {
  const CanonicalFunction f(region);
  return integrate_degree_zero(
      region, [&f](const Point& u) { return f.gradient(u).sum(); }, spec);
}

Estimate volume_toric(const MomentRegion& region, QuadratureSpec spec) {
  if (region.kind() == RegionKind::Ellipsoid) {
    Estimate e;
    e.value = 1.0;
    for (double a : region.widths()) e.value *= a;
    e.value /= factorial(region.dim());
    e.closed_form = true;
    return e;
  }
  return integrate_degree_zero(
      region, [](const Point&) { return 1.0; }, spec);
}

LaplacianEstimate laplacian_functional(const MomentRegion& region,
                                       QuadratureSpec spec) {
  const CanonicalFunction f(region);
  const bool linear = region.is_linear();
  auto g = [&f, linear](const Point& u) {
    double s = f.gradient(u).sum();
    if (!linear) s += u.dot(f.hessian(u).diagonal());
    return 4.0 * kPi * s;
  };
  LaplacianEstimate out;
  static_cast<Estimate&>(out) = integrate_degree_zero(region, g, spec);
  out.non_integrable_hessian = region.min_exponent() < 0.5;
  return out;
}

MonotonicityResult is_strictly_monotone(const MomentRegion& region,
                                        long samples) {
  const int n = region.dim();
  const CanonicalFunction f(region);
  MonotonicityResult out;
  if (n == 1) {
    Point u = Point::Ones(1);
    out.checked = 1;
    if (!(f.gradient(u)(0) > 0.0)) {
      out.monotone = false;
      out.witness = u;
      out.component = 0;
    }
    return out;
  }
  int m = n;
  while (binomial(m - 1, n - 1) < static_cast<double>(samples)) ++m;
  for_each_lattice_direction(n, m, 1, [&](const Point& u) {
    if (!out.monotone) return;
    ++out.checked;
    const Point g = f.gradient(u);
    for (int i = 0; i < n; ++i) {
      if (!(g(i) > 0.0)) {
        out.monotone = false;
        out.witness = u;
        out.component = i;
        return;
      }
    }
  });
  return out;
}

ConcavityResult concavity_certificate(const MomentRegion& region, long chords,
                                      std::uint64_t seed, double tol) {
  const int n = region.dim();
  const CanonicalFunction f(region);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto boundary_point = [&]() {
    Point u(n);
    for (int i = 0; i < n; ++i) {
      // Some chords start on coordinate faces.
      u(i) = unit(rng) < 0.15 ? 0.0 : expo(rng);
    }
    if (u.sum() == 0.0) u(0) = 1.0;
    u /= u.sum();
    return Point(f.radius(u) * u);
  };
  ConcavityResult out;
  out.worst_midpoint = std::numeric_limits<double>::infinity();
  for (long c = 0; c < chords; ++c) {
    const Point a = boundary_point();
    const Point b = boundary_point();
    const Point mid = 0.5 * (a + b);
    ++out.chords;
    if (mid.sum() < 1e-12) continue;
    const double v = f.value(mid);
    if (v < out.worst_midpoint) out.worst_midpoint = v;
    if (v < 1.0 - tol && out.concave) {
      out.concave = false;
      out.witness_a = a;
      out.witness_b = b;
    }
  }
  return out;
}

namespace {

// [v] restricted to the face spanned by `support`, without the concavity
// precondition.
BracketResult bracket_on_face(const CanonicalFunction& f,
                              const std::vector<long>& v,
                              const std::vector<int>& support) {
  const int n = f.dim();
  const int s = static_cast<int>(support.size());
  auto objective = [&](const Point& u) {
    double dot = 0.0;
    for (int i : support) dot += u(i) * static_cast<double>(v[i]);
    return dot / f.value(u);
  };
  BracketResult best;
  best.value = std::numeric_limits<double>::infinity();
  if (s == 1) {
    Point u = Point::Zero(n);
    u(support[0]) = 1.0;
    best.value = objective(u);
    best.argmin = f.radius(u) * u;
    return best;
  }
  static const int kGrid[] = {0, 256, 48, 16, 8, 6, 5, 4};
  const int m = kGrid[std::min(s - 1, 7)];
  Point u_best;
  for_each_lattice_direction(s, m, 0, [&](const Point& w) {
    Point u = Point::Zero(n);
    for (int k = 0; k < s; ++k) u(support[k]) = w(k);
    const double h = objective(u);
    if (h < best.value) {
      best.value = h;
      u_best = u;
    }
  });
  // Pattern search: move mass between support coordinates.
  double step = 1.0 / m;
  Point u = u_best;
  double h = best.value;
  int iterations = 0;
  while (step > 1e-13 && iterations < 20000) {
    bool improved = false;
    for (int a = 0; a < s && !improved; ++a) {
      for (int b = 0; b < s && !improved; ++b) {
        if (a == b) continue;
        const double amt = std::min(step, u(support[a]));
        if (amt <= 0.0) continue;
        Point t = u;
        t(support[a]) -= amt;
        t(support[b]) += amt;
        const double ht = objective(t);
        ++iterations;
        if (ht < h) {
          u = t;
          h = ht;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  best.value = h;
  best.argmin = f.radius(u) * u;
  return best;
}

void require_concave(const MomentRegion& region, const BracketOptions& opts) {
  if (!opts.check_concavity) return;
  const ConcavityResult c =
      concavity_certificate(region, opts.concavity_chords, 0);
  if (!c.concave) {
    throw Error(ErrorCode::NotConcave,
                "chord midpoint inside the region (f = " +
                    std::to_string(c.worst_midpoint) + ")");
  }
}

}  // namespace

BracketResult systole_bracket(const MomentRegion& region,
                              const std::vector<long>& v,
                              const BracketOptions& opts) {
  const int n = region.dim();
  if (static_cast<int>(v.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "bracket vector has wrong size");
  }
  std::vector<int> support;
  for (int i = 0; i < n; ++i) {
    if (v[i] < 0) throw Error(ErrorCode::InvalidArgument, "negative entry");
    if (v[i] > 0) support.push_back(i);
  }
  if (support.empty()) throw Error(ErrorCode::InvalidArgument, "v = 0");
  require_concave(region, opts);
  return bracket_on_face(CanonicalFunction(region), v, support);
}

SystoleResult systole_concave(const MomentRegion& region,
                              const SystoleOptions& opts) {
  const int n = region.dim();
  require_concave(region, opts.bracket);
  const CanonicalFunction f(region);

  // Enumeration radius from the bound <x, v> >= |v|_1 * delta.
  double c_ub = std::numeric_limits<double>::infinity();
  for (double r : region.intercepts()) c_ub = std::min(c_ub, r);
  double delta = opts.delta;
  if (!(delta > 0.0)) {
    const auto icpt = region.intercepts();
    const double eta = 1e-3 * *std::max_element(icpt.begin(), icpt.end());
    delta = std::numeric_limits<double>::infinity();
    const int m = n == 1 ? 1 : std::max(n, static_cast<int>(std::ceil(
                                               std::pow(2000.0, 1.0 / (n - 1)))));
    for_each_lattice_direction(n, m, 0, [&](const Point& u) {
      const Point x = f.radius(u) * u;
      if (x.minCoeff() < eta) return;
      delta = std::min(delta, x.sum() / n);
    });
    if (!std::isfinite(delta)) delta = c_ub / n;
  }
  SystoleResult out;
  out.v_max = static_cast<long>(std::ceil(c_ub / delta));

  const long subsets = (1L << n) - 1;
  const long todo = std::min(subsets, opts.budget);
  out.complete = todo == subsets;
  std::vector<BracketResult> results(todo);
  parallel_for(static_cast<std::size_t>(todo), Execution::Parallel,
               [&](std::size_t idx) {
                 const long mask = static_cast<long>(idx) + 1;
                 std::vector<long> v(n, 0);
                 std::vector<int> support;
                 for (int i = 0; i < n; ++i) {
                   if (mask & (1L << i)) {
                     v[i] = 1;
                     support.push_back(i);
                   }
                 }
                 results[idx] = bracket_on_face(f, v, support);
               });
  out.value = std::numeric_limits<double>::infinity();
  for (long idx = 0; idx < todo; ++idx) {
    if (results[idx].value < out.value) {
      out.value = results[idx].value;
      out.argmin = results[idx].argmin;
      out.minimizer.assign(n, 0);
      for (int i = 0; i < n; ++i) {
        if ((idx + 1) & (1L << i)) out.minimizer[i] = 1;
      }
    }
  }
  out.evaluated = todo;
  // Nonzero lattice vectors with |v|_1 <= v_max, minus the indicators
  // among them.
  const double lattice = binomial(double(out.v_max) + n, n) - 1.0;
  double indicators = 0.0;
  for (int k = 1; k <= std::min<long>(n, out.v_max); ++k) {
    indicators += binomial(n, k);
  }
  const double pruned = std::max(0.0, lattice - indicators);
  out.pruned = pruned > 9e18 ? std::numeric_limits<long>::max()
                             : static_cast<long>(pruned);
  return out;
}

}  // namespace ruelle
