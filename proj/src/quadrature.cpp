#include "ruelle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace ruelle {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Value of an integrand together with an error already committed by inner
// quadratures at that point.
struct Sample {
  double value;
  double carried;
};

// ra, rb are the distances of a, b from the right end of the integration
// range, kept separately so that points near that end are resolved to full
// relative precision.
struct Panel {
  double a, b, ra, rb;
  double value, error, carried;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b, double ra, double rb) {
  const double centr = 0.5 * (a + b);
  const double rcentr = 0.5 * (ra + rb);
  // Half width from whichever end representation is more precise.
  const double hlgth = std::max(std::abs(a), std::abs(b)) <= std::max(ra, rb)
                           ? 0.5 * (b - a)
                           : 0.5 * (ra - rb);
  const double dhlgth = std::abs(hlgth);
  double fv1[7], fv2[7];
  const Sample fc = f(centr, rcentr);
  double resg = fc.value * kWg[3];
  double resk = fc.value * kWgk[7];
  double resabs = std::abs(resk);
  double carried = fc.carried * kWgk[7];
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = hlgth * kXgk[jtw];
    const Sample s1 = f(centr - absc, rcentr + absc);
    const Sample s2 = f(centr + absc, rcentr - absc);
    fv1[jtw] = s1.value;
    fv2[jtw] = s2.value;
    resg += kWg[j] * (s1.value + s2.value);
    resk += kWgk[jtw] * (s1.value + s2.value);
    resabs += kWgk[jtw] * (std::abs(s1.value) + std::abs(s2.value));
    carried += kWgk[jtw] * (s1.carried + s2.carried);
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * kXgk[jtwm1];
    const Sample s1 = f(centr - absc, rcentr + absc);
    const Sample s2 = f(centr + absc, rcentr - absc);
    fv1[jtwm1] = s1.value;
    fv2[jtwm1] = s2.value;
    resk += kWgk[jtwm1] * (s1.value + s2.value);
    resabs += kWgk[jtwm1] * (std::abs(s1.value) + std::abs(s2.value));
    carried += kWgk[jtwm1] * (s1.carried + s2.carried);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc.value - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * hlgth;
  resabs *= dhlgth;
  resasc *= dhlgth;
  double abserr = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) {
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  }
  constexpr double epmach = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * epmach)) {
    abserr = std::max(epmach * 50.0 * resabs, abserr);
  }
  if (!std::isfinite(result)) abserr = std::numeric_limits<double>::infinity();
  return {a, b, ra, rb, result, abserr, carried * dhlgth};
}

struct Break {
  double x;  // position
  double r;  // distance from the right end of the range
};

// Breakpoints of [a, b] with `levels` geometric refinements at both ends.
// `rb` is the distance of b from the right end of the whole range.
std::vector<Break> graded_breakpoints(double a, double b, int levels,
                                      double rb) {
  const double w = b - a;
  std::vector<Break> pts{{a, rb + w}};
  for (int k = levels; k >= 1; --k) {
    const double d = w * std::ldexp(0.5, -k);
    pts.push_back({a + d, rb + (w - d)});
  }
  if (levels > 0) pts.push_back({a + 0.5 * w, rb + 0.5 * w});
  for (int k = 1; k <= levels; ++k) {
    const double d = w * std::ldexp(0.5, -k);
    pts.push_back({b - d, rb + d});
  }
  pts.push_back({b, rb});
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Break& p, const Break& q) { return p.x == q.x; }),
            pts.end());
  return pts;
}

template <class F>
QuadratureResult adapt(F& f, const std::vector<Break>& breaks, double rel_tol,
                       double abs_tol, int max_subdivisions, long& evals) {
  std::priority_queue<Panel> active;
  std::vector<Panel> frozen;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Panel p = gk15(f, breaks[i].x, breaks[i + 1].x, breaks[i].r, breaks[i + 1].r);
    evals += 15;
    total += p.value;
    total_err += p.error;
    active.push(p);
  }
  int subdivisions = 0;
  bool converged = true;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (active.empty()) {
      converged = false;
      break;
    }
    if (subdivisions >= max_subdivisions) {
      converged = false;
      break;
    }
    Panel p = active.top();
    active.pop();
    const double mid = 0.5 * (p.a + p.b);
    const double rmid = 0.5 * (p.ra + p.rb);
    const double scale =
        std::min(std::max(std::abs(p.a), std::abs(p.b)), std::max(p.ra, p.rb));
    const double width = std::max(p.b - p.a, p.ra - p.rb);
    if (!(rmid < p.ra && rmid > p.rb) && !(mid > p.a && mid < p.b)) {
      frozen.push_back(p);
      continue;
    }
    if (width < 1e3 * std::numeric_limits<double>::epsilon() * scale) {
      frozen.push_back(p);
      continue;
    }
    const Panel l = gk15(f, p.a, mid, p.ra, rmid);
    const Panel r = gk15(f, mid, p.b, rmid, p.rb);
    evals += 30;
    ++subdivisions;
    total += l.value + r.value - p.value;
    total_err += l.error + r.error - p.error;
    active.push(l);
    active.push(r);
  }
  // Re-sum in positional order so the result does not depend on the heap's
  // internal layout.
  std::vector<Panel> all = std::move(frozen);
  while (!active.empty()) {
    all.push_back(active.top());
    active.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  QuadratureResult out;
  for (const auto& p : all) {
    out.value += p.value;
    out.error += p.error + p.carried;
  }
  if (!std::isfinite(out.value)) converged = false;
  out.converged = converged;
  out.evaluations = evals;
  return out;
}

// Iterated integration over the collapsed simplex coordinates.
class Nested {
 public:
  Nested(int n, const SimplexIntegrand& g, double rel_tol, double abs_tol,
         int grading, int max_sub)
      : n_(n), g_(g), rel_(rel_tol), abs_(abs_tol), grading_(grading),
        max_sub_(max_sub), u_(Point::Zero(n)) {}

  // Integrand of coordinate `level` at value x, where `rest` is the simplex
  // mass left for coordinates level+1..n-1.
  Sample at(int level, double x, double rest) {
    u_(level) = x;
    if (level == n_ - 2) {
      u_(n_ - 1) = std::max(0.0, rest);
      return {g_(u_), 0.0};
    }
    if (!(rest > 0.0)) return {0.0, 0.0};
    auto f = [this, level](double y, double ry) {
      return at(level + 1, y, ry);
    };
    const QuadratureResult r =
        adapt(f, graded_breakpoints(0.0, rest, grading_, 0.0), rel_, abs_,
              max_sub_, evals_);
    if (!r.converged) converged_ = false;
    return {r.value, r.error};
  }

  long evaluations() const { return evals_; }
  bool converged() const { return converged_; }
  long& evals() { return evals_; }

 private:
  int n_;
  const SimplexIntegrand& g_;
  double rel_, abs_;
  int grading_, max_sub_;
  Point u_;
  long evals_ = 0;
  bool converged_ = true;
};

}  // namespace

QuadratureResult integrate_interval(const std::function<double(double)>& f,
                                    double a, double b, double rel_tol,
                                    double abs_tol, int grading_levels,
                                    int max_subdivisions) {
  auto wrapped = [&f](double x, double) { return Sample{f(x), 0.0}; };
  long evals = 0;
  return adapt(wrapped, graded_breakpoints(a, b, grading_levels, 0.0), rel_tol,
               abs_tol, max_subdivisions, evals);
}

QuadratureResult integrate_simplex_unchecked(int n, const SimplexIntegrand& g,
                                             const QuadratureSpec& spec) {
  if (n < 1 || n > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "simplex dimension out of range");
  }
  if (n == 1) {
    Point u(1);
    u(0) = 1.0;
    QuadratureResult r;
    r.value = g(u);
    r.evaluations = 1;
    r.converged = std::isfinite(r.value);
    return r;
  }
  const int grading = std::max(0, spec.grading_levels);
  const int panels = std::max(1, spec.outer_panels);
  // Uniform outer panels, the first and last one graded.
  std::vector<Break> all{{0.0, 1.0}};
  for (int i = 0; i < panels; ++i) {
    const double a = double(i) / panels;
    const double b = double(i + 1) / panels;
    const double rb = double(panels - i - 1) / panels;
    if ((i == 0 || i == panels - 1) && grading > 0) {
      const auto sub = graded_breakpoints(a, b, grading, rb);
      all.insert(all.end(), sub.begin() + 1, sub.end());
    } else {
      all.push_back({b, rb});
    }
  }
  const std::size_t cells = all.size() - 1;
  std::vector<QuadratureResult> parts(cells);
  const double inner_rel = 0.1 * spec.rel_tol;
  const double inner_abs = 0.1 * spec.abs_tol;
  const double cell_abs = spec.abs_tol / static_cast<double>(cells);

  parallel_for(cells, spec.exec, [&](std::size_t c) {
    Nested nested(n, g, inner_rel, inner_abs, grading, spec.max_subdivisions);
    auto f = [&nested](double x, double rx) { return nested.at(0, x, rx); };
    // Leaves 0.2 rel_tol of headroom for the errors carried up from the
    // inner integrals.
    QuadratureResult r = adapt(f, {all[c], all[c + 1]}, 0.8 * spec.rel_tol,
                               cell_abs, spec.max_subdivisions, nested.evals());
    r.converged = r.converged && nested.converged();
    parts[c] = r;
  });

  QuadratureResult out;
  for (const auto& p : parts) {
    out.value += p.value;
    out.error += p.error;
    out.evaluations += p.evaluations;
    out.converged = out.converged && p.converged;
  }
  const double target = std::max(spec.abs_tol, spec.rel_tol * std::abs(out.value));
  if (!(out.error <= target) || !std::isfinite(out.value)) out.converged = false;
  return out;
}

QuadratureResult integrate_simplex(int n, const SimplexIntegrand& g,
                                   const QuadratureSpec& spec) {
  QuadratureResult r = integrate_simplex_unchecked(n, g, spec);
  if (!r.converged) {
    throw Error(ErrorCode::QuadratureFailure,
                "value " + std::to_string(r.value) + ", error estimate " +
                    std::to_string(r.error) + " after " +
                    std::to_string(r.evaluations) + " evaluations");
  }
  return r;
}

}  // namespace ruelle
