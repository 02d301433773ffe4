#include "ruelle/region.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace ruelle {

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::Ellipsoid: return "ellipsoid";
    case RegionKind::PFamily: return "pfamily";
    case RegionKind::RadialProfile: return "radial_profile";
    case RegionKind::SmoothedUnion: return "smoothed_union";
  }
  return "unknown";
}

struct RegionData {
  RegionKind kind = RegionKind::Ellipsoid;
  int n = 0;
  std::vector<double> widths;
  double p = 1.0;

  int resolution = 0;
  std::vector<double> values;
  std::vector<std::vector<double>> binom;           // binom[a][b]
  std::vector<std::array<int, kMaxDim>> multi;      // cubic node multi-indices

  std::vector<MomentRegion> children;
  double collar = 0.0;
  double q = 0.0;
};

namespace {

void require_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument,
                "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
}

void require_positive_widths(const std::vector<double>& w) {
  require_dim(static_cast<int>(w.size()));
  for (double a : w) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::InvalidArgument, "widths must be positive");
    }
  }
}

double l1(const Point& x) { return x.cwiseAbs().sum(); }

void check_origin(const Point& x) {
  if (!(l1(x) >= 1e-12)) {
    throw Error(ErrorCode::EvaluationAtOrigin, "|x|_1 < 1e-12");
  }
}

// ---- PFamily ------------------------------------------------------------

void pfamily_value_gradient(const RegionData& d, const Point& x, double& f,
                            Point* grad) {
  const int n = d.n;
  const double p = d.p;
  const bool half = p == 0.5;
  double m = 0.0;
  Point y(n), t(n);
  for (int i = 0; i < n; ++i) {
    y(i) = std::max(0.0, x(i)) / d.widths[i];
    m = std::max(m, y(i));
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    t(i) = half ? std::sqrt(y(i) / m) : std::pow(y(i) / m, p);
    s += t(i);
  }
  f = m * (half ? s * s : std::pow(s, 1.0 / p));
  if (grad) {
    grad->resize(n);
    for (int i = 0; i < n; ++i) {
      // (y_i / f)^(p-1) = t_i (f / y_i) / s, since (m / f)^p = 1 / s.
      (*grad)(i) = (y(i) > 0.0 ? t(i) * (f / y(i)) / s
                               : std::pow(y(i) / f, p - 1.0)) /
                   d.widths[i];
    }
  }
}

PointMatrix pfamily_hessian(const RegionData& d, const Point& x) {
  const int n = d.n;
  double f;
  Point g;
  pfamily_value_gradient(d, x, f, &g);
  PointMatrix h = PointMatrix::Zero(n, n);
  if (d.p == 1.0) return h;
  const double c = (1.0 - d.p) / f;
  for (int i = 0; i < n; ++i) {
    const double yi = std::max(0.0, x(i)) / d.widths[i];
    for (int j = 0; j < n; ++j) h(i, j) = c * g(i) * g(j);
    // (y_i / f)^(p-2) / a_i^2 = g_i (f / y_i) / a_i.
    h(i, i) -= c * (yi > 0.0 ? g(i) * (f / yi) / d.widths[i]
                             : std::pow(yi / f, d.p - 2.0) /
                                   (d.widths[i] * d.widths[i]));
  }
  return h;
}

// ---- RadialProfile --------------------------------------------------------

double binom_at(const RegionData& d, int a, int b) {
  if (a < 0 || b < 0 || b > a) return 0.0;
  return d.binom[a][b];
}

// Lexicographic rank of (k_0, ..., k_{n-2}) among tuples with sum <= N.
std::size_t profile_rank(const RegionData& d, const std::array<int, kMaxDim>& k) {
  std::size_t rank = 0;
  int m = d.resolution;
  for (int j = 0; j + 1 < d.n; ++j) {
    const int rest = d.n - 2 - j;  // free coordinates after j
    // Tuples with a smaller j-th entry: sum_{v < k_j} C(m - v + rest, rest).
    rank += static_cast<std::size_t>(
        binom_at(d, m + rest + 1, rest + 1) -
        binom_at(d, m - k[j] + rest + 1, rest + 1));
    m -= k[j];
  }
  return rank;
}

double lagrange_factor(int a, double lam) {
  double v = 1.0;
  for (int j = 0; j < a; ++j) v *= (3.0 * lam - j) / (j + 1);
  return v;
}

double lagrange_factor_derivative(int a, double lam) {
  double total = 0.0;
  for (int skip = 0; skip < a; ++skip) {
    double v = 3.0 / (skip + 1);
    for (int j = 0; j < a; ++j) {
      if (j != skip) v *= (3.0 * lam - j) / (j + 1);
    }
    total += v;
  }
  return total;
}

// Cubic interpolant of R at direction u, and optionally dR/du_i for the
// extension that ignores u_n.
double profile_eval(const RegionData& d, const Point& u, Point* dR) {
  const int n = d.n;
  if (n == 1) {
    if (dR) *dR = Point::Zero(1);
    return d.values[0];
  }
  const int dd = n - 1;
  const int macro = d.resolution / 3;
  double sum = 0.0;
  std::array<double, kMaxDim> cum{};
  for (int j = 0; j < dd; ++j) {
    sum += std::max(0.0, u(j));
    cum[j] = std::clamp(macro * sum, j > 0 ? cum[j - 1] : 0.0,
                        static_cast<double>(macro));
  }
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> r{};
  for (int j = 0; j < dd; ++j) {
    base[j] = std::clamp(static_cast<int>(std::floor(cum[j])), 0, macro - 1);
    r[j] = cum[j] - base[j];
  }
  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + dd, 0);
  std::sort(order.begin(), order.begin() + dd, [&](int a, int b) {
    if (r[a] != r[b]) return r[a] > r[b];
    return a > b;
  });
  // Kuhn simplex vertices in cumulative coordinates and barycentrics.
  std::array<std::array<int, kMaxDim>, kMaxDim + 1> vert{};
  vert[0] = base;
  for (int k = 1; k <= dd; ++k) {
    vert[k] = vert[k - 1];
    vert[k][order[k - 1]] += 1;
  }
  std::array<double, kMaxDim + 1> lam{};
  lam[0] = 1.0 - r[order[0]];
  for (int k = 1; k < dd; ++k) lam[k] = r[order[k - 1]] - r[order[k]];
  lam[dd] = r[order[dd - 1]];

  std::array<double, kMaxDim + 1> dlam{};  // dR / d lambda_k
  double value = 0.0;
  for (const auto& alpha : d.multi) {
    std::array<int, kMaxDim> c{};
    for (int j = 0; j < dd; ++j) {
      int v = 0;
      for (int k = 0; k <= dd; ++k) v += alpha[k] * vert[k][j];
      c[j] = v;
    }
    std::array<int, kMaxDim> kk{};
    for (int j = 0; j < dd; ++j) kk[j] = c[j] - (j > 0 ? c[j - 1] : 0);
    const double rv = d.values[profile_rank(d, kk)];
    double w = 1.0;
    for (int k = 0; k <= dd; ++k) w *= lagrange_factor(alpha[k], lam[k]);
    value += rv * w;
    if (dR) {
      for (int k = 0; k <= dd; ++k) {
        double dw = lagrange_factor_derivative(alpha[k], lam[k]);
        for (int m = 0; m <= dd; ++m) {
          if (m != k) dw *= lagrange_factor(alpha[m], lam[m]);
        }
        dlam[k] += rv * dw;
      }
    }
  }
  if (dR) {
    // dR/dr_{order[k-1]} = dR/dlam_k - dR/dlam_{k-1}; dr_j/dcum_j = 1;
    // dcum_j/du_i = macro for i <= j.
    std::array<double, kMaxDim> dcum{};
    for (int k = 1; k <= dd; ++k) {
      dcum[order[k - 1]] = dlam[k] - dlam[k - 1];
    }
    dR->setZero(n);
    double tail = 0.0;
    for (int j = dd - 1; j >= 0; --j) {
      tail += dcum[j];
      (*dR)(j) = macro * tail;
    }
  }
  return value;
}

void profile_value_gradient(const RegionData& d, const Point& x, double& f,
                            Point* grad) {
  const double s = l1(x);
  const Point u = x / s;
  Point dR;
  const double r = profile_eval(d, u, grad ? &dR : nullptr);
  f = s / r;
  if (grad) {
    const double proj = u.dot(dR);
    grad->resize(d.n);
    for (int i = 0; i < d.n; ++i) {
      (*grad)(i) = 1.0 / r - (dR(i) - proj) / (r * r);
    }
  }
}

// ---- Dispatch -------------------------------------------------------------

void eval_vg(const RegionData& d, const Point& x, double& f,
                    Point* grad);
PointMatrix hessian_of(const RegionData& d, const Point& x);

void union_value_gradient(const RegionData& d, const Point& x, double& f,
                          Point* grad) {
  double fl, fr;
  Point gl, gr;
  eval_vg(d.children[0].data(), x, fl, grad ? &gl : nullptr);
  eval_vg(d.children[1].data(), x, fr, grad ? &gr : nullptr);
  // log f = -(1/q) logsumexp(-q log f_L, -q log f_R).
  const double a = -d.q * std::log(fl);
  const double b = -d.q * std::log(fr);
  const double mx = std::max(a, b);
  const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
  f = std::exp(-lse / d.q);
  if (grad) {
    const double wl = std::exp(a - lse);
    const double wr = std::exp(b - lse);
    // A vanishing weight must not meet an infinite face derivative.
    grad->setZero(d.n);
    if (wl > 0.0) *grad += wl * gl / fl;
    if (wr > 0.0) *grad += wr * gr / fr;
    *grad *= f;
  }
}

PointMatrix union_hessian(const RegionData& d, const Point& x) {
  const int n = d.n;
  double f;
  Point g;
  union_value_gradient(d, x, f, &g);
  const double q = d.q;
  const Point phi = g / f;  // grad log f
  PointMatrix hphi = PointMatrix::Zero(n, n);
  double fk[2];
  Point gk[2];
  PointMatrix hk[2];
  double lw[2];
  for (int k = 0; k < 2; ++k) {
    const RegionData& c = d.children[k].data();
    eval_vg(c, x, fk[k], &gk[k]);
    hk[k] = hessian_of(c, x);
    lw[k] = -q * std::log(fk[k]);
  }
  const double mx = std::max(lw[0], lw[1]);
  const double lse = mx + std::log(std::exp(lw[0] - mx) + std::exp(lw[1] - mx));
  for (int k = 0; k < 2; ++k) {
    const double w = std::exp(lw[k] - lse);
    if (w == 0.0) continue;
    const Point lk = gk[k] / fk[k];
    const PointMatrix hlog = hk[k] / fk[k] - lk * lk.transpose();
    hphi += w * hlog - q * w * (lk - phi) * lk.transpose();
  }
  PointMatrix h = f * (hphi + phi * phi.transpose());
  return 0.5 * (h + h.transpose());
}

PointMatrix profile_hessian(const RegionData& d, const Point& x) {
  const int n = d.n;
  const double s = l1(x);
  const double h = 1e-4 * s;
  PointMatrix out(n, n);
  for (int j = 0; j < n; ++j) {
    double f;
    Point gp, gm;
    Point xp = x, xm = x;
    // One-sided near the coordinate face.
    if (x(j) >= 1.5 * h) {
      xp(j) += h;
      xm(j) -= h;
    } else {
      xp(j) += 2.0 * h;
    }
    const double step = 2.0 * h;
    profile_value_gradient(d, xp, f, &gp);
    profile_value_gradient(d, xm, f, &gm);
    out.col(j) = (gp - gm) / step;
  }
  return 0.5 * (out + out.transpose());
}

void eval_vg(const RegionData& d, const Point& x, double& f,
                    Point* grad) {
  switch (d.kind) {
    case RegionKind::Ellipsoid: {
      f = 0.0;
      for (int i = 0; i < d.n; ++i) f += x(i) / d.widths[i];
      if (grad) {
        grad->resize(d.n);
        for (int i = 0; i < d.n; ++i) (*grad)(i) = 1.0 / d.widths[i];
      }
      return;
    }
    case RegionKind::PFamily:
      pfamily_value_gradient(d, x, f, grad);
      return;
    case RegionKind::RadialProfile:
      profile_value_gradient(d, x, f, grad);
      return;
    case RegionKind::SmoothedUnion:
      union_value_gradient(d, x, f, grad);
      return;
  }
}

PointMatrix hessian_of(const RegionData& d, const Point& x) {
  switch (d.kind) {
    case RegionKind::Ellipsoid: return PointMatrix::Zero(d.n, d.n);
    case RegionKind::PFamily: return pfamily_hessian(d, x);
    case RegionKind::RadialProfile: return profile_hessian(d, x);
    case RegionKind::SmoothedUnion: return union_hessian(d, x);
  }
  return PointMatrix::Zero(d.n, d.n);
}

std::vector<std::array<int, kMaxDim>> cubic_multi_indices(int parts) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> cur{};
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == parts - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, 3);
  return out;
}

}  // namespace

MomentRegion MomentRegion::ellipsoid(std::vector<double> widths) {
  require_positive_widths(widths);
  if (!std::is_sorted(widths.begin(), widths.end())) {
    throw Error(ErrorCode::UnsortedWidths, "ellipsoid widths must ascend");
  }
  auto d = std::make_shared<RegionData>();
  d->kind = RegionKind::Ellipsoid;
  d->n = static_cast<int>(widths.size());
  d->widths = std::move(widths);
  return MomentRegion(d);
}

MomentRegion MomentRegion::pfamily(std::vector<double> widths, double p) {
  require_positive_widths(widths);
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::InvalidArgument, "pfamily exponent must be > 0");
  }
  auto d = std::make_shared<RegionData>();
  d->kind = RegionKind::PFamily;
  d->n = static_cast<int>(widths.size());
  d->widths = std::move(widths);
  d->p = p;
  return MomentRegion(d);
}

int MomentRegion::profile_lattice_size(int n, int resolution) {
  // C(N + n - 1, n - 1)
  double c = 1.0;
  for (int i = 1; i <= n - 1; ++i) c = c * (resolution + i) / i;
  return static_cast<int>(std::llround(c));
}

MomentRegion MomentRegion::radial_profile(int n, int resolution,
                                          std::vector<double> values) {
  require_dim(n);
  if (n > 1 && (resolution < 3 || resolution % 3 != 0)) {
    throw Error(ErrorCode::InvalidArgument,
                "profile resolution must be a positive multiple of 3");
  }
  if (n == 1) resolution = 0;
  const int need = profile_lattice_size(n, resolution);
  if (static_cast<int>(values.size()) != need) {
    throw Error(ErrorCode::InvalidArgument,
                "profile needs " + std::to_string(need) + " values, got " +
                    std::to_string(values.size()));
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "profile values must be > 0");
    }
  }
  auto d = std::make_shared<RegionData>();
  d->kind = RegionKind::RadialProfile;
  d->n = n;
  d->resolution = resolution;
  d->values = std::move(values);
  const int top = resolution + n + 2;
  d->binom.assign(top + 1, std::vector<double>(n + 2, 0.0));
  for (int a = 0; a <= top; ++a) {
    d->binom[a][0] = 1.0;
    for (int b = 1; b <= std::min(a, n + 1); ++b) {
      d->binom[a][b] =
          d->binom[a - 1][b - 1] + (b <= a - 1 ? d->binom[a - 1][b] : 0.0);
    }
  }
  if (n > 1) d->multi = cubic_multi_indices(n);
  return MomentRegion(d);
}

MomentRegion MomentRegion::smoothed_union(const MomentRegion& left,
                                          const MomentRegion& right,
                                          double collar) {
  if (left.dim() != right.dim()) {
    throw Error(ErrorCode::InvalidArgument, "union of regions of unequal dim");
  }
  if (!(collar > 0.0) || !(collar < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "collar must lie in (0, 1)");
  }
  auto d = std::make_shared<RegionData>();
  d->kind = RegionKind::SmoothedUnion;
  d->n = left.dim();
  d->children = {left, right};
  d->collar = collar;
  // 2^(1/q) = 1 + collar bounds the outward bulge of the blend.
  d->q = std::log(2.0) / std::log1p(collar);
  return MomentRegion(d);
}

int MomentRegion::dim() const { return data_->n; }
RegionKind MomentRegion::kind() const { return data_->kind; }
const std::vector<double>& MomentRegion::widths() const { return data_->widths; }
double MomentRegion::exponent() const { return data_->p; }
int MomentRegion::resolution() const { return data_->resolution; }
const std::vector<double>& MomentRegion::values() const { return data_->values; }
const MomentRegion& MomentRegion::left() const { return data_->children.at(0); }
const MomentRegion& MomentRegion::right() const { return data_->children.at(1); }
double MomentRegion::collar() const { return data_->collar; }
double MomentRegion::blend_exponent() const { return data_->q; }

MomentRegion MomentRegion::scaled(double s) const {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be > 0");
  const RegionData& d = *data_;
  auto scale = [s](std::vector<double> v) {
    for (double& x : v) x *= s;
    return v;
  };
  switch (d.kind) {
    case RegionKind::Ellipsoid: return ellipsoid(scale(d.widths));
    case RegionKind::PFamily: return pfamily(scale(d.widths), d.p);
    case RegionKind::RadialProfile:
      return radial_profile(d.n, d.resolution, scale(d.values));
    case RegionKind::SmoothedUnion:
      return smoothed_union(d.children[0].scaled(s), d.children[1].scaled(s),
                            d.collar);
  }
  return *this;
}

std::vector<double> MomentRegion::intercepts() const {
  CanonicalFunction f(*this);
  std::vector<double> out(dim());
  for (int i = 0; i < dim(); ++i) {
    Point e = Point::Zero(dim());
    e(i) = 1.0;
    out[i] = f.radius(e);
  }
  return out;
}

int MomentRegion::grading_levels() const {
  const RegionData& d = *data_;
  switch (d.kind) {
    case RegionKind::Ellipsoid:
    case RegionKind::RadialProfile:
      return 0;
    case RegionKind::PFamily:
      return d.p == 1.0 ? 0 : 10;
    case RegionKind::SmoothedUnion: {
      const auto l = d.children[0].intercepts();
      const auto r = d.children[1].intercepts();
      double lo = l[0], hi = l[0];
      for (double v : l) lo = std::min(lo, v), hi = std::max(hi, v);
      for (double v : r) lo = std::min(lo, v), hi = std::max(hi, v);
      const int spread = static_cast<int>(std::ceil(std::log2(hi / lo)));
      return std::max(d.children[0].grading_levels(),
                      d.children[1].grading_levels()) +
             std::max(0, spread) + 4;
    }
  }
  return 0;
}

bool MomentRegion::is_linear() const {
  return data_->kind == RegionKind::Ellipsoid ||
         (data_->kind == RegionKind::PFamily && data_->p == 1.0);
}

bool MomentRegion::analytic_derivatives() const {
  const RegionData& d = *data_;
  if (d.kind == RegionKind::RadialProfile) return false;
  if (d.kind == RegionKind::SmoothedUnion) {
    return d.children[0].analytic_derivatives() &&
           d.children[1].analytic_derivatives();
  }
  return true;
}

double MomentRegion::min_exponent() const {
  const RegionData& d = *data_;
  if (d.kind == RegionKind::PFamily) return d.p;
  if (d.kind == RegionKind::SmoothedUnion) {
    return std::min(d.children[0].min_exponent(), d.children[1].min_exponent());
  }
  return 1.0;
}

CanonicalFunction::CanonicalFunction(MomentRegion region)
    : region_(std::move(region)) {}

double CanonicalFunction::value(const Point& x) const {
  check_origin(x);
  double f = 0.0;
  eval_vg(region_.data(), x, f, nullptr);
  return f;
}

Point CanonicalFunction::gradient(const Point& x) const {
  check_origin(x);
  double f;
  Point g;
  eval_vg(region_.data(), x, f, &g);
  return g;
}

void CanonicalFunction::value_gradient(const Point& x, double& f,
                                       Point& grad) const {
  check_origin(x);
  eval_vg(region_.data(), x, f, &grad);
}

PointMatrix CanonicalFunction::hessian(const Point& x) const {
  check_origin(x);
  return hessian_of(region_.data(), x);
}

double CanonicalFunction::radius(const Point& u) const {
  return 1.0 / value(u);
}

CanonicalFunction canonical_function(const MomentRegion& region) {
  return CanonicalFunction(region);
}

}  // namespace ruelle
