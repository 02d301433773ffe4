#include "ruelle/flows.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "ruelle/symplin.hpp"
#include "ruelle/toric.hpp"

namespace ruelle {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Omega v for v in (x, y) order.
Vector apply_omega(const Vector& v) {
  const int n = static_cast<int>(v.size()) / 2;
  Vector w(v.size());
  w.head(n) = -v.tail(n);
  w.tail(n) = v.head(n);
  return w;
}

Matrix apply_omega(const Matrix& m) {
  const int n = static_cast<int>(m.rows()) / 2;
  Matrix w(m.rows(), m.cols());
  w.topRows(n) = -m.bottomRows(n);
  w.bottomRows(n) = m.topRows(n);
  return w;
}

// Largest x_j over the region.
double region_extent(const MomentRegion& region, int j) {
  switch (region.kind()) {
    case RegionKind::Ellipsoid:
    case RegionKind::PFamily:
      return region.widths()[j];
    case RegionKind::SmoothedUnion:
      return (1.0 + region.collar()) * std::max(region_extent(region.left(), j),
                                                region_extent(region.right(), j));
    case RegionKind::RadialProfile:
      break;
  }
  // Scan a direction lattice; the profile is only known to cell accuracy,
  // so leave a margin.
  const int n = region.dim();
  const CanonicalFunction f(region);
  int res = 4;
  auto count = [&](int r) {
    double c = 1.0;
    for (int q = 1; q < n; ++q) c = c * (r + q) / q;
    return c;
  };
  while (count(res + 1) < 2e4) ++res;
  double best = 0.0;
  std::vector<int> k(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      k[pos] = left;
      Point u(n);
      for (int a = 0; a < n; ++a) u(a) = double(k[a]) / res;
      if (u(j) > 0.0) best = std::max(best, f.radius(u) * u(j));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, res);
  return 1.1 * best;
}

double spectral_norm_symmetric(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Vector HamiltonianField::gradient(const Vector& z) const {
  const int d = 2 * n();
  Vector g(d);
  const double scale = std::max(z.cwiseAbs().maxCoeff(), 1e-3);
  const double h = 1e-6 * scale;
  for (int i = 0; i < d; ++i) {
    Vector p = z, m = z;
    p(i) += h;
    m(i) -= h;
    g(i) = (value(p) - value(m)) / (2.0 * h);
  }
  return g;
}

Matrix HamiltonianField::hessian(const Vector& z) const {
  const int d = 2 * n();
  Matrix hm(d, d);
  const double scale = std::max(z.cwiseAbs().maxCoeff(), 1e-3);
  const double h = 1e-4 * scale;
  for (int i = 0; i < d; ++i) {
    Vector p = z, m = z;
    p(i) += h;
    m(i) -= h;
    hm.col(i) = (gradient(p) - gradient(m)) / (2.0 * h);
  }
  return 0.5 * (hm + hm.transpose());
}

void HamiltonianField::derivatives(const Vector& z, Vector& grad,
                                   Matrix& hess) const {
  grad = gradient(z);
  hess = hessian(z);
}

ToricField::ToricField(MomentRegion region) : f_(std::move(region)) {
  const int n = f_.dim();
  half_widths_.resize(2 * n);
  for (int j = 0; j < n; ++j) {
    const double w = std::sqrt(region_extent(f_.region(), j) / kPi);
    half_widths_(j) = half_widths_(n + j) = w;
  }
}

Point ToricField::moment(const Vector& z) const {
  const int n = f_.dim();
  Point mu(n);
  for (int j = 0; j < n; ++j) mu(j) = kPi * (z(j) * z(j) + z(n + j) * z(n + j));
  return mu;
}

double ToricField::value(const Vector& z) const {
  const Point mu = moment(z);
  if (mu.sum() < 1e-12) return 0.0;  // H is continuous at the origin
  return f_.value(mu);
}

Vector ToricField::gradient(const Vector& z) const {
  const int n = f_.dim();
  const Point g = f_.gradient(moment(z));
  Vector out(2 * n);
  for (int j = 0; j < n; ++j) {
    out(j) = kTwoPi * z(j) * g(j);
    out(n + j) = kTwoPi * z(n + j) * g(j);
  }
  return out;
}

Matrix ToricField::hessian(const Vector& z) const {
  Vector g;
  Matrix h;
  derivatives(z, g, h);
  return h;
}

void ToricField::derivatives(const Vector& z, Vector& grad, Matrix& hess) const {
  const int n = f_.dim();
  const Point mu = moment(z);
  double fv = 0.0;
  Point g;
  f_.value_gradient(mu, fv, g);
  const PointMatrix h = f_.hessian(mu);
  grad.resize(2 * n);
  hess.resize(2 * n, 2 * n);
  for (int a = 0; a < 2 * n; ++a) {
    const int ja = a % n;
    grad(a) = kTwoPi * z(a) * g(ja);
    for (int b = 0; b < 2 * n; ++b) {
      hess(a, b) = 4.0 * kPi * kPi * z(a) * z(b) * h(ja, b % n);
    }
    hess(a, a) += kTwoPi * g(ja);
  }
}

std::optional<double> ToricField::volume() const {
  std::call_once(volume_once_,
                 [&] { volume_ = volume_toric(f_.region()).value; });
  return volume_;
}

ConjugatedField::ConjugatedField(std::shared_ptr<const HamiltonianField> base,
                                 Matrix unitary)
    : base_(std::move(base)), u_(std::move(unitary)) {
  const int d = 2 * base_->n();
  if (u_.rows() != d || u_.cols() != d) {
    throw Error(ErrorCode::InvalidArgument, "conjugating matrix has wrong size");
  }
  const Matrix id = Matrix::Identity(d, d);
  if (max_abs(u_.transpose() * u_ - id) > 1e-10 || !is_symplectic(u_)) {
    throw Error(ErrorCode::NotUnitary, "conjugating matrix is not unitary");
  }
}

double ConjugatedField::value(const Vector& z) const {
  return base_->value(u_.transpose() * z);
}

Vector ConjugatedField::gradient(const Vector& z) const {
  return u_ * base_->gradient(u_.transpose() * z);
}

Matrix ConjugatedField::hessian(const Vector& z) const {
  return u_ * base_->hessian(u_.transpose() * z) * u_.transpose();
}

void ConjugatedField::derivatives(const Vector& z, Vector& grad,
                                  Matrix& hess) const {
  Vector g;
  Matrix h;
  base_->derivatives(u_.transpose() * z, g, h);
  grad = u_ * g;
  hess = u_ * h * u_.transpose();
}

Vector ConjugatedField::half_widths() const {
  const double r = base_->half_widths().norm();
  return Vector::Constant(2 * n(), r);
}

ProductField::ProductField(std::shared_ptr<const HamiltonianField> first,
                           std::shared_ptr<const HamiltonianField> second)
    : first_(std::move(first)), second_(std::move(second)) {
  if (n() > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "product dimension exceeds cap");
  }
}

Vector ProductField::first_part(const Vector& z) const {
  const int n1 = first_->n(), n = this->n();
  Vector p(2 * n1);
  p.head(n1) = z.segment(0, n1);
  p.tail(n1) = z.segment(n, n1);
  return p;
}

Vector ProductField::second_part(const Vector& z) const {
  const int n1 = first_->n(), n2 = second_->n(), n = this->n();
  Vector p(2 * n2);
  p.head(n2) = z.segment(n1, n2);
  p.tail(n2) = z.segment(n + n1, n2);
  return p;
}

double ProductField::value(const Vector& z) const {
  return first_->value(first_part(z)) + second_->value(second_part(z));
}

Vector ProductField::gradient(const Vector& z) const {
  const int n1 = first_->n(), n2 = second_->n(), n = this->n();
  const Vector g1 = first_->gradient(first_part(z));
  const Vector g2 = second_->gradient(second_part(z));
  Vector g(2 * n);
  g.segment(0, n1) = g1.head(n1);
  g.segment(n1, n2) = g2.head(n2);
  g.segment(n, n1) = g1.tail(n1);
  g.segment(n + n1, n2) = g2.tail(n2);
  return g;
}

Matrix ProductField::hessian(const Vector& z) const {
  const int n1 = first_->n(), n2 = second_->n(), n = this->n();
  const Matrix h1 = first_->hessian(first_part(z));
  const Matrix h2 = second_->hessian(second_part(z));
  // Position of each factor coordinate in the product ordering.
  std::vector<int> i1(2 * n1), i2(2 * n2);
  for (int a = 0; a < n1; ++a) {
    i1[a] = a;
    i1[n1 + a] = n + a;
  }
  for (int a = 0; a < n2; ++a) {
    i2[a] = n1 + a;
    i2[n2 + a] = n + n1 + a;
  }
  Matrix h = Matrix::Zero(2 * n, 2 * n);
  for (int a = 0; a < 2 * n1; ++a)
    for (int b = 0; b < 2 * n1; ++b) h(i1[a], i1[b]) = h1(a, b);
  for (int a = 0; a < 2 * n2; ++a)
    for (int b = 0; b < 2 * n2; ++b) h(i2[a], i2[b]) = h2(a, b);
  return h;
}

Vector ProductField::half_widths() const {
  const int n1 = first_->n(), n2 = second_->n(), n = this->n();
  const Vector w1 = first_->half_widths(), w2 = second_->half_widths();
  Vector w(2 * n);
  w.segment(0, n1) = w1.head(n1);
  w.segment(n1, n2) = w2.head(n2);
  w.segment(n, n1) = w1.tail(n1);
  w.segment(n + n1, n2) = w2.tail(n2);
  return w;
}

FunctionField::FunctionField(int n, std::function<double(const Vector&)> h,
                             Vector half_widths)
    : n_(n), h_(std::move(h)), half_widths_(std::move(half_widths)) {
  if (n < 1 || n > kMaxDim || half_widths_.size() != 2 * n) {
    throw Error(ErrorCode::InvalidArgument, "bad function field dimensions");
  }
}

double homogeneity_defect(const HamiltonianField& field, int samples,
                          std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(-1.0, 1.0), scale(0.5, 2.0);
  const Vector w = field.half_widths();
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vector z(w.size());
    for (int a = 0; a < z.size(); ++a) z(a) = unit(rng) * w(a);
    const double s = scale(rng);
    const double h = field.value(z);
    if (!(h > 0.0)) continue;
    worst = std::max(worst, std::abs(field.value(std::sqrt(s) * z) - s * h) / (s * h));
  }
  return worst;
}

double automatic_step(const HamiltonianField& field, const Vector& x0,
                      const IntegratorOptions& opts) {
  const double norm = spectral_norm_symmetric(field.hessian(x0));
  return norm > 0.0 ? std::min(opts.dt_max, opts.step_scale / norm) : opts.dt_max;
}

Matrix resymplectify(const Matrix& m, int iterations) {
  const int n = static_cast<int>(m.rows()) / 2;
  const Matrix w = omega(n);
  Matrix out = m;
  for (int it = 0; it < iterations; ++it) {
    const Matrix d = out.transpose() * w * out - w;
    out = out + 0.5 * out * apply_omega(d);
  }
  return out;
}

CocycleTrajectory integrate_cocycle(const HamiltonianField& field,
                                    const Vector& x0, double T, double dt,
                                    const IntegratorOptions& opts) {
  const int n = field.n();
  const int d = 2 * n;
  if (x0.size() != d) throw Error(ErrorCode::InvalidArgument, "x0 has wrong size");
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be >= 0");
  const double h0 = field.value(x0);
  if (!(h0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "H(x0) must be > 0");
  if (!(dt > 0.0)) dt = automatic_step(field, x0, opts);

  CocycleTrajectory traj;
  traj.start = x0;
  const long steps = T > 0.0 ? 4 * static_cast<long>(std::ceil(T / (4.0 * dt))) : 0;
  traj.steps = steps;
  traj.dt = steps > 0 ? T / steps : dt;
  const double h = traj.dt;

  Vector z = x0;
  Matrix m = Matrix::Identity(d, d);
  double phase = 0.0, lift = 0.0;
  auto store = [&](long k) {
    traj.times.push_back(k == steps ? T : k * h);
    traj.points.push_back(z);
    traj.cocycles.push_back(m);
    traj.lift.push_back(lift);
  };
  store(0);

  Vector g;
  Matrix hs, a(d, d);
  auto rhs = [&](const Vector& zz, const Matrix& mm, Vector& dz, Matrix& dm) {
    field.derivatives(zz, g, hs);
    dz = apply_omega(g);
    a.topRows(n) = -hs.bottomRows(n);
    a.bottomRows(n) = hs.topRows(n);
    dm.resize(d, d);
    dm.noalias() = a * mm;
  };
  Vector k1, k2, k3, k4, zs;
  Matrix m1, m2, m3, m4, ms;
  for (long k = 1; k <= steps; ++k) {
    rhs(z, m, k1, m1);
    zs = z + 0.5 * h * k1;
    ms = m + 0.5 * h * m1;
    rhs(zs, ms, k2, m2);
    zs = z + 0.5 * h * k2;
    ms = m + 0.5 * h * m2;
    rhs(zs, ms, k3, m3);
    zs = z + h * k3;
    ms = m + h * m3;
    rhs(zs, ms, k4, m4);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    m += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);

    const double hz = field.value(z);
    const double drift = std::abs(hz - h0) / h0;
    traj.max_energy_drift = std::max(traj.max_energy_drift, drift);
    if (!(drift <= opts.energy_tol)) {
      throw Error(ErrorCode::EnergyDriftExceeded,
                  "relative drift " + std::to_string(drift) + " at t = " +
                      std::to_string(k * h));
    }
    z *= std::sqrt(h0 / hz);  // Liouville rescaling back to the energy level

    if (opts.resymplectify_every > 0 && k % opts.resymplectify_every == 0) {
      traj.max_symplectic_defect =
          std::max(traj.max_symplectic_defect, symplectic_defect(m));
      m = resymplectify(m);
    }

    const double next = unitary_phase(m);
    const double step = wrap_angle(next - phase) / kTwoPi;
    traj.max_phase_step = std::max(traj.max_phase_step, std::abs(step));
    if (std::abs(step) > 0.25) {
      throw Error(ErrorCode::UndersampledPath,
                  "phase increment " + std::to_string(step) + " turns");
    }
    lift += step;
    phase = next;

    if (k * 4 % steps == 0) traj.quarters[k * 4 / steps - 1] = lift;
    if (k == steps || (opts.record_every > 0 && k % opts.record_every == 0)) {
      store(k);
    }
  }
  traj.max_symplectic_defect =
      std::max(traj.max_symplectic_defect, symplectic_defect(m));
  return traj;
}

void write_trajectory_csv(const CocycleTrajectory& traj, std::ostream& os) {
  const int d = static_cast<int>(traj.start.size());
  const int n = d / 2;
  os << "t";
  for (int j = 0; j < n; ++j) os << ",x" << j + 1;
  for (int j = 0; j < n; ++j) os << ",y" << j + 1;
  os << ",u\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i];
    for (int a = 0; a < d; ++a) os << ',' << traj.points[i](a);
    os << ',' << traj.lift[i] << '\n';
  }
}

bool sample_domain(const HamiltonianField& field, std::uint64_t seed,
                   std::uint64_t index, long budget, Vector& z, long& draws) {
  std::mt19937_64 rng(sample_seed(seed, index));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vector w = field.half_widths();
  z.resize(w.size());
  draws = 0;
  while (draws < budget) {
    ++draws;
    for (int a = 0; a < z.size(); ++a) z(a) = unit(rng) * w(a);
    // A ball of radius 1e-8 has no measure at this sample size; skipping it
    // keeps derivatives away from the origin.
    if (z.squaredNorm() < 1e-16) continue;
    if (field.value(z) <= 1.0) return true;
  }
  return false;
}

namespace {

struct SampleOutcome {
  bool ok = false;
  long draws = 0;
  double dt = 0.0;
  double quarters[4] = {0, 0, 0, 0};
  Vector z;
};

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double count = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / count;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
}

// Volume of X and its standard error from the field or from the draws.
void domain_volume(const HamiltonianField& field, long accepted, long attempts,
                   double& vol, double& se) {
  if (const auto v = field.volume()) {
    vol = *v;
    se = 0.0;
    return;
  }
  double box = 1.0;
  const Vector w = field.half_widths();
  for (int a = 0; a < w.size(); ++a) box *= 2.0 * w(a);
  const double p = double(accepted) / double(attempts);
  vol = box * p;
  se = box * std::sqrt(p * (1.0 - p) / double(attempts));
}

}  // namespace

RuelleEstimate ruelle_estimate(const HamiltonianField& field, double T,
                               long samples, std::uint64_t seed,
                               const EstimateOptions& opts) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be > 0");
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be > 0");

  std::vector<SampleOutcome> out(samples);
  parallel_for(samples, opts.exec, [&](std::size_t i) {
    SampleOutcome& s = out[i];
    s.ok = sample_domain(field, seed, i, opts.draws_per_sample, s.z, s.draws);
    if (!s.ok) return;
    const CocycleTrajectory tr = integrate_cocycle(field, s.z, T, opts.dt,
                                                   opts.integrator);
    s.dt = tr.dt;
    std::copy(tr.quarters, tr.quarters + 4, s.quarters);
  });

  RuelleEstimate r;
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < out.size(); ++i) {
    r.attempts += out[i].draws;
    if (out[i].ok) {
      good.push_back(i);
    } else {
      ++r.failed_samples;
    }
  }
  if (2 * r.failed_samples > samples) {
    throw Error(ErrorCode::SampleBudgetExhausted,
                std::to_string(r.failed_samples) + " of " +
                    std::to_string(samples) + " samples found no point of X");
  }
  r.samples = static_cast<long>(good.size());
  domain_volume(field, r.samples, r.attempts, r.volume, r.volume_stderr);

  auto combine = [&](double mean, double se, double& est, double& est_se) {
    est = r.volume * mean;
    est_se = std::hypot(r.volume * se, mean * r.volume_stderr);
  };
  const int quarter_index[3] = {0, 1, 3};
  const double quarter_time[3] = {0.25 * T, 0.5 * T, T};
  for (int q = 0; q < 3; ++q) {
    std::vector<double> dens;
    dens.reserve(good.size());
    for (std::size_t i : good) {
      dens.push_back(out[i].quarters[quarter_index[q]] / quarter_time[q]);
    }
    double mean = 0.0, se = 0.0;
    mean_and_stderr(dens, mean, se);
    EstimatePoint pt;
    pt.T = quarter_time[q];
    combine(mean, se, pt.estimate, pt.stderr_);
    r.convergence.push_back(pt);
    if (q == 2) {
      r.mean_density = mean;
      r.density_stderr = se;
      r.estimate = pt.estimate;
      r.stderr_ = pt.stderr_;
    }
  }

  // Discretisation check: rerun a few samples at half the step.
  const std::size_t pilot = std::min<std::size_t>(std::max(opts.pilot, 0), good.size());
  std::vector<double> change(pilot, 0.0);
  parallel_for(pilot, opts.exec, [&](std::size_t p) {
    const SampleOutcome& s = out[good[p]];
    const CocycleTrajectory tr =
        integrate_cocycle(field, s.z, T, 0.5 * s.dt, opts.integrator);
    change[p] = std::abs(tr.final_lift() - s.quarters[3]) / T;
  });
  for (double c : change) r.discretization = std::max(r.discretization, c);
  return r;
}

TraceBoundReport trace_bound_check(const HamiltonianField& field, double T,
                                   long samples, std::uint64_t seed,
                                   const EstimateOptions& opts) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be > 0");
  const int n = field.n();
  // Convexity and the trace integrand on the same points the estimate uses.
  std::vector<double> trace(samples, 0.0), min_eig(samples, 0.0);
  std::vector<char> ok(samples, 0);
  parallel_for(samples, opts.exec, [&](std::size_t i) {
    Vector z;
    long draws = 0;
    if (!sample_domain(field, seed, i, opts.draws_per_sample, z, draws)) return;
    ok[i] = 1;
    const Matrix h = field.hessian(z);
    trace[i] = h.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    min_eig[i] = eig.eigenvalues().minCoeff();
  });
  TraceBoundReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  std::vector<double> tr_ok;
  for (long i = 0; i < samples; ++i) {
    if (!ok[i]) continue;
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, min_eig[i]);
    if (min_eig[i] < -1e-8) {
      throw Error(ErrorCode::NotConvexField,
                  "Hessian eigenvalue " + std::to_string(min_eig[i]) +
                      " at sample " + std::to_string(i));
    }
    tr_ok.push_back(trace[i]);
  }
  rep.ruelle = ruelle_estimate(field, T, samples, seed, opts);
  double mean = 0.0, se = 0.0;
  mean_and_stderr(tr_ok, mean, se);
  rep.trace_integral = rep.ruelle.volume * mean;
  rep.trace_stderr = std::hypot(rep.ruelle.volume * se, mean * rep.ruelle.volume_stderr);
  const double factor = 8.0 * n * n / kPi;
  rep.bound = factor * rep.trace_integral;
  rep.bound_stderr = factor * rep.trace_stderr;
  rep.holds = rep.ruelle.estimate - 3.0 * rep.ruelle.stderr_ <=
              rep.bound + 3.0 * rep.bound_stderr;
  return rep;
}

}  // namespace ruelle
