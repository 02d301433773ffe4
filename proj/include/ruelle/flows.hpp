#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "ruelle/parallel.hpp"
#include "ruelle/region.hpp"

namespace ruelle {

// Hamiltonian on R^2n in (x_1..x_n, y_1..y_n) order, homogeneous of degree
// one under Liouville scaling: H(sqrt(s) z) = s H(z). The domain is
// X = {H <= 1}.
class HamiltonianField {
 public:
  virtual ~HamiltonianField() = default;

  virtual int n() const = 0;
  virtual double value(const Vector& z) const = 0;
  // Central differences unless overridden.
  virtual Vector gradient(const Vector& z) const;
  virtual Matrix hessian(const Vector& z) const;
  virtual void derivatives(const Vector& z, Vector& grad, Matrix& hess) const;

  // Half-widths of a box centred at 0 containing X.
  virtual Vector half_widths() const = 0;
  // Volume of X when known without sampling.
  virtual std::optional<double> volume() const { return std::nullopt; }
};

// H = f o mu with mu_j = pi (x_j^2 + y_j^2) and f the canonical function.
class ToricField : public HamiltonianField {
 public:
  explicit ToricField(MomentRegion region);

  int n() const override { return f_.dim(); }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  Matrix hessian(const Vector& z) const override;
  void derivatives(const Vector& z, Vector& grad, Matrix& hess) const override;
  Vector half_widths() const override { return half_widths_; }
  std::optional<double> volume() const override;

  const MomentRegion& region() const { return f_.region(); }
  Point moment(const Vector& z) const;

 private:
  CanonicalFunction f_;
  Vector half_widths_;
  mutable std::once_flag volume_once_;
  mutable double volume_ = 0.0;
};

// H(z) = base(U^T z) for an orthogonal symplectic (unitary) U.
class ConjugatedField : public HamiltonianField {
 public:
  ConjugatedField(std::shared_ptr<const HamiltonianField> base, Matrix unitary);

  int n() const override { return base_->n(); }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  Matrix hessian(const Vector& z) const override;
  void derivatives(const Vector& z, Vector& grad, Matrix& hess) const override;
  Vector half_widths() const override;
  std::optional<double> volume() const override { return base_->volume(); }

 private:
  std::shared_ptr<const HamiltonianField> base_;
  Matrix u_;
};

// H(z_1, z_2) = H_1(z_1) + H_2(z_2) on C^{n_1} x C^{n_2}.
class ProductField : public HamiltonianField {
 public:
  ProductField(std::shared_ptr<const HamiltonianField> first,
               std::shared_ptr<const HamiltonianField> second);

  int n() const override { return first_->n() + second_->n(); }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  Matrix hessian(const Vector& z) const override;
  Vector half_widths() const override;

  Vector first_part(const Vector& z) const;
  Vector second_part(const Vector& z) const;

 private:
  std::shared_ptr<const HamiltonianField> first_, second_;
};

// Field from a plain function; derivatives by finite differences.
class FunctionField : public HamiltonianField {
 public:
  FunctionField(int n, std::function<double(const Vector&)> h,
                Vector half_widths);

  int n() const override { return n_; }
  double value(const Vector& z) const override { return h_(z); }
  Vector half_widths() const override { return half_widths_; }

 private:
  int n_;
  std::function<double(const Vector&)> h_;
  Vector half_widths_;
};

// Largest |H(sqrt(s) z) - s H(z)| / (s H(z)) over random z in the box and
// s in [0.5, 2].
double homogeneity_defect(const HamiltonianField& field, int samples,
                          std::uint64_t seed = 0);

struct IntegratorOptions {
  double step_scale = 0.05;        // dt * ||hess H(x0)|| when dt is automatic
  double dt_max = 0.05;
  int resymplectify_every = 100;
  double energy_tol = 1e-6;        // relative drift between rescalings
  long record_every = 0;           // store every k-th step; 0 = endpoints
};

struct CocycleTrajectory {
  Vector start;
  std::vector<double> times;
  std::vector<Vector> points;
  std::vector<Matrix> cocycles;
  std::vector<double> lift;   // u-tilde in turns at each stored time
  double dt = 0.0;
  long steps = 0;
  double max_energy_drift = 0.0;
  double max_symplectic_defect = 0.0;
  double max_phase_step = 0.0;  // turns
  double quarters[4] = {0, 0, 0, 0};  // u-tilde at T/4, T/2, 3T/4, T

  double final_lift() const { return lift.back(); }
};

// Step size used when dt <= 0 is passed to integrate_cocycle.
double automatic_step(const HamiltonianField& field, const Vector& x0,
                      const IntegratorOptions& opts = {});

// Fixed-step RK4 for z' = Omega grad H(z) and M' = Omega hess H(z) M, with
// Liouville rescaling of z back to the initial energy after every step and
// Newton re-symplectification of M. The step count is a multiple of four so
// that T/4 and T/2 are grid times. dt <= 0 chooses automatic_step.
CocycleTrajectory integrate_cocycle(const HamiltonianField& field,
                                    const Vector& x0, double T, double dt,
                                    const IntegratorOptions& opts = {});

// One Newton step towards Sp(2n): M (I - Omega^{-1} D / 2) with
// D = M^T Omega M - Omega.
Matrix resymplectify(const Matrix& m, int iterations = 2);

// Columns: t, x_1..x_n, y_1..y_n, u.
void write_trajectory_csv(const CocycleTrajectory& traj, std::ostream& os);

struct EstimatePoint {
  double T = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct RuelleEstimate {
  double estimate = 0.0;       // Ru = vol(X) * mean(u_T / T)
  double stderr_ = 0.0;
  double mean_density = 0.0;   // mean of u_T / T
  double density_stderr = 0.0;
  double volume = 0.0;
  double volume_stderr = 0.0;  // 0 when the field knows its volume
  double discretization = 0.0; // largest |change| of u_T / T at dt / 2
  std::vector<EstimatePoint> convergence;  // T/4, T/2, T
  long samples = 0;
  long attempts = 0;           // box draws
  long failed_samples = 0;     // samples whose draw budget ran out
};

struct EstimateOptions {
  double dt = 0.0;             // <= 0: automatic per sample
  IntegratorOptions integrator;
  int pilot = 8;               // samples rerun at dt / 2
  long draws_per_sample = 200; // box draws before a sample counts as failed
  Execution exec = Execution::Parallel;
};

// Uniform random point of X drawn by rejection in the bounding box. Seeds
// the generator from (seed, index); returns false after `budget` misses.
bool sample_domain(const HamiltonianField& field, std::uint64_t seed,
                   std::uint64_t index, long budget, Vector& z, long& draws);

// Monte-Carlo average of u_T / T over X times its volume. Deterministic in
// seed and independent of the execution mode.
RuelleEstimate ruelle_estimate(const HamiltonianField& field, double T,
                               long samples, std::uint64_t seed,
                               const EstimateOptions& opts = {});

struct TraceBoundReport {
  RuelleEstimate ruelle;
  double trace_integral = 0.0;   // integral of tr(hess H) over X
  double trace_stderr = 0.0;
  double bound = 0.0;            // (8 n^2 / pi) * trace_integral
  double bound_stderr = 0.0;
  double min_eigenvalue = 0.0;   // smallest sampled Hessian eigenvalue
  bool holds = false;            // Ru - 3 se <= bound + 3 se
};

// Checks Ru <= (8 n^2 / pi) * integral of tr(-Omega A) with A = Omega hess H.
// Throws NotConvexField when a sampled Hessian has an eigenvalue < -1e-8.
TraceBoundReport trace_bound_check(const HamiltonianField& field, double T,
                                   long samples, std::uint64_t seed,
                                   const EstimateOptions& opts = {});

}  // namespace ruelle
