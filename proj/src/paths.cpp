#include "ruelle/paths.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ruelle {

SymplecticPath::SymplecticPath(int n, std::vector<double> times,
                               std::vector<Matrix> mats, PathTag tag,
                               double tol)
    : n_(n), times_(std::move(times)), mats_(std::move(mats)), tag_(tag) {
  if (n < 1 || n > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "path dimension out of range");
  }
  if (times_.empty() || times_.size() != mats_.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "path needs matching, non-empty time and matrix lists");
  }
  if (times_.front() != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "path must start at t = 0");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "path times must be strictly increasing");
    }
  }
  for (const auto& m : mats_) {
    if (m.rows() != 2 * n || m.cols() != 2 * n) {
      throw Error(ErrorCode::InvalidArgument, "path sample has wrong shape");
    }
  }
  if (max_abs(mats_.front() - Matrix::Identity(2 * n, 2 * n)) > tol) {
    throw Error(ErrorCode::InvalidArgument, "path must start at I");
  }
  for (const auto& m : mats_) {
    const double d = symplectic_defect(m);
    if (!(d <= tol * std::max(1.0, m.squaredNorm()))) {
      throw Error(ErrorCode::NonSymplecticInput,
                  "path sample defect " + std::to_string(d));
    }
  }
}

SymplecticPath SymplecticPath::sample(int n,
                                      const std::function<Matrix(double)>& f,
                                      double t_end, int intervals,
                                      PathTag tag) {
  if (intervals < 1 || !(t_end > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "path sampling needs T > 0");
  }
  std::vector<double> t(intervals + 1);
  std::vector<Matrix> m(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    t[i] = t_end * i / intervals;
    m[i] = i == 0 ? Matrix(Matrix::Identity(2 * n, 2 * n)) : f(t[i]);
  }
  return SymplecticPath(n, std::move(t), std::move(m), tag);
}

SymplecticPath SymplecticPath::concatenate(const SymplecticPath& other) const {
  if (other.n_ != n_) {
    throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  }
  SymplecticPath out;
  out.n_ = n_;
  out.tag_ = tag_ == other.tag_ ? tag_ : PathTag::General;
  out.times_ = times_;
  out.mats_ = mats_;
  const double shift = duration();
  const Matrix e = end();
  for (std::size_t i = 1; i < other.size(); ++i) {
    out.times_.push_back(shift + other.times_[i]);
    out.mats_.push_back(other.mats_[i] * e);
  }
  return out;
}

SymplecticPath SymplecticPath::power(int k) const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "power needs k >= 1");
  SymplecticPath out;
  out.n_ = n_;
  out.tag_ = tag_;
  out.times_ = times_;
  out.mats_ = mats_;
  Matrix e = end();
  for (int j = 1; j < k; ++j) {
    const double shift = j * duration();
    for (std::size_t i = 1; i < size(); ++i) {
      out.times_.push_back(shift + times_[i]);
      out.mats_.push_back(mats_[i] * e);
    }
    e = end() * e;
  }
  return out;
}

SymplecticPath SymplecticPath::pointwise_product(
    const SymplecticPath& other) const {
  if (other.n_ != n_ || other.size() != size()) {
    throw Error(ErrorCode::InvalidArgument, "paths not on a shared grid");
  }
  SymplecticPath out;
  out.n_ = n_;
  out.tag_ = PathTag::General;
  out.times_ = times_;
  out.mats_.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(times_[i] - other.times_[i]) >
        1e-12 * std::max(1.0, std::abs(times_[i]))) {
      throw Error(ErrorCode::InvalidArgument, "paths not on a shared grid");
    }
    out.mats_.push_back(mats_[i] * other.mats_[i]);
  }
  return out;
}

namespace {

constexpr double kMaxJump = 0.5 * kPi;

double determinant_phase(const Matrix& m, const Tolerances& tol) {
  const PolarPair up = polar_decompose(SymplecticMatrix::trusted(m), tol);
  // Polar factors of well-conditioned samples are unitary to roundoff; the
  // looser check leaves room for moderately stretched paths.
  return complex_determinant_phase(up.unitary, 1e-8);
}

}  // namespace

LiftedAngle lift_rotation(const SymplecticPath& path, const Tolerances& tol) {
  LiftedAngle out;
  out.method = LiftMethod::Determinant;
  double prev = determinant_phase(path.matrix(0), tol);
  double total = 0.0;
  double biggest = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double cur = determinant_phase(path.matrix(i), tol);
    const double step = wrap_angle(cur - prev);
    if (std::abs(step) >= kMaxJump) {
      throw Error(ErrorCode::UndersampledPath,
                  "phase jump " + std::to_string(step) + " rad at t = " +
                      std::to_string(path.time(i)));
    }
    biggest = std::max(biggest, std::abs(step));
    total += step;
    prev = cur;
  }
  out.value = total / kTwoPi;
  out.defect_budget = biggest / kTwoPi;
  return out;
}

LiftedAngle lift_eigenvalue_rotation(const SymplecticPath& path,
                                     const Tolerances& tol) {
  LiftedAngle out;
  out.method = LiftMethod::Eigenvalue;
  double prev = 0.0;
  bool have_prev = false;
  double total = 0.0;
  double biggest = 0.0;
  int skipped = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    double cur;
    try {
      cur = eigenvalue_quasimorphism_base(
          SymplecticMatrix::trusted(path.matrix(i)), tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AmbiguousSpectrum || i == 0) throw;
      ++skipped;
      continue;
    }
    if (have_prev) {
      const double step = wrap_angle(cur - prev);
      if (std::abs(step) >= kMaxJump) {
        throw Error(ErrorCode::UndersampledPath,
                    "eigenvalue phase jump " + std::to_string(step) +
                        " rad at t = " + std::to_string(path.time(i)));
      }
      biggest = std::max(biggest, std::abs(step));
      total += step;
    }
    prev = cur;
    have_prev = true;
  }
  if (skipped > 0.1 * static_cast<double>(path.size())) {
    throw Error(ErrorCode::PersistentDegeneracy,
                std::to_string(skipped) + " of " +
                    std::to_string(path.size()) + " samples ambiguous");
  }
  out.value = total / kTwoPi;
  out.defect_budget = biggest / kTwoPi;
  out.skipped_samples = skipped;
  return out;
}

LiftedAngle lift(const SymplecticPath& path, LiftMethod method,
                 const Tolerances& tol) {
  return method == LiftMethod::Determinant
             ? lift_rotation(path, tol)
             : lift_eigenvalue_rotation(path, tol);
}

int maslov_index(const SymplecticPath& loop, const Tolerances& tol) {
  const int dim = 2 * loop.n();
  const double gap = max_abs(loop.end() - Matrix::Identity(dim, dim));
  if (gap > tol.symp) {
    throw Error(ErrorCode::NotALoop,
                "|M(T) - I|_max = " + std::to_string(gap));
  }
  const double value = lift_rotation(loop, tol).value;
  const double rounded = std::round(value);
  if (std::abs(value - rounded) >= 0.1) {
    throw Error(ErrorCode::NonIntegralLift,
                "loop lift " + std::to_string(value) + " is not integral");
  }
  return static_cast<int>(rounded);
}

SignatureAxiom cz_signature_axiom(const Matrix& a, int intervals) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0 || a.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "A must be 2n x 2n");
  }
  if (max_abs(a - a.transpose()) > 1e-12 * std::max(1.0, max_abs(a))) {
    throw Error(ErrorCode::InvalidArgument, "A must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  int pos = 0;
  int neg = 0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    const double l = eig.eigenvalues()(i);
    if (std::abs(l) < 1e-10) {
      throw Error(ErrorCode::DegenerateA, "A has a zero eigenvalue");
    }
    if (std::abs(l) >= 1.0) {
      throw Error(ErrorCode::SpectralRadiusTooLarge,
                  "eigenvalue " + std::to_string(l));
    }
    (l > 0.0 ? pos : neg) += 1;
  }
  const int n = static_cast<int>(a.rows()) / 2;
  const Matrix gen = kTwoPi * omega(n) * a;
  SymplecticPath path = SymplecticPath::sample(
      n, [&](double t) { return matrix_exp(t * gen); }, 1.0, intervals);
  return SignatureAxiom{(pos - neg) / 2, std::move(path)};
}

int lcz_u1(double theta) {
  return 2 * static_cast<int>(std::ceil(theta)) - 1;
}

IndexResult lcz_block_sum(const std::vector<BlockIndex>& blocks) {
  IndexResult out;
  long bound_part = 0;
  for (const auto& b : blocks) {
    if (const auto* u = std::get_if<U1Rotation>(&b)) {
      if (std::isinf(u->theta) && u->theta > 0.0) {
        out.unbounded = true;
        continue;
      }
      if (!std::isfinite(u->theta)) {
        throw Error(ErrorCode::InvalidArgument, "rotation block is not finite");
      }
      out.exact_part += lcz_u1(u->theta);
    } else if (const auto* l = std::get_if<Loop>(&b)) {
      out.exact_part += 2 * l->k;
    } else if (const auto* q = std::get_if<UnipotentZeroRho>(&b)) {
      if (q->m < 0) {
        throw Error(ErrorCode::InvalidArgument, "unipotent block size < 0");
      }
      bound_part -= q->m;
      out.exact = false;
    } else {
      throw Error(ErrorCode::UnknownBlockType, "unrecognised block");
    }
  }
  out.value = out.exact_part + bound_part;
  if (out.unbounded) out.exact = false;
  return out;
}

Homogenization homogenized_rotation(const SymplecticPath& path, int k_max,
                                    LiftMethod method, const Tolerances& tol) {
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
  Homogenization out;
  std::vector<int> ks;
  for (int k = 1; k < k_max; k *= 2) ks.push_back(k);
  ks.push_back(k_max);
  for (int k : ks) {
    const double q = lift(path.power(k), method, tol).value;
    out.sequence.emplace_back(k, q / k);
  }
  out.rho = out.sequence.back().second;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (const auto& [k, v] : out.sequence) {
    const double gap = std::abs(v - out.rho);
    if (gap > prev_gap + 1e-12) out.monotone = false;
    prev_gap = gap;
  }
  return out;
}

}  // namespace ruelle
