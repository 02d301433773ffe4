#include "ruelle/symplin.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace ruelle {

namespace {

void require_even_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0 ||
      m.rows() > 2 * kMaxDim) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " must be 2n x 2n with 1 <= n <= 8");
  }
}

}  // namespace

double symplectic_defect(const Matrix& m) {
  const int n = static_cast<int>(m.rows()) / 2;
  const Matrix w = omega(n);
  return max_abs(m * w * m.transpose() - w);
}

bool is_symplectic(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) return false;
  return symplectic_defect(m) <= tol && m.determinant() > 0.0;
}

SymplecticMatrix::SymplecticMatrix(Matrix m, double tol) : m_(std::move(m)) {
  require_even_square(m_, "symplectic matrix");
  const double defect = symplectic_defect(m_);
  if (!(defect <= tol)) {
    throw Error(ErrorCode::NonSymplecticInput,
                "|A W A^T - W|_max = " + std::to_string(defect));
  }
  if (!(m_.determinant() > 0.0)) {
    throw Error(ErrorCode::NonSymplecticInput, "det(A) <= 0");
  }
}

SymplecticMatrix SymplecticMatrix::trusted(Matrix m) {
  SymplecticMatrix a;
  a.m_ = std::move(m);
  return a;
}

LieAlgebraElement::LieAlgebraElement(Matrix m, double tol) : m_(std::move(m)) {
  require_even_square(m_, "sp(2n) element");
  const Matrix w = omega(n());
  const double defect = max_abs(m_ * w + w * m_.transpose());
  if (!(defect <= tol)) {
    throw Error(ErrorCode::NonSymplecticInput,
                "|A W + W A^T|_max = " + std::to_string(defect));
  }
}

LieAlgebraElement LieAlgebraElement::from_symmetric(const Matrix& s) {
  require_even_square(s, "symmetric generator");
  const Matrix sym = 0.5 * (s + s.transpose());
  return LieAlgebraElement(omega(static_cast<int>(s.rows()) / 2) * sym,
                           1e-12 * std::max(1.0, max_abs(sym)));
}

PolarPair polar_decompose(const SymplecticMatrix& a, const Tolerances&) {
  const Matrix& m = a.matrix();
  const Matrix ata = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ata);
  const auto& lam = eig.eigenvalues();
  const double lo = lam.minCoeff();
  const double hi = lam.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e14) {
    throw Error(ErrorCode::IllConditioned,
                "cond(A^T A) = " + std::to_string(hi / lo));
  }
  const Vector root = lam.cwiseSqrt();
  const Matrix& v = eig.eigenvectors();
  PolarPair out;
  out.positive = v * root.asDiagonal() * v.transpose();
  const Matrix inv_root = v * root.cwiseInverse().asDiagonal() * v.transpose();
  out.unitary = m * inv_root;
  return out;
}

CSquare complex_part(const Matrix& m) {
  const int n = static_cast<int>(m.rows()) / 2;
  CSquare c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = 0.5 * (m(i, j) + m(n + i, n + j));
      const double y = 0.5 * (m(n + i, j) - m(i, n + j));
      c(i, j) = Complex(x, y);
    }
  }
  return c;
}

double complex_determinant_phase(const Matrix& u, double tol) {
  require_even_square(u, "unitary matrix");
  const int n = static_cast<int>(u.rows()) / 2;
  const double block =
      std::max(max_abs(u.topLeftCorner(n, n) - u.bottomRightCorner(n, n)),
               max_abs(u.topRightCorner(n, n) + u.bottomLeftCorner(n, n)));
  const double orth =
      max_abs(u.transpose() * u - Matrix::Identity(2 * n, 2 * n));
  if (block > tol || orth > tol) {
    throw Error(ErrorCode::NotUnitary,
                "block defect " + std::to_string(block) +
                    ", orthogonality defect " + std::to_string(orth));
  }
  const Complex det = complex_part(u).determinant();
  if (std::abs(std::abs(det) - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotUnitary,
                "|det_C| = " + std::to_string(std::abs(det)));
  }
  return std::arg(det);
}

double unitary_phase(const Matrix& m) {
  return std::arg(complex_part(m).determinant());
}

Complex complex_trace(const Matrix& m) { return complex_part(m).trace(); }

Matrix solve_lyapunov(const Matrix& p, const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
  const auto& lam = eig.eigenvalues();
  if (!(lam.minCoeff() > 0.0)) {
    throw Error(ErrorCode::SingularP,
                "min eigenvalue " + std::to_string(lam.minCoeff()));
  }
  const Matrix& v = eig.eigenvectors();
  Matrix m = v.transpose() * s * v;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) m(i, j) *= 2.0 / (lam(i) + lam(j));
  }
  return v * m * v.transpose();
}

Matrix polar_derivative(const SymplecticMatrix& a, const Matrix& direction,
                        const Tolerances& tol) {
  const PolarPair up = polar_decompose(a, tol);
  const Matrix b = up.unitary.transpose() * direction;
  const Matrix m = solve_lyapunov(up.positive, 0.5 * (b - b.transpose()));
  return up.unitary * m;
}

namespace {

struct Cluster {
  Complex center;
  int multiplicity = 0;
};

// Number of positive directions of the Hermitian form Im w(v, conj(w)) on
// the generalized eigenspace of lam with the given algebraic multiplicity.
// Sets ambiguous when the form is numerically degenerate.
int krein_positive(const Matrix& a, Complex lam, int mult, double tol,
                   bool& ambiguous, bool& defective) {
  const int dim = static_cast<int>(a.rows());
  const int n = dim / 2;
  CMatrix shifted = a.cast<Complex>();
  shifted.diagonal().array() -= lam;
  CMatrix power = CMatrix::Identity(dim, dim);
  for (int k = 0; k < mult; ++k) power = power * shifted;
  Eigen::JacobiSVD<CMatrix> svd(power, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv(0));
  // Kernel dimension should match the algebraic multiplicity.
  int kernel = 0;
  for (int i = 0; i < dim; ++i) {
    if (sv(i) <= 1e-6 * scale) ++kernel;
  }
  if (kernel != mult) defective = true;
  const CMatrix basis = svd.matrixV().rightCols(mult);

  // J = [[0, I], [-I, 0]] so that w(v, w) = v^T J w and w(e_x, e_y) = 1.
  CMatrix jb(dim, mult);
  jb.topRows(n) = basis.bottomRows(n).conjugate();
  jb.bottomRows(n) = -basis.topRows(n).conjugate();
  CMatrix g = Complex(0.0, -1.0) * (basis.transpose() * jb);
  g = 0.5 * (g + g.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> herm(g);
  const auto& ev = herm.eigenvalues();
  const double gscale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  int positive = 0;
  for (int i = 0; i < mult; ++i) {
    if (std::abs(ev(i)) < tol * gscale) ambiguous = true;
    if (ev(i) > 0.0) ++positive;
  }
  return positive;
}

}  // namespace

EigenvalueBase eigenvalue_quasimorphism_details(const SymplecticMatrix& a,
                                                const Tolerances& tol) {
  const Matrix& m = a.matrix();
  Eigen::EigenSolver<Matrix> solver(m, false);
  const auto& lam = solver.eigenvalues();
  const double t = tol.eig;

  auto on_circle = [](Complex z, double eps) {
    return std::abs(std::abs(z) - 1.0) <= eps && std::abs(z.imag()) > eps;
  };
  auto negative_real = [](Complex z, double eps) {
    return z.real() < 0.0 && std::abs(z.imag()) <= eps;
  };

  EigenvalueBase out;
  bool ambiguous = false;
  std::vector<Cluster> clusters;
  for (int i = 0; i < lam.size(); ++i) {
    const Complex z = lam(i);
    if (on_circle(z, t) != on_circle(z, 0.5 * t) ||
        negative_real(z, t) != negative_real(z, 0.5 * t)) {
      ambiguous = true;
    }
    if (negative_real(z, t)) {
      ++out.negative_multiplicity;
      continue;
    }
    if (!on_circle(z, t)) continue;
    ++out.unit_eigenvalues;
    bool merged = false;
    for (auto& c : clusters) {
      if (std::abs(c.center - z) < 1e-6) {
        c.center = (c.center * double(c.multiplicity) + z) /
                   double(c.multiplicity + 1);
        ++c.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({z, 1});
  }

  double angle = 0.5 * kPi * out.negative_multiplicity;
  for (const auto& c : clusters) {
    const int pos =
        krein_positive(m, c.center, c.multiplicity, t, ambiguous,
                       out.defective);
    angle += pos * std::arg(c.center);
  }
  if (ambiguous) {
    throw Error(ErrorCode::AmbiguousSpectrum,
                "eigenvalue classification unstable at tol_eig");
  }
  out.angle = wrap_angle(angle);
  return out;
}

double eigenvalue_quasimorphism_base(const SymplecticMatrix& a,
                                     const Tolerances& tol) {
  return eigenvalue_quasimorphism_details(a, tol).angle;
}

Matrix matrix_exp(const Matrix& m) {
  const Eigen::MatrixXd dense = m;
  return Matrix(dense.exp());
}

Matrix diagonal_unitary(const Eigen::VectorXd& angles) {
  const int n = static_cast<int>(angles.size());
  Matrix u = Matrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    const double c = std::cos(angles(j));
    const double s = std::sin(angles(j));
    u(j, j) = c;
    u(n + j, n + j) = c;
    u(j, n + j) = -s;
    u(n + j, j) = s;
  }
  return u;
}

double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

}  // namespace ruelle
