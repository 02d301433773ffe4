#pragma once

#include "ruelle/core.hpp"

namespace ruelle {

// 2n x 2n real matrix with A Omega A^T = Omega, validated on construction.
class SymplecticMatrix {
 public:
  explicit SymplecticMatrix(Matrix m, double tol = Tolerances{}.symp);
  // Skips validation. For matrices produced by code that already
  // guarantees symplecticity (integrators, products of checked matrices).
  static SymplecticMatrix trusted(Matrix m);

  int n() const { return static_cast<int>(m_.rows()) / 2; }
  const Matrix& matrix() const { return m_; }

 private:
  SymplecticMatrix() = default;
  Matrix m_;
};

// Element of sp(2n): A Omega + Omega A^T = 0.
class LieAlgebraElement {
 public:
  explicit LieAlgebraElement(Matrix m, double tol = Tolerances{}.symp);
  static LieAlgebraElement from_symmetric(const Matrix& s);

  int n() const { return static_cast<int>(m_.rows()) / 2; }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

struct PolarPair {
  Matrix unitary;
  Matrix positive;
};

double symplectic_defect(const Matrix& m);
bool is_symplectic(const Matrix& m, double tol = Tolerances{}.symp);

// A = U P with P = (A^T A)^{1/2} from a symmetric eigendecomposition.
PolarPair polar_decompose(const SymplecticMatrix& a,
                          const Tolerances& tol = {});

// n x n complex matrix X + iY of the complex-linear part of m, where
// m = [[A, B], [C, D]] gives X = (A + D)/2, Y = (C - B)/2. For a unitary
// block matrix [[X, -Y], [Y, X]] this is the exact identification.
CSquare complex_part(const Matrix& m);

// arg det_C(X + iY) of an orthogonal-symplectic matrix, in (-pi, pi].
double complex_determinant_phase(const Matrix& u,
                                 double tol = Tolerances{}.symp);

// Phase of det_C of the unitary polar factor of any invertible m, computed
// without the decomposition: the complex-linear part of U P equals U times
// a Hermitian positive matrix, so both determinants share their argument.
double unitary_phase(const Matrix& m);

// tr_C of the complex-linear part: tr X + i tr Y.
Complex complex_trace(const Matrix& m);

// M with M P + P M = 2 S.
Matrix solve_lyapunov(const Matrix& p, const Matrix& s);

// Derivative of the unitary polar factor at a in the given direction.
Matrix polar_derivative(const SymplecticMatrix& a, const Matrix& direction,
                        const Tolerances& tol = {});

struct EigenvalueBase {
  double angle = 0.0;           // arg of the base map, in (-pi, pi]
  int negative_multiplicity = 0;
  int unit_eigenvalues = 0;     // unit-circle eigenvalues off {+1, -1}
  bool defective = false;       // generalized eigenspace dimension mismatch
};

EigenvalueBase eigenvalue_quasimorphism_details(const SymplecticMatrix& a,
                                                const Tolerances& tol = {});
double eigenvalue_quasimorphism_base(const SymplecticMatrix& a,
                                     const Tolerances& tol = {});

Matrix matrix_exp(const Matrix& m);

// Block-diagonal unitary with phases exp(i * angles[j]) on (x_j, y_j).
Matrix diagonal_unitary(const Eigen::VectorXd& angles);

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace ruelle
