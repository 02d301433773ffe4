#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "ruelle/symplin.hpp"

namespace ruelle {

enum class PathTag { General, DiagonalUnitary, Unipotent };

// Time-sampled path [0, T] -> Sp(2n) starting at (0, I).
class SymplecticPath {
 public:
  SymplecticPath(int n, std::vector<double> times, std::vector<Matrix> mats,
                 PathTag tag = PathTag::General,
                 double tol = Tolerances{}.symp);

  // Samples t -> f(t) on a uniform grid of `intervals` + 1 points.
  static SymplecticPath sample(int n, const std::function<Matrix(double)>& f,
                               double t_end, int intervals,
                               PathTag tag = PathTag::General);

  int n() const { return n_; }
  std::size_t size() const { return times_.size(); }
  double time(std::size_t i) const { return times_[i]; }
  const Matrix& matrix(std::size_t i) const { return mats_[i]; }
  const Matrix& end() const { return mats_.back(); }
  double duration() const { return times_.back(); }
  PathTag tag() const { return tag_; }

  // This path followed by other * end(), as an element of the universal
  // cover this is the product [other] * [this].
  SymplecticPath concatenate(const SymplecticPath& other) const;
  // k-fold concatenation with itself.
  SymplecticPath power(int k) const;
  // t -> this(t) * other(t) on a shared time grid.
  SymplecticPath pointwise_product(const SymplecticPath& other) const;

 private:
  SymplecticPath() = default;
  int n_ = 0;
  std::vector<double> times_;
  std::vector<Matrix> mats_;
  PathTag tag_ = PathTag::General;
};

enum class LiftMethod { Determinant, Eigenvalue };

struct LiftedAngle {
  double value = 0.0;  // full turns
  LiftMethod method = LiftMethod::Determinant;
  // Largest phase increment between consecutive samples, in turns. The
  // lift is unambiguous while this stays below 0.25.
  double defect_budget = 0.0;
  int skipped_samples = 0;
};

// Unwrapped det_C of the unitary polar factor, in turns.
LiftedAngle lift_rotation(const SymplecticPath& path,
                          const Tolerances& tol = {});

// Unwrapped eigenvalue base map, in turns. Isolated samples with an
// ambiguous spectrum are skipped.
LiftedAngle lift_eigenvalue_rotation(const SymplecticPath& path,
                                     const Tolerances& tol = {});

LiftedAngle lift(const SymplecticPath& path, LiftMethod method,
                 const Tolerances& tol = {});

int maslov_index(const SymplecticPath& loop, const Tolerances& tol = {});

struct SignatureAxiom {
  int index = 0;
  SymplecticPath path;  // t -> exp(2 pi Omega A t), t in [0, 1]
};

SignatureAxiom cz_signature_axiom(const Matrix& a, int intervals = 64);

int lcz_u1(double theta);

struct U1Rotation {
  double theta;
};
struct Loop {
  long k;
};
// Unipotent block with rotation number 0 on m complex dimensions. Only the
// lower bound LCZ >= 2 rho - m = -m is known.
struct UnipotentZeroRho {
  int m;
};
using BlockIndex = std::variant<U1Rotation, Loop, UnipotentZeroRho>;

struct IndexResult {
  long exact_part = 0;  // sum over blocks with exact indices
  long value = 0;       // the index if exact, else a certified lower bound
  bool exact = true;
  // Some rotation block had theta = +inf (non-smooth boundary). The true
  // lower bound is then +inf and value only counts the finite blocks.
  bool unbounded = false;

  bool at_least(long k) const { return unbounded || value >= k; }
};

IndexResult lcz_block_sum(const std::vector<BlockIndex>& blocks);

struct Homogenization {
  double rho = 0.0;
  std::vector<std::pair<int, double>> sequence;  // (k, q(path^k)/k)
  bool monotone = true;  // |q_k/k - rho| non-increasing along sequence
};

// rho estimate q(path^k_max)/k_max. The eigenvalue lift is exactly
// homogeneous on unipotent and elliptic endpoints, so it is the default.
Homogenization homogenized_rotation(const SymplecticPath& path, int k_max = 32,
                                    LiftMethod method = LiftMethod::Eigenvalue,
                                    const Tolerances& tol = {});

}  // namespace ruelle
