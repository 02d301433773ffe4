#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace ruelle {

// Complex dimension cap. Fixed-capacity Eigen types keep the hot loops
// (integrator steps, quadrature nodes) free of heap allocation.
inline constexpr int kMaxDim = 8;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::ColMajor, 2 * kMaxDim, 2 * kMaxDim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor,
                             2 * kMaxDim, 1>;
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor,
                            kMaxDim, 1>;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::ColMajor, kMaxDim, kMaxDim>;
using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::ColMajor, 2 * kMaxDim, 2 * kMaxDim>;
using CSquare = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::ColMajor, kMaxDim, kMaxDim>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ErrorCode {
  InvalidArgument,
  SpecParseError,
  NonSymplecticInput,
  IllConditioned,
  NotUnitary,
  SingularP,
  AmbiguousSpectrum,
  UndersampledPath,
  PersistentDegeneracy,
  NotALoop,
  NonIntegralLift,
  DegenerateA,
  SpectralRadiusTooLarge,
  UnknownBlockType,
  EvaluationAtOrigin,
  QuadratureFailure,
  NotConcave,
  ResolutionTooCoarse,
  EnergyDriftExceeded,
  SampleBudgetExhausted,
  NotConvexField,
  UnsortedWidths,
  SandwichHypothesisFailed,
  ContainmentCheckFailed,
  NoFeasibleA,
  ConcavityLost,
};

std::string_view to_string(ErrorCode code);

// Errors caused by the caller's input, as opposed to a computation that
// could not reach its tolerance.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Tolerances {
  double symp = 1e-10;
  double eig = 1e-8;
  double recon = 1e-9;
};

// Standard form matrix [[0, -I], [I, 0]] in (x_1..x_n, y_1..y_n) order.
Matrix omega(int n);

double max_abs(const Matrix& m);

}  // namespace ruelle
