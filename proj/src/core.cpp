#include "ruelle/core.hpp"

namespace ruelle {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SpecParseError: return "SpecParseError";
    case ErrorCode::NonSymplecticInput: return "NonSymplecticInput";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::SingularP: return "SingularP";
    case ErrorCode::AmbiguousSpectrum: return "AmbiguousSpectrum";
    case ErrorCode::UndersampledPath: return "UndersampledPath";
    case ErrorCode::PersistentDegeneracy: return "PersistentDegeneracy";
    case ErrorCode::NotALoop: return "NotALoop";
    case ErrorCode::NonIntegralLift: return "NonIntegralLift";
    case ErrorCode::DegenerateA: return "DegenerateA";
    case ErrorCode::SpectralRadiusTooLarge: return "SpectralRadiusTooLarge";
    case ErrorCode::UnknownBlockType: return "UnknownBlockType";
    case ErrorCode::EvaluationAtOrigin: return "EvaluationAtOrigin";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NotConcave: return "NotConcave";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::EnergyDriftExceeded: return "EnergyDriftExceeded";
    case ErrorCode::SampleBudgetExhausted: return "SampleBudgetExhausted";
    case ErrorCode::NotConvexField: return "NotConvexField";
    case ErrorCode::UnsortedWidths: return "UnsortedWidths";
    case ErrorCode::SandwichHypothesisFailed: return "SandwichHypothesisFailed";
    case ErrorCode::ContainmentCheckFailed: return "ContainmentCheckFailed";
    case ErrorCode::NoFeasibleA: return "NoFeasibleA";
    case ErrorCode::ConcavityLost: return "ConcavityLost";
  }
  return "UnknownError";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::SpecParseError:
    case ErrorCode::NonSymplecticInput:
    case ErrorCode::NotUnitary:
    case ErrorCode::NotALoop:
    case ErrorCode::DegenerateA:
    case ErrorCode::SpectralRadiusTooLarge:
    case ErrorCode::UnknownBlockType:
    case ErrorCode::EvaluationAtOrigin:
    case ErrorCode::UnsortedWidths:
    case ErrorCode::NotConcave:
    case ErrorCode::NotConvexField:
      return true;
    default:
      return false;
  }
}

Matrix omega(int n) {
  Matrix w = Matrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    w(i, n + i) = -1.0;
    w(n + i, i) = 1.0;
  }
  return w;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace ruelle
