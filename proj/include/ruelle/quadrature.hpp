#pragma once

#include <functional>

#include "ruelle/core.hpp"
#include "ruelle/parallel.hpp"

namespace ruelle {

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  // Uniform panels of the outermost coordinate; these are the parallel work
  // items and are summed in order.
  int outer_panels = 16;
  // Geometric refinement levels placed at both ends of every coordinate
  // range. Negative means "let the caller decide" (regions supply a value).
  int grading_levels = -1;
  // Bisection budget of each one-dimensional adaptive integral.
  int max_subdivisions = 2000;
  Execution exec = Execution::Parallel;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

// g is evaluated at points u of the standard simplex (u >= 0, sum u = 1).
using SimplexIntegrand = std::function<double(const Point& u)>;

// Integral of g over the standard (n-1)-simplex with respect to
// du_1 ... du_{n-1}, by iterated adaptive Gauss-Kronrod (7/15) in collapsed
// coordinates u_k in [0, 1 - u_1 - ... - u_{k-1}]. For n = 1 this is g(1).
// Throws QuadratureFailure when the error estimate stays above tolerance.
QuadratureResult integrate_simplex(int n, const SimplexIntegrand& g,
                                   const QuadratureSpec& spec);

// Same as integrate_simplex but returns unconverged results instead of
// throwing.
QuadratureResult integrate_simplex_unchecked(int n, const SimplexIntegrand& g,
                                             const QuadratureSpec& spec);

// Adaptive Gauss-Kronrod on [a, b] with geometric grading at both ends.
QuadratureResult integrate_interval(const std::function<double(double)>& f,
                                    double a, double b, double rel_tol,
                                    double abs_tol, int grading_levels = 0,
                                    int max_subdivisions = 2000);

// Serial, non-adaptive reference: composite Gauss-Legendre of the given
// order on `panels` panels per coordinate of the Duffy map
// u_k = (1 - u_1 - ... - u_{k-1}) t_k. Only for smooth integrands.
double integrate_simplex_reference(int n, const SimplexIntegrand& g,
                                   int panels, int order);

// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace ruelle
