#include <cmath>
#include <vector>

#include "ruelle/quadrature.hpp"

namespace ruelle {

void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "order must be >= 1");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = beta;
    jac(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  nodes.resize(order);
  weights.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    weights[i] = 2.0 * v * v;
  }
}

namespace {

struct Rule {
  std::vector<double> t;  // nodes on [0, 1]
  std::vector<double> w;
};

Rule composite(int panels, int order) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  Rule r;
  for (int p = 0; p < panels; ++p) {
    const double a = double(p) / panels;
    const double h = 1.0 / panels;
    for (int i = 0; i < order; ++i) {
      r.t.push_back(a + 0.5 * h * (x[i] + 1.0));
      r.w.push_back(0.5 * h * w[i]);
    }
  }
  return r;
}

double recurse(int level, int n, double rem, Point& u, const Rule& rule,
               const SimplexIntegrand& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.t.size(); ++i) {
    const double x = rem * rule.t[i];
    u(level) = x;
    double v;
    if (level == n - 2) {
      u(n - 1) = rem - x;
      v = g(u);
    } else {
      v = recurse(level + 1, n, rem - x, u, rule, g);
    }
    sum += rule.w[i] * rem * v;
  }
  return sum;
}

}  // namespace

double integrate_simplex_reference(int n, const SimplexIntegrand& g,
                                   int panels, int order) {
  Point u = Point::Zero(n);
  if (n == 1) {
    u(0) = 1.0;
    return g(u);
  }
  const Rule rule = composite(panels, order);
  return recurse(0, n, 1.0, u, rule, g);
}

}  // namespace ruelle
