#include "gbnns/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace gbnns::quadrature {
namespace {

constexpr int kOrder = 16;

struct Rule {
  Eigen::Matrix<double, kOrder, 1> nodes;
  Eigen::Matrix<double, kOrder, 1> weights;
};

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre
// recurrence, weights are 2 * (first eigenvector component)^2.
Rule make_rule() {
  Eigen::Matrix<double, kOrder, kOrder> jacobi = Eigen::Matrix<double, kOrder, kOrder>::Zero();
  for (int i = 1; i < kOrder; ++i) {
    const double beta = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = beta;
    jacobi(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kOrder, kOrder>> solver(jacobi);
  Rule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

double panel(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < kOrder; ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
  return half * sum;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole,
             double tol, int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  const double refined = left + right;
  if (depth >= max_depth || std::abs(refined - whole) <= tol) return refined;
  return adapt(f, a, mid, left, 0.5 * tol, depth + 1, max_depth) +
         adapt(f, mid, b, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options) {
  if (a == b) return 0.0;
  return adapt(f, a, b, panel(f, a, b), options.abs_tol, 0, options.max_depth);
}

}  // namespace gbnns::quadrature
