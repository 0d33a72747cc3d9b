#include "waveguide/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace wg {

Rule1D gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  // Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.nodes[i] = mid + half * es.eigenvalues()[i];
    rule.weights[i] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

Rule1D composite_gauss(int n, int panels, double lo, double hi) {
  if (panels < 1) throw std::invalid_argument("composite_gauss: panels must be positive");
  Rule1D out;
  out.nodes.resize(n * panels);
  out.weights.resize(n * panels);
  const double step = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    Rule1D r = gauss_legendre(n, lo + p * step, lo + (p + 1) * step);
    out.nodes.segment(p * n, n) = r.nodes;
    out.weights.segment(p * n, n) = r.weights;
  }
  return out;
}

namespace {

TriangleRule make_rule(int degree) {
  TriangleRule r;
  switch (degree) {
    case 1:
      r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
      r.weights = {1.0};
      break;
    case 2:
      r.barycentric = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
      r.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
      break;
    case 5: {
      // Radon's 7-point rule.
      const double s = std::sqrt(15.0);
      const double a1 = (6.0 - s) / 21.0, b1 = (9.0 + 2.0 * s) / 21.0;
      const double a2 = (6.0 + s) / 21.0, b2 = (9.0 - 2.0 * s) / 21.0;
      const double w1 = (155.0 - s) / 1200.0, w2 = (155.0 + s) / 1200.0;
      r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3},
                       {b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1},
                       {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}};
      r.weights = {9.0 / 40, w1, w1, w1, w2, w2, w2};
      break;
    }
    default:
      throw std::invalid_argument("triangle_rule: supported degrees are 1, 2, 5");
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static const TriangleRule r1 = make_rule(1);
  static const TriangleRule r2 = make_rule(2);
  static const TriangleRule r5 = make_rule(5);
  if (degree <= 1) return r1;
  if (degree == 2) return r2;
  if (degree <= 5) return r5;
  throw std::invalid_argument("triangle_rule: degree above 5 not available");
}

}  // namespace wg
