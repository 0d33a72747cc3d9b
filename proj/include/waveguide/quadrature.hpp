#pragma once

#include <vector>

#include <Eigen/Dense>

namespace wg {

/// Nodes and weights of a one-dimensional rule on an interval.
struct Rule1D {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [lo, hi] (Golub-Welsch).
Rule1D gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Composite Gauss-Legendre: `panels` equal panels of `n` points each.
Rule1D composite_gauss(int n, int panels, double lo, double hi);

/// Barycentric rule on the reference triangle; weights sum to 1.
struct TriangleRule {
  std::vector<Eigen::Vector3d> barycentric;
  std::vector<double> weights;
};

/// Symmetric triangle rule exact for polynomials of the given degree (1, 2 or 5).
const TriangleRule& triangle_rule(int degree);

}  // namespace wg
