#pragma once

#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "waveguide/mesh.hpp"

namespace wg {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// P1 finite-element space on a mesh: stiffness K, consistent mass M, lumped mass.
class FemSpace {
 public:
  explicit FemSpace(TriangleMesh mesh);

  const TriangleMesh& mesh() const { return mesh_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& mass() const { return mass_; }
  const Eigen::VectorXd& lumped_mass() const { return lumped_; }
  /// Indices of nodes not on the boundary, ascending.
  const std::vector<int>& interior_nodes() const { return interior_; }

 private:
  TriangleMesh mesh_;
  SparseMatrix stiffness_;
  SparseMatrix mass_;
  Eigen::VectorXd lumped_;
  std::vector<int> interior_;
};

struct FemEigenOptions {
  double tolerance = 1e-10;  // relative residual of K x - mu M x
  int max_iterations = 2000;
};

struct FemEigenpair {
  double mu = 0.0;
  Eigen::VectorXd nodal;  // M-normalized, full nodal vector (zeros on the boundary for dirichlet)
};

/// All eigenpairs of -Laplace with mu <= cutoff, ascending, M-orthonormal.
///
/// Shift-invert block subspace iteration with Rayleigh-Ritz. For neumann the
/// constant mode is inserted exactly and deflated from the iteration.
std::vector<FemEigenpair> fem_eigs(const FemSpace& space, BoundaryCondition bc, double cutoff,
                                   const FemEigenOptions& opts = {});

}  // namespace wg
