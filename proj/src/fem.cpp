#include "waveguide/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

namespace wg {

FemSpace::FemSpace(TriangleMesh mesh) : mesh_(std::move(mesh)) {
  const int n = mesh_.num_nodes();
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * mesh_.num_triangles());
  mt.reserve(9 * mesh_.num_triangles());
  for (int t = 0; t < mesh_.num_triangles(); ++t) {
    const auto& tri = mesh_.triangles()[t];
    const auto& g = mesh_.hat_gradients(t);
    const double area = mesh_.triangle_area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tri[i], tri[j], area * g[i].dot(g[j]));
        mt.emplace_back(tri[i], tri[j], area * (i == j ? 2.0 : 1.0) / 12.0);
      }
  }
  stiffness_.resize(n, n);
  mass_.resize(n, n);
  stiffness_.setFromTriplets(kt.begin(), kt.end());
  mass_.setFromTriplets(mt.begin(), mt.end());
  lumped_ = mass_ * Eigen::VectorXd::Ones(n);
  for (int v = 0; v < n; ++v)
    if (!mesh_.on_boundary()[v]) interior_.push_back(v);
}

namespace {

SparseMatrix restrict(const SparseMatrix& a, const std::vector<int>& keep, int n) {
  std::vector<int> map(n, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) map[keep[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < a.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(a, c); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) trips.emplace_back(map[it.row()], map[it.col()], it.value());
  SparseMatrix out(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// M-orthonormal basis of span(Y), dropping numerically dependent directions.
Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& y, const SparseMatrix& m) {
  const Eigen::MatrixXd gram = y.transpose() * (m * y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-13 * top) keep.push_back(i);
  Eigen::MatrixXd q(y.rows(), static_cast<int>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    q.col(static_cast<int>(j)) = y * es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()[keep[j]]);
  return q;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-6 * big) {
      if (v[i] < 0) v = -v;
      return;
    }
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double tol = 1e-9 * std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  for (int i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return a[i] < b[i];
  return false;
}

// Deterministic basis of a numerically degenerate eigenspace: cardinal at pivot
// nodes, then M-orthonormalized in pivot order, signs fixed, sorted
// lexicographically. Clusters whose Ritz values are split beyond solver accuracy
// are resolved into their (sign-fixed) eigenvectors instead, so every returned
// vector stays an eigenvector. Eigenvalues are reset to Rayleigh quotients.
void canonicalize_cluster(std::vector<FemEigenpair>& pairs, std::size_t lo, std::size_t hi, const SparseMatrix& stiffness,
                          const SparseMatrix& mass) {
  const int d = static_cast<int>(hi - lo);
  const int n = static_cast<int>(pairs[lo].nodal.size());
  Eigen::MatrixXd v(n, d);
  for (int j = 0; j < d; ++j) v.col(j) = pairs[lo + j].nodal;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v.transpose());
  const auto& perm = qr.colsPermutation().indices();
  Eigen::MatrixXd piv(d, d);
  for (int i = 0; i < d; ++i) piv.row(i) = v.row(perm[i]);
  Eigen::MatrixXd basis = v * piv.inverse();
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd b = basis.col(j);
    for (int i = 0; i < j; ++i) b -= basis.col(i) * basis.col(i).dot(mass * b);
    b /= std::sqrt(b.dot(mass * b));
    fix_sign(b);
    basis.col(j) = b;
  }
  const Eigen::MatrixXd proj = basis.transpose() * (stiffness * basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (proj + proj.transpose()));
  const double spread = es.eigenvalues()(d - 1) - es.eigenvalues()(0);
  std::vector<Eigen::VectorXd> cols(d);
  if (spread > 1e-9 * std::max(1.0, std::abs(es.eigenvalues()(d - 1)))) {
    const Eigen::MatrixXd rotated = basis * es.eigenvectors();
    for (int j = 0; j < d; ++j) {
      cols[j] = rotated.col(j);
      fix_sign(cols[j]);
    }
  } else {
    for (int j = 0; j < d; ++j) cols[j] = basis.col(j);
    std::sort(cols.begin(), cols.end(), lex_less);
  }
  for (int j = 0; j < d; ++j) {
    pairs[lo + j].nodal = cols[j];
    pairs[lo + j].mu = cols[j].dot(stiffness * cols[j]);
  }
}

}  // namespace

std::vector<FemEigenpair> fem_eigs(const FemSpace& space, BoundaryCondition bc, double cutoff,
                                   const FemEigenOptions& opts) {
  if (!(cutoff > 0)) throw DomainError("fem_eigs: cutoff must be positive");
  const TriangleMesh& mesh = space.mesh();
  const int n_all = mesh.num_nodes();
  const bool dirichlet = bc == BoundaryCondition::dirichlet;

  std::vector<int> dofs;
  SparseMatrix k, m;
  if (dirichlet) {
    dofs = space.interior_nodes();
    k = restrict(space.stiffness(), dofs, n_all);
    m = restrict(space.mass(), dofs, n_all);
  } else {
    dofs.resize(n_all);
    std::iota(dofs.begin(), dofs.end(), 0);
    k = space.stiffness();
    m = space.mass();
  }
  const int n = static_cast<int>(dofs.size());

  std::vector<FemEigenpair> result;
  Eigen::VectorXd constant;
  if (!dirichlet) {
    constant = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(mesh.area()));
    result.push_back({0.0, constant});
  }
  const int avail = n - (dirichlet ? 0 : 1);
  if (avail <= 0) return result;

  constexpr double shift = -1.0;
  const SparseMatrix op = k - shift * m;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(op);
  if (ldlt.info() != Eigen::Success) throw SolverError("fem_eigs: factorization failed", static_cast<int>(result.size()));

  double perimeter = 0.0;
  for (const auto& e : mesh.boundary()) perimeter += e.length;
  const double weyl = mesh.area() * cutoff / (4.0 * kPi) + perimeter * std::sqrt(cutoff) / (4.0 * kPi);
  int p = std::min(avail, std::max(8, static_cast<int>(1.5 * weyl) + 8));

  std::mt19937 rng(20130415u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_block = [&](int rows, int cols) {
    Eigen::MatrixXd r(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) r(i, j) = unif(rng);
    return r;
  };
  auto deflate = [&](Eigen::MatrixXd& x) {
    if (!dirichlet) x -= constant * (constant.transpose() * (m * x));
  };

  Eigen::MatrixXd x = random_block(n, p);
  Eigen::VectorXd theta;
  int stalled = 0;
  int achieved = 0;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    deflate(x);
    Eigen::MatrixXd y = ldlt.solve(m * x);
    deflate(y);
    const Eigen::MatrixXd q = m_orthonormalize(y, m);
    const Eigen::MatrixXd proj = q.transpose() * (k * q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (proj + proj.transpose()));
    theta = es.eigenvalues();
    x = q * es.eigenvectors();
    const int cols = static_cast<int>(x.cols());

    const Eigen::MatrixXd kx = k * x;
    const Eigen::MatrixXd mx = m * x;
    int wanted = 0;
    while (wanted < cols && theta[wanted] <= cutoff * (1.0 + 1e-12)) ++wanted;
    bool ok = true;
    achieved = 0;
    for (int i = 0; i < std::min(wanted + 1, cols); ++i) {
      const double res = (kx.col(i) - theta[i] * mx.col(i)).norm() / (kx.col(i).norm() + std::abs(theta[i]) * mx.col(i).norm());
      const double tol = i < wanted ? opts.tolerance : std::max(opts.tolerance, 1e-6);
      if (res > tol) ok = false;
      else if (i < wanted && ok) ++achieved;
    }
    const bool full = cols >= avail;
    if (!full && wanted > cols - 3) {
      // Block too small to bracket the cutoff: enlarge and keep the current Ritz vectors.
      const int extra = std::min(avail, 2 * cols) - cols;
      Eigen::MatrixXd grown(n, cols + extra);
      grown << x, random_block(n, extra);
      x = std::move(grown);
      stalled = 0;
      continue;
    }
    // When the block spans the whole space Rayleigh-Ritz is exact.
    if (ok || full) {
      for (int i = 0; i < wanted; ++i) {
        FemEigenpair pr;
        pr.mu = theta[i];
        pr.nodal = x.col(i);
        result.push_back(std::move(pr));
      }
      break;
    }
    if (++stalled >= 200 && cols < avail) {
      const int extra = std::min(avail, cols + cols / 2) - cols;
      Eigen::MatrixXd grown(n, cols + extra);
      grown << x, random_block(n, extra);
      x = std::move(grown);
      stalled = 0;
    }
    if (iter + 1 == opts.max_iterations)
      throw SolverError("fem_eigs: no convergence for cutoff " + std::to_string(cutoff) + " (converged " +
                            std::to_string(achieved + static_cast<int>(result.size())) + " eigenpairs)",
                        achieved + static_cast<int>(result.size()));
  }

  // Expand to full nodal vectors.
  if (dirichlet) {
    for (auto& pr : result) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(n_all);
      for (int i = 0; i < n; ++i) full[dofs[i]] = pr.nodal[i];
      pr.nodal = std::move(full);
    }
  }
  const SparseMatrix& mass_full = space.mass();
  const std::size_t first = dirichlet ? 0 : 1;
  for (std::size_t i = first; i < result.size(); ++i) fix_sign(result[i].nodal);
  std::size_t lo = first;
  while (lo < result.size()) {
    std::size_t hi = lo + 1;
    while (hi < result.size() && result[hi].mu - result[hi - 1].mu <= 1e-6 * std::abs(result[hi].mu)) ++hi;
    if (hi - lo > 1) canonicalize_cluster(result, lo, hi, space.stiffness(), mass_full);
    lo = hi;
  }
  return result;
}

}  // namespace wg
