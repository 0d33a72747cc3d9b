#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "waveguide/fem.hpp"
#include "waveguide/mesh.hpp"
#include "waveguide/types.hpp"

namespace wg {

struct RectangleSpec {
  double a = 1.0;
  double b = 1.0;
};
struct DiscSpec {
  double radius = 1.0;
};
struct MeshSpec {
  std::shared_ptr<const TriangleMesh> mesh;
};

/// Input to make_cross_section. `backend` defaults to analytic for rectangle/disc
/// and fem for meshes; `mesh_size` is used when a rectangle or disc is meshed.
struct GeometryDescriptor {
  std::variant<RectangleSpec, DiscSpec, MeshSpec> shape;
  std::optional<Backend> backend;
  double mesh_size = 0.05;
};

enum class ShapeKind { rectangle, disc, mesh };

/// Quadrature points with weights (and outward normals for boundary rules).
struct QuadratureRule2D {
  std::vector<Point2> points;
  std::vector<double> weights;
  std::vector<Point2> normals;  // empty for volume rules
};

struct SpectrumCache;

/// Cross-section of a cylindrical end. Rectangles occupy [0,a]x[0,b]; discs are
/// centred at the origin. Immutable; cheap to copy.
class CrossSection {
 public:
  static CrossSection rectangle(double a, double b, std::optional<Backend> backend = {}, double mesh_size = 0.05);
  static CrossSection disc(double radius, std::optional<Backend> backend = {}, double mesh_size = 0.05);
  static CrossSection from_mesh(TriangleMesh mesh);

  ShapeKind kind() const { return kind_; }
  Backend backend() const { return backend_; }
  const RectangleSpec& rect() const { return rect_; }
  const DiscSpec& disc_spec() const { return disc_; }
  /// Non-null exactly for the fem backend.
  const std::shared_ptr<const FemSpace>& fem() const { return fem_; }

  double area() const;
  Point2 centroid() const;
  double perimeter() const;
  bool contains(const Point2& p, double tol = 1e-9) const;

  /// Interior rule; `order` is the Gauss order per direction (analytic) or the
  /// triangle-rule degree (fem).
  QuadratureRule2D volume_rule(int order = 24) const;
  /// Boundary rule with outward normals.
  QuadratureRule2D boundary_rule(int order = 24) const;
  /// `count` points spread evenly along the boundary (corners avoided), with normals.
  QuadratureRule2D boundary_samples(int count) const;

  std::string describe() const;
  SpectrumCache& cache() const { return *cache_; }

 private:
  friend CrossSection make_cross_section(const GeometryDescriptor& descriptor);
  CrossSection() = default;

  ShapeKind kind_ = ShapeKind::rectangle;
  Backend backend_ = Backend::analytic;
  RectangleSpec rect_;
  DiscSpec disc_;
  std::shared_ptr<const FemSpace> fem_;
  std::shared_ptr<SpectrumCache> cache_;
};

/// Validates a descriptor and builds the cross-section (meshing when fem is requested).
CrossSection make_cross_section(const GeometryDescriptor& descriptor);

/// Value, gradient and Hessian of a real scalar field at a point.
struct ScalarJet {
  double value = 0.0;
  Point2 grad = Point2::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

/// Solution (mu, u) of  Laplace u + mu u = 0  with dirichlet or neumann data,
/// normalized so that the L2 norm of u over the cross-section is 1.
class ScalarEigenpair {
 public:
  struct RectMode {
    int m = 0, n = 0;
    double a = 1.0, b = 1.0;
    double norm = 1.0;
  };
  struct DiscMode {
    int m = 0;
    double root = 0.0;  // zero of J_m (dirichlet) or J_m' (neumann); 0 for the constant mode
    double radius = 1.0;
    bool sine = false;
    double norm = 1.0;
  };
  struct FemMode {
    std::shared_ptr<const FemSpace> space;
    std::shared_ptr<const Eigen::VectorXd> nodal;
    int index = 0;
  };
  using Representation = std::variant<RectMode, DiscMode, FemMode>;

  ScalarEigenpair(BoundaryCondition bc, double mu, Representation rep);

  BoundaryCondition bc() const { return bc_; }
  double mu() const { return mu_; }
  const Representation& representation() const { return rep_; }
  bool is_fem() const { return std::holds_alternative<FemMode>(rep_); }
  /// Nodal coefficients for fem pairs, nullptr otherwise.
  const Eigen::VectorXd* nodal() const;
  bool is_constant() const;

  /// Evaluates without a containment check (fem points must lie on the mesh).
  ScalarJet jet(const Point2& p) const;
  std::string label() const;

 private:
  BoundaryCondition bc_;
  double mu_;
  Representation rep_;
};

/// All eigenpairs with mu <= cutoff, ascending and repeated by multiplicity.
/// For neumann the exact constant mode (mu = 0) comes first.
std::vector<ScalarEigenpair> helmholtz_eigs(const CrossSection& cs, BoundaryCondition bc, double cutoff);

/// The neumann mode u = 1/sqrt|Omega| (mu = 0).
ScalarEigenpair constant_mode(const CrossSection& cs);

struct FieldSample {
  double value = 0.0;
  Point2 gradient = Point2::Zero();
};

/// Values and gradients at points of the closed cross-section; throws DomainError outside.
std::vector<FieldSample> eval_field(const ScalarEigenpair& pair, const CrossSection& cs,
                                    const std::vector<Point2>& points);

}  // namespace wg
