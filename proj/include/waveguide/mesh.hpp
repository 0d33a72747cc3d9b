#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "waveguide/types.hpp"

namespace wg {

/// Boundary edge oriented with the domain on its left; `normal` is the outward unit normal.
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int triangle = 0;
  Point2 normal = Point2::Zero();
  double length = 0.0;
};

/// Result of locating a point: owning triangle and barycentric coordinates.
struct MeshLocation {
  int triangle = -1;
  Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
  bool found() const { return triangle >= 0; }
};

/// Validated, immutable triangulation of a simply connected planar domain.
///
/// Construction checks positive orientation of every triangle, that the listed
/// boundary edges form exactly one closed, non-self-intersecting loop, and that
/// this loop coincides with the topological boundary of the triangulation.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Point2> nodes, std::vector<std::array<int, 3>> triangles,
               std::vector<std::array<int, 2>> boundary_edges);

  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary() const { return boundary_; }
  const std::vector<bool>& on_boundary() const { return on_boundary_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  double triangle_area(int t) const { return areas_[t]; }
  double area() const { return total_area_; }
  Point2 centroid() const { return centroid_; }
  /// Longest edge over all triangles.
  double max_edge() const { return max_edge_; }

  /// Gradients of the three barycentric (hat) functions on triangle t.
  const std::array<Point2, 3>& hat_gradients(int t) const { return hat_grads_[t]; }

  MeshLocation locate(const Point2& p, double tol = 1e-10) const;

 private:
  void validate_and_index(const std::vector<std::array<int, 2>>& bedges);
  void build_buckets();

  std::vector<Point2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<bool> on_boundary_;
  std::vector<double> areas_;
  std::vector<std::array<Point2, 3>> hat_grads_;
  double total_area_ = 0.0;
  double max_edge_ = 0.0;
  Point2 centroid_ = Point2::Zero();

  Point2 bbox_lo_ = Point2::Zero();
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Structured mesh of [0,a] x [0,b] with spacing at most h (each cell split along one diagonal).
TriangleMesh rectangle_mesh(double a, double b, double h);

/// Ring mesh of the disc of radius R centred at the origin; boundary is an inscribed polygon.
TriangleMesh disc_mesh(double radius, double h);

/// Plain-text mesh format: `nodes N`, N lines `x y`, `tris M`, M index triples,
/// `bedges K`, K index pairs; '#' starts a comment.
TriangleMesh read_mesh(std::istream& in);
TriangleMesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const TriangleMesh& mesh);

}  // namespace wg
