#include "waveguide/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace wg {

namespace {

double cross2(const Point2& u, const Point2& v) { return u.x() * v.y() - u.y() * v.x(); }

std::array<int, 2> edge_key(int a, int b) { return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a}; }

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const double d1 = cross2(p2 - p1, q1 - p1);
  const double d2 = cross2(p2 - p1, q2 - p1);
  const double d3 = cross2(q2 - q1, p1 - q1);
  const double d4 = cross2(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on_segment = [](const Point2& a, const Point2& b, const Point2& c, double d) {
    return d == 0.0 && std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  return on_segment(p1, p2, q1, d1) || on_segment(p1, p2, q2, d2) || on_segment(q1, q2, p1, d3) ||
         on_segment(q1, q2, p2, d4);
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Point2> nodes, std::vector<std::array<int, 3>> triangles,
                           std::vector<std::array<int, 2>> boundary_edges)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  validate_and_index(boundary_edges);
  build_buckets();
}

void TriangleMesh::validate_and_index(const std::vector<std::array<int, 2>>& bedges) {
  const int n = num_nodes();
  if (n < 3 || triangles_.empty()) throw GeometryError("mesh: need at least 3 nodes and 1 triangle");
  if (bedges.size() < 3) throw GeometryError("mesh: boundary must contain at least 3 edges");

  Point2 lo = nodes_[0], hi = nodes_[0];
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).squaredNorm();

  areas_.resize(triangles_.size());
  hat_grads_.resize(triangles_.size());
  centroid_.setZero();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= n) throw GeometryError("mesh: triangle " + std::to_string(t) + " has an out-of-range node index");
    const Point2& p0 = nodes_[tri[0]];
    const Point2& p1 = nodes_[tri[1]];
    const Point2& p2 = nodes_[tri[2]];
    const double area = 0.5 * cross2(p1 - p0, p2 - p0);
    if (!(area > 1e-14 * scale))
      throw GeometryError("mesh: triangle " + std::to_string(t) + " has non-positive signed area");
    areas_[t] = area;
    total_area_ += area;
    centroid_ += area * (p0 + p1 + p2) / 3.0;
    const std::array<Point2, 3> pts{p0, p1, p2};
    for (int i = 0; i < 3; ++i) {
      const Point2& a = pts[(i + 1) % 3];
      const Point2& b = pts[(i + 2) % 3];
      // grad of hat i is perpendicular to the opposite edge, pointing toward vertex i
      hat_grads_[t][i] = Point2(a.y() - b.y(), b.x() - a.x()) / (2.0 * area);
      max_edge_ = std::max(max_edge_, (a - b).norm());
    }
  }
  centroid_ /= total_area_;

  // Loops formed by the listed boundary edges.
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : bedges) {
    if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n || e[0] == e[1])
      throw GeometryError("mesh: invalid boundary edge index");
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  for (int v = 0; v < n; ++v)
    if (!adj[v].empty() && adj[v].size() != 2)
      throw GeometryError("mesh: open or self-intersecting boundary loop at node " + std::to_string(v));
  std::vector<bool> seen(n, false);
  int loops = 0;
  for (int v = 0; v < n; ++v) {
    if (adj[v].empty() || seen[v]) continue;
    ++loops;
    int prev = -1, cur = v;
    while (!seen[cur]) {
      seen[cur] = true;
      const int next = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
      prev = cur;
      cur = next;
    }
  }
  if (loops != 1)
    throw GeometryError("mesh: boundary has " + std::to_string(loops) +
                        " loops; multiply-connected cross-sections are not supported");

  for (std::size_t i = 0; i < bedges.size(); ++i)
    for (std::size_t j = i + 1; j < bedges.size(); ++j) {
      const auto& e = bedges[i];
      const auto& f = bedges[j];
      if (e[0] == f[0] || e[0] == f[1] || e[1] == f[0] || e[1] == f[1]) continue;
      if (segments_intersect(nodes_[e[0]], nodes_[e[1]], nodes_[f[0]], nodes_[f[1]]))
        throw GeometryError("mesh: open or self-intersecting boundary loop");
    }

  // Topological boundary: edges owned by exactly one triangle.
  std::map<std::array<int, 2>, std::vector<std::pair<int, int>>> owners;  // key -> (triangle, local edge)
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    for (int i = 0; i < 3; ++i)
      owners[edge_key(triangles_[t][i], triangles_[t][(i + 1) % 3])].push_back({static_cast<int>(t), i});
  std::map<std::array<int, 2>, std::pair<int, int>> topo;
  for (const auto& [key, list] : owners) {
    if (list.size() > 2) throw GeometryError("mesh: edge shared by more than two triangles");
    if (list.size() == 1) topo[key] = list[0];
  }
  if (topo.size() != bedges.size()) throw GeometryError("mesh: boundary edges do not match the triangulation boundary");

  on_boundary_.assign(n, false);
  for (const auto& e : bedges) {
    auto it = topo.find(edge_key(e[0], e[1]));
    if (it == topo.end()) throw GeometryError("mesh: boundary edges do not match the triangulation boundary");
    const auto [t, i] = it->second;
    BoundaryEdge be;
    be.a = triangles_[t][i];
    be.b = triangles_[t][(i + 1) % 3];
    be.triangle = t;
    const Point2 d = nodes_[be.b] - nodes_[be.a];
    be.length = d.norm();
    be.normal = Point2(d.y(), -d.x()) / be.length;  // CCW triangle: interior on the left
    boundary_.push_back(be);
    on_boundary_[be.a] = on_boundary_[be.b] = true;
  }

  // Connectivity across interior edges.
  std::vector<std::vector<int>> tadj(triangles_.size());
  for (const auto& [key, list] : owners)
    if (list.size() == 2) {
      tadj[list[0].first].push_back(list[1].first);
      tadj[list[1].first].push_back(list[0].first);
    }
  std::vector<bool> reached(triangles_.size(), false);
  std::vector<int> stack{0};
  reached[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int s : tadj[t])
      if (!reached[s]) {
        reached[s] = true;
        ++count;
        stack.push_back(s);
      }
  }
  if (count != triangles_.size()) throw GeometryError("mesh: triangulation is not connected");
}

void TriangleMesh::build_buckets() {
  Point2 lo = nodes_[0], hi = nodes_[0];
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bbox_lo_ = lo;
  const Point2 ext = hi - lo;
  const double target = std::sqrt(std::max(total_area_, 1e-300) / num_triangles()) * 2.0;
  cell_ = std::max(target, 1e-12);
  nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  auto clampi = [](int v, int hi_) { return std::clamp(v, 0, hi_ - 1); };
  for (int t = 0; t < num_triangles(); ++t) {
    Point2 tlo = nodes_[triangles_[t][0]], thi = tlo;
    for (int v : triangles_[t]) {
      tlo = tlo.cwiseMin(nodes_[v]);
      thi = thi.cwiseMax(nodes_[v]);
    }
    const int i0 = clampi(static_cast<int>(std::floor((tlo.x() - lo.x()) / cell_)), nx_);
    const int i1 = clampi(static_cast<int>(std::floor((thi.x() - lo.x()) / cell_)), nx_);
    const int j0 = clampi(static_cast<int>(std::floor((tlo.y() - lo.y()) / cell_)), ny_);
    const int j1 = clampi(static_cast<int>(std::floor((thi.y() - lo.y()) / cell_)), ny_);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

MeshLocation TriangleMesh::locate(const Point2& p, double tol) const {
  const int i = static_cast<int>(std::floor((p.x() - bbox_lo_.x()) / cell_));
  const int j = static_cast<int>(std::floor((p.y() - bbox_lo_.y()) / cell_));
  MeshLocation best;
  double best_min = -1e300;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      const int ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= nx_ || jj >= ny_) continue;
      for (int t : buckets_[static_cast<std::size_t>(jj) * nx_ + ii]) {
        const auto& tri = triangles_[t];
        Eigen::Vector3d bc;
        for (int k = 0; k < 3; ++k) bc[k] = 1.0 / 3.0 + hat_grads_[t][k].dot(p - (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0);
        const double m = bc.minCoeff();
        if (m > best_min) {
          best_min = m;
          best.triangle = t;
          best.barycentric = bc;
        }
      }
    }
  if (best.triangle < 0 || best_min < -tol) return {};
  return best;
}

TriangleMesh rectangle_mesh(double a, double b, double h) {
  if (!(a > 0) || !(b > 0) || !(h > 0)) throw GeometryError("rectangle_mesh: dimensions and h must be positive");
  const int nx = std::max(1, static_cast<int>(std::ceil(a / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(b / h - 1e-9)));
  std::vector<Point2> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) nodes.emplace_back(a * i / nx, b * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  std::vector<std::array<int, 2>> bedges;
  for (int i = 0; i < nx; ++i) {
    bedges.push_back({id(i, 0), id(i + 1, 0)});
    bedges.push_back({id(i + 1, ny), id(i, ny)});
  }
  for (int j = 0; j < ny; ++j) {
    bedges.push_back({id(nx, j), id(nx, j + 1)});
    bedges.push_back({id(0, j + 1), id(0, j)});
  }
  return TriangleMesh(std::move(nodes), std::move(tris), std::move(bedges));
}

TriangleMesh disc_mesh(double radius, double h) {
  if (!(radius > 0) || !(h > 0)) throw GeometryError("disc_mesh: radius and h must be positive");
  const int rings = std::max(2, static_cast<int>(std::ceil(radius / h)));
  std::vector<Point2> nodes{Point2::Zero()};
  std::vector<int> start{0};
  for (int r = 1; r <= rings; ++r) {
    start.push_back(static_cast<int>(nodes.size()));
    const int count = 6 * r;
    const double rr = radius * r / rings;
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * kPi * i / count;
      nodes.emplace_back(rr * std::cos(th), rr * std::sin(th));
    }
  }
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < 6; ++i) tris.push_back({0, start[1] + i, start[1] + (i + 1) % 6});
  for (int r = 1; r < rings; ++r) {
    // Merge the two rings by advancing along whichever has the smaller next angle.
    const int n_in = 6 * r, n_out = 6 * (r + 1);
    int i = 0, o = 0;
    while (i < n_in || o < n_out) {
      const double a_in = (i + 1) / static_cast<double>(n_in);
      const double a_out = (o + 1) / static_cast<double>(n_out);
      const int vi = start[r] + i % n_in, vo = start[r + 1] + o % n_out;
      if (o < n_out && (i >= n_in || a_out <= a_in)) {
        tris.push_back({vi, vo, start[r + 1] + (o + 1) % n_out});
        ++o;
      } else {
        tris.push_back({vi, vo, start[r] + (i + 1) % n_in});
        ++i;
      }
    }
  }
  std::vector<std::array<int, 2>> bedges;
  const int n_out = 6 * rings;
  for (int i = 0; i < n_out; ++i) bedges.push_back({start[rings] + i, start[rings] + (i + 1) % n_out});
  return TriangleMesh(std::move(nodes), std::move(tris), std::move(bedges));
}

namespace {

// Tokenizer that strips '#' comments and tracks line numbers for diagnostics.
class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) toks_.push_back({tok, lineno});
    }
  }
  std::string word() {
    if (pos_ >= toks_.size()) throw GeometryError("mesh file: unexpected end of input");
    return toks_[pos_++].first;
  }
  double number() {
    const int line = pos_ < toks_.size() ? toks_[pos_].second : -1;
    const std::string w = word();
    std::istringstream is(w);
    is.imbue(std::locale::classic());
    double v;
    if (!(is >> v) || !is.eof()) throw GeometryError("mesh file line " + std::to_string(line) + ": bad number '" + w + "'");
    return v;
  }
  int index() {
    const double v = number();
    if (v != std::floor(v) || v < 0) throw GeometryError("mesh file: index must be a non-negative integer");
    return static_cast<int>(v);
  }
  void expect(const std::string& kw) {
    const int line = pos_ < toks_.size() ? toks_[pos_].second : -1;
    const std::string w = word();
    if (w != kw) throw GeometryError("mesh file line " + std::to_string(line) + ": expected '" + kw + "', got '" + w + "'");
  }

 private:
  std::vector<std::pair<std::string, int>> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

TriangleMesh read_mesh(std::istream& in) {
  Tokens tk(in);
  tk.expect("nodes");
  const int n = tk.index();
  std::vector<Point2> nodes(n);
  for (auto& p : nodes) {
    p.x() = tk.number();
    p.y() = tk.number();
  }
  tk.expect("tris");
  const int m = tk.index();
  std::vector<std::array<int, 3>> tris(m);
  for (auto& t : tris)
    for (int& v : t) v = tk.index();
  tk.expect("bedges");
  const int k = tk.index();
  std::vector<std::array<int, 2>> bedges(k);
  for (auto& e : bedges)
    for (int& v : e) v = tk.index();
  return TriangleMesh(std::move(nodes), std::move(tris), std::move(bedges));
}

TriangleMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
  out.imbue(std::locale::classic());
  out.precision(17);
  out << "nodes " << mesh.num_nodes() << "\n";
  for (const auto& p : mesh.nodes()) out << p.x() << " " << p.y() << "\n";
  out << "tris " << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "bedges " << mesh.boundary().size() << "\n";
  for (const auto& e : mesh.boundary()) out << e.a << " " << e.b << "\n";
}

}  // namespace wg
