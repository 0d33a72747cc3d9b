#include "waveguide/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "waveguide/bessel.hpp"
#include "waveguide/quadrature.hpp"

namespace wg {

const char* to_string(BoundaryCondition bc) { return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann"; }
const char* to_string(Backend backend) { return backend == Backend::analytic ? "analytic" : "fem"; }

// Memo of fem spectra keyed by boundary condition; holds the largest cutoff computed so far.
struct SpectrumCache {
  std::mutex mutex;
  std::map<BoundaryCondition, std::pair<double, std::vector<ScalarEigenpair>>> fem;
};

CrossSection CrossSection::rectangle(double a, double b, std::optional<Backend> backend, double mesh_size) {
  return make_cross_section({RectangleSpec{a, b}, backend, mesh_size});
}

CrossSection CrossSection::disc(double radius, std::optional<Backend> backend, double mesh_size) {
  return make_cross_section({DiscSpec{radius}, backend, mesh_size});
}

CrossSection CrossSection::from_mesh(TriangleMesh mesh) {
  return make_cross_section({MeshSpec{std::make_shared<const TriangleMesh>(std::move(mesh))}, Backend::fem, 0.0});
}

CrossSection make_cross_section(const GeometryDescriptor& d) {
  CrossSection cs;
  cs.cache_ = std::make_shared<SpectrumCache>();
  if (const auto* r = std::get_if<RectangleSpec>(&d.shape)) {
    if (!(r->a > 0) || !(r->b > 0)) throw GeometryError("rectangle: side lengths must be positive");
    cs.kind_ = ShapeKind::rectangle;
    cs.rect_ = *r;
    cs.backend_ = d.backend.value_or(Backend::analytic);
    if (cs.backend_ == Backend::fem) cs.fem_ = std::make_shared<const FemSpace>(rectangle_mesh(r->a, r->b, d.mesh_size));
  } else if (const auto* c = std::get_if<DiscSpec>(&d.shape)) {
    if (!(c->radius > 0)) throw GeometryError("disc: radius must be positive");
    cs.kind_ = ShapeKind::disc;
    cs.disc_ = *c;
    cs.backend_ = d.backend.value_or(Backend::analytic);
    if (cs.backend_ == Backend::fem) cs.fem_ = std::make_shared<const FemSpace>(disc_mesh(c->radius, d.mesh_size));
  } else {
    const auto& m = std::get<MeshSpec>(d.shape);
    if (!m.mesh) throw GeometryError("mesh descriptor without mesh");
    if (d.backend == Backend::analytic) throw GeometryError("analytic backend is available only for rectangle and disc");
    cs.kind_ = ShapeKind::mesh;
    cs.backend_ = Backend::fem;
    cs.fem_ = std::make_shared<const FemSpace>(*m.mesh);
  }
  return cs;
}

double CrossSection::area() const {
  if (fem_) return fem_->mesh().area();
  if (kind_ == ShapeKind::rectangle) return rect_.a * rect_.b;
  return kPi * disc_.radius * disc_.radius;
}

Point2 CrossSection::centroid() const {
  if (fem_) return fem_->mesh().centroid();
  if (kind_ == ShapeKind::rectangle) return {0.5 * rect_.a, 0.5 * rect_.b};
  return Point2::Zero();
}

double CrossSection::perimeter() const {
  if (fem_) {
    double p = 0.0;
    for (const auto& e : fem_->mesh().boundary()) p += e.length;
    return p;
  }
  if (kind_ == ShapeKind::rectangle) return 2.0 * (rect_.a + rect_.b);
  return 2.0 * kPi * disc_.radius;
}

bool CrossSection::contains(const Point2& p, double tol) const {
  if (fem_) return fem_->mesh().locate(p, tol).found();
  if (kind_ == ShapeKind::rectangle)
    return p.x() >= -tol && p.y() >= -tol && p.x() <= rect_.a + tol && p.y() <= rect_.b + tol;
  return p.norm() <= disc_.radius + tol;
}

QuadratureRule2D CrossSection::volume_rule(int order) const {
  QuadratureRule2D q;
  if (fem_) {
    const TriangleMesh& mesh = fem_->mesh();
    const TriangleRule& tr = triangle_rule(std::min(order, 5));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles()[t];
      for (std::size_t i = 0; i < tr.weights.size(); ++i) {
        const auto& b = tr.barycentric[i];
        q.points.push_back(b[0] * mesh.nodes()[tri[0]] + b[1] * mesh.nodes()[tri[1]] + b[2] * mesh.nodes()[tri[2]]);
        q.weights.push_back(tr.weights[i] * mesh.triangle_area(t));
      }
    }
    return q;
  }
  if (kind_ == ShapeKind::rectangle) {
    const Rule1D gx = gauss_legendre(order, 0.0, rect_.a);
    const Rule1D gy = gauss_legendre(order, 0.0, rect_.b);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        q.points.emplace_back(gx.nodes[i], gy.nodes[j]);
        q.weights.push_back(gx.weights[i] * gy.weights[j]);
      }
    return q;
  }
  const Rule1D gr = gauss_legendre(order, 0.0, disc_.radius);
  const int nth = 4 * order;
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < nth; ++j) {
      const double th = 2.0 * kPi * (j + 0.5) / nth;
      q.points.emplace_back(gr.nodes[i] * std::cos(th), gr.nodes[i] * std::sin(th));
      q.weights.push_back(gr.weights[i] * gr.nodes[i] * 2.0 * kPi / nth);
    }
  return q;
}

QuadratureRule2D CrossSection::boundary_rule(int order) const {
  QuadratureRule2D q;
  auto add_segment = [&](const Point2& a, const Point2& b, const Point2& normal, int n) {
    const Rule1D g = gauss_legendre(n, 0.0, 1.0);
    const double len = (b - a).norm();
    for (int i = 0; i < n; ++i) {
      q.points.push_back(a + g.nodes[i] * (b - a));
      q.weights.push_back(g.weights[i] * len);
      q.normals.push_back(normal);
    }
  };
  if (fem_) {
    const TriangleMesh& mesh = fem_->mesh();
    for (const auto& e : mesh.boundary())
      add_segment(mesh.nodes()[e.a], mesh.nodes()[e.b], e.normal, std::max(1, std::min(order, 4)));
    return q;
  }
  if (kind_ == ShapeKind::rectangle) {
    const double a = rect_.a, b = rect_.b;
    add_segment({0, 0}, {a, 0}, {0, -1}, order);
    add_segment({a, 0}, {a, b}, {1, 0}, order);
    add_segment({a, b}, {0, b}, {0, 1}, order);
    add_segment({0, b}, {0, 0}, {-1, 0}, order);
    return q;
  }
  const int n = 4 * order;
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * kPi * (j + 0.5) / n;
    const Point2 nu(std::cos(th), std::sin(th));
    q.points.push_back(disc_.radius * nu);
    q.weights.push_back(2.0 * kPi * disc_.radius / n);
    q.normals.push_back(nu);
  }
  return q;
}

QuadratureRule2D CrossSection::boundary_samples(int count) const {
  QuadratureRule2D q;
  const double total = perimeter();
  const double ds = total / count;
  if (kind_ == ShapeKind::disc && !fem_) {
    for (int j = 0; j < count; ++j) {
      const double th = 2.0 * kPi * (j + 0.5) / count;
      const Point2 nu(std::cos(th), std::sin(th));
      q.points.push_back(disc_.radius * nu);
      q.weights.push_back(ds);
      q.normals.push_back(nu);
    }
    return q;
  }
  // Walk the boundary polygon and drop samples at arclength (j + 1/2) ds.
  std::vector<std::tuple<Point2, Point2, Point2>> segs;  // start, end, normal
  if (fem_) {
    const TriangleMesh& mesh = fem_->mesh();
    for (const auto& e : mesh.boundary()) segs.emplace_back(mesh.nodes()[e.a], mesh.nodes()[e.b], e.normal);
  } else {
    const double a = rect_.a, b = rect_.b;
    segs = {{{0, 0}, {a, 0}, {0, -1}}, {{a, 0}, {a, b}, {1, 0}}, {{a, b}, {0, b}, {0, 1}}, {{0, b}, {0, 0}, {-1, 0}}};
  }
  double walked = 0.0;
  int j = 0;
  for (const auto& [p0, p1, nu] : segs) {
    const double len = (p1 - p0).norm();
    while (j < count && (j + 0.5) * ds <= walked + len) {
      const double s = ((j + 0.5) * ds - walked) / len;
      q.points.push_back(p0 + s * (p1 - p0));
      q.weights.push_back(ds);
      q.normals.push_back(nu);
      ++j;
    }
    walked += len;
  }
  return q;
}

std::string CrossSection::describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  switch (kind_) {
    case ShapeKind::rectangle: os << "rectangle(" << rect_.a << ", " << rect_.b << ")"; break;
    case ShapeKind::disc: os << "disc(" << disc_.radius << ")"; break;
    case ShapeKind::mesh: os << "mesh(" << fem_->mesh().num_nodes() << " nodes)"; break;
  }
  os << "[" << to_string(backend_) << "]";
  return os.str();
}

ScalarEigenpair::ScalarEigenpair(BoundaryCondition bc, double mu, Representation rep)
    : bc_(bc), mu_(mu), rep_(std::move(rep)) {
  if (mu < 0 || (bc == BoundaryCondition::dirichlet && mu <= 0))
    throw DomainError("ScalarEigenpair: eigenvalue must be non-negative (positive for dirichlet)");
}

const Eigen::VectorXd* ScalarEigenpair::nodal() const {
  if (const auto* f = std::get_if<FemMode>(&rep_)) return f->nodal.get();
  return nullptr;
}

bool ScalarEigenpair::is_constant() const { return bc_ == BoundaryCondition::neumann && mu_ == 0.0; }

namespace {

ScalarJet rect_jet(const ScalarEigenpair::RectMode& r, bool dirichlet, const Point2& p) {
  const double kx = r.m * kPi / r.a, ky = r.n * kPi / r.b;
  const double cx = std::cos(kx * p.x()), sx = std::sin(kx * p.x());
  const double cy = std::cos(ky * p.y()), sy = std::sin(ky * p.y());
  // f = trig factor, d = derivative, dd = second derivative
  double fx, dx, ddx, fy, dy, ddy;
  if (dirichlet) {
    fx = sx, dx = kx * cx, ddx = -kx * kx * sx;
    fy = sy, dy = ky * cy, ddy = -ky * ky * sy;
  } else {
    fx = cx, dx = -kx * sx, ddx = -kx * kx * cx;
    fy = cy, dy = -ky * sy, ddy = -ky * ky * cy;
  }
  ScalarJet j;
  j.value = r.norm * fx * fy;
  j.grad = r.norm * Point2(dx * fy, fx * dy);
  j.hess << ddx * fy, dx * dy, dx * dy, fx * ddy;
  j.hess *= r.norm;
  return j;
}

ScalarJet disc_jet(const ScalarEigenpair::DiscMode& d, Point2 p) {
  ScalarJet j;
  if (d.root == 0.0) {
    j.value = d.norm;
    return j;
  }
  // The polar formulas are singular at the centre; evaluate at a nearby point instead.
  if (p.norm() < 1e-8 * d.radius) p = Point2(1e-8 * d.radius, 0.0);
  const double r = p.norm();
  const double th = std::atan2(p.y(), p.x());
  const double kappa = d.root / d.radius;
  const double x = kappa * r;
  const double jv = bessel::j(d.m, x), jd = bessel::jp(d.m, x), jdd = bessel::jpp(d.m, x);
  const double m = d.m;
  const double t = d.sine ? std::sin(m * th) : std::cos(m * th);
  const double td = d.sine ? m * std::cos(m * th) : -m * std::sin(m * th);
  const double tdd = -m * m * t;
  const double n = d.norm;
  const double u_r = n * kappa * jd * t, u_t = n * jv * td;
  const double u_rr = n * kappa * kappa * jdd * t, u_rt = n * kappa * jd * td, u_tt = n * jv * tdd;
  const double c = std::cos(th), s = std::sin(th);
  j.value = n * jv * t;
  j.grad = Point2(c * u_r - s / r * u_t, s * u_r + c / r * u_t);
  const double xx = c * c * u_rr - 2 * c * s / r * u_rt + s * s / r * u_r + 2 * c * s / (r * r) * u_t + s * s / (r * r) * u_tt;
  const double yy = s * s * u_rr + 2 * c * s / r * u_rt + c * c / r * u_r - 2 * c * s / (r * r) * u_t + c * c / (r * r) * u_tt;
  const double xy = c * s * u_rr + (c * c - s * s) / r * u_rt - c * s / r * u_r - (c * c - s * s) / (r * r) * u_t -
                    c * s / (r * r) * u_tt;
  j.hess << xx, xy, xy, yy;
  return j;
}

ScalarJet fem_jet(const ScalarEigenpair::FemMode& f, const Point2& p) {
  const TriangleMesh& mesh = f.space->mesh();
  const MeshLocation loc = mesh.locate(p, 1e-8);
  if (!loc.found()) throw DomainError("fem field evaluated outside the mesh");
  const auto& tri = mesh.triangles()[loc.triangle];
  const auto& g = mesh.hat_gradients(loc.triangle);
  ScalarJet j;
  for (int i = 0; i < 3; ++i) {
    const double c = (*f.nodal)[tri[i]];
    j.value += loc.barycentric[i] * c;
    j.grad += c * g[i];
  }
  return j;
}

}  // namespace

ScalarJet ScalarEigenpair::jet(const Point2& p) const {
  const bool dirichlet = bc_ == BoundaryCondition::dirichlet;
  return std::visit(
      [&](const auto& r) -> ScalarJet {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RectMode>) return rect_jet(r, dirichlet, p);
        else if constexpr (std::is_same_v<T, DiscMode>) return disc_jet(r, p);
        else return fem_jet(r, p);
      },
      rep_);
}

std::string ScalarEigenpair::label() const {
  std::ostringstream os;
  os << (bc_ == BoundaryCondition::dirichlet ? "D" : "N");
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RectMode>) os << "(" << r.m << "," << r.n << ")";
        else if constexpr (std::is_same_v<T, DiscMode>) os << "(m=" << r.m << (r.sine ? ",sin" : ",cos") << ",x=" << r.root << ")";
        else os << "#" << r.index;
      },
      rep_);
  return os.str();
}

namespace {

std::vector<ScalarEigenpair> rect_eigs(const RectangleSpec& r, BoundaryCondition bc, double cutoff) {
  const bool dir = bc == BoundaryCondition::dirichlet;
  const int first = dir ? 1 : 0;
  std::vector<std::tuple<double, int, int>> modes;
  for (int m = first;; ++m) {
    const double mx = m * kPi / r.a;
    if (mx * mx > cutoff && m > first) break;
    for (int n = first;; ++n) {
      const double ny = n * kPi / r.b;
      const double mu = mx * mx + ny * ny;
      if (mu > cutoff) break;
      modes.emplace_back(mu, m, n);
    }
  }
  std::sort(modes.begin(), modes.end());
  std::vector<ScalarEigenpair> out;
  for (const auto& [mu, m, n] : modes) {
    const double nx = m == 0 ? std::sqrt(1.0 / r.a) : std::sqrt(2.0 / r.a);
    const double ny = n == 0 ? std::sqrt(1.0 / r.b) : std::sqrt(2.0 / r.b);
    out.emplace_back(bc, mu, ScalarEigenpair::RectMode{m, n, r.a, r.b, nx * ny});
  }
  return out;
}

std::vector<ScalarEigenpair> disc_eigs(const DiscSpec& d, BoundaryCondition bc, double cutoff) {
  const bool dir = bc == BoundaryCondition::dirichlet;
  const double R = d.radius;
  const double x_max = std::sqrt(cutoff) * R;
  std::vector<std::tuple<double, int, int, double>> modes;  // mu, m, sine, root
  if (!dir) modes.emplace_back(0.0, 0, 0, 0.0);
  for (int m = 0; m <= x_max + 1; ++m) {
    const auto roots = dir ? bessel::zeros(m, x_max) : bessel::derivative_zeros(m, x_max);
    for (double x : roots) {
      const double mu = (x / R) * (x / R);
      if (mu > cutoff) continue;
      modes.emplace_back(mu, m, 0, x);
      if (m > 0) modes.emplace_back(mu, m, 1, x);
    }
  }
  std::sort(modes.begin(), modes.end());
  std::vector<ScalarEigenpair> out;
  for (const auto& [mu, m, sine, x] : modes) {
    ScalarEigenpair::DiscMode dm{m, x, R, sine != 0, 1.0};
    if (x == 0.0) {
      dm.norm = 1.0 / std::sqrt(kPi * R * R);
    } else {
      const double angular = m == 0 ? 2.0 * kPi : kPi;
      const double radial = dir ? 0.5 * R * R * std::pow(bessel::j(m + 1, x), 2)
                                : 0.5 * R * R * (1.0 - double(m * m) / (x * x)) * std::pow(bessel::j(m, x), 2);
      dm.norm = 1.0 / std::sqrt(angular * radial);
    }
    out.emplace_back(bc, mu, dm);
  }
  return out;
}

}  // namespace

std::vector<ScalarEigenpair> helmholtz_eigs(const CrossSection& cs, BoundaryCondition bc, double cutoff) {
  if (!(cutoff > 0)) throw DomainError("helmholtz_eigs: cutoff must be positive");
  if (cs.backend() == Backend::analytic) {
    if (cs.kind() == ShapeKind::rectangle) return rect_eigs(cs.rect(), bc, cutoff);
    return disc_eigs(cs.disc_spec(), bc, cutoff);
  }
  SpectrumCache& cache = cs.cache();
  std::lock_guard<std::mutex> lock(cache.mutex);
  auto it = cache.fem.find(bc);
  if (it == cache.fem.end() || it->second.first < cutoff) {
    const auto pairs = fem_eigs(*cs.fem(), bc, cutoff);
    std::vector<ScalarEigenpair> list;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double mu = pairs[i].mu;
      list.emplace_back(bc, (bc == BoundaryCondition::neumann && i == 0) ? 0.0 : mu,
                        ScalarEigenpair::FemMode{cs.fem(), std::make_shared<const Eigen::VectorXd>(pairs[i].nodal),
                                                 static_cast<int>(i)});
    }
    it = cache.fem.insert_or_assign(bc, std::make_pair(cutoff, std::move(list))).first;
  }
  std::vector<ScalarEigenpair> out;
  for (const auto& p : it->second.second)
    if (p.mu() <= cutoff) out.push_back(p);
  return out;
}

ScalarEigenpair constant_mode(const CrossSection& cs) {
  if (cs.backend() == Backend::fem) {
    const int n = cs.fem()->mesh().num_nodes();
    auto nodal = std::make_shared<const Eigen::VectorXd>(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(cs.area())));
    return ScalarEigenpair(BoundaryCondition::neumann, 0.0, ScalarEigenpair::FemMode{cs.fem(), nodal, 0});
  }
  if (cs.kind() == ShapeKind::rectangle) {
    const auto& r = cs.rect();
    return ScalarEigenpair(BoundaryCondition::neumann, 0.0, ScalarEigenpair::RectMode{0, 0, r.a, r.b, 1.0 / std::sqrt(r.a * r.b)});
  }
  const double R = cs.disc_spec().radius;
  return ScalarEigenpair(BoundaryCondition::neumann, 0.0, ScalarEigenpair::DiscMode{0, 0.0, R, false, 1.0 / std::sqrt(kPi * R * R)});
}

std::vector<FieldSample> eval_field(const ScalarEigenpair& pair, const CrossSection& cs,
                                    const std::vector<Point2>& points) {
  std::vector<FieldSample> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (!cs.contains(p)) throw DomainError("eval_field: point outside the cross-section");
    const ScalarJet j = pair.jet(p);
    out.push_back({j.value, j.grad});
  }
  return out;
}

}  // namespace wg
