#include "waveguide/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "waveguide/quadrature.hpp"

namespace wg {

const char* to_string(Family f) {
  switch (f) {
    case Family::te: return "TE";
    case Family::tm: return "TM";
    case Family::alpha_scalar: return "alpha_scalar";
    case Family::beta_scalar: return "beta_scalar";
    case Family::constant_special: return "constant_special";
    case Family::general: return "general";
  }
  return "?";
}

PencilPoint::PencilPoint(double k, Complex lambda, std::shared_ptr<const ScalarEigenpair> potential)
    : k_(k), lambda_(lambda), potential_(std::move(potential)) {
  if (!potential_) throw DomainError("PencilPoint: missing potential");
  const double mu = potential_->mu();
  const Complex defect = k * k - lambda * lambda - mu;
  if (std::abs(defect) > 1e-12 * std::max({1.0, k * k, mu}))
    throw DomainError("PencilPoint: mu != k^2 - lambda^2");
  if (mu <= k * k ? lambda.imag() != 0.0 : lambda.real() != 0.0)
    throw DomainError("PencilPoint: lambda must be real iff mu <= k^2");
}

PencilPoint PencilPoint::propagating(double k, std::shared_ptr<const ScalarEigenpair> potential, int sign) {
  const double mu = potential->mu();
  if (mu > k * k) throw DomainError("PencilPoint::propagating: mu > k^2");
  return PencilPoint(k, (sign < 0 ? -1.0 : 1.0) * std::sqrt(k * k - mu), std::move(potential));
}

PencilPoint PencilPoint::evanescent(double k, std::shared_ptr<const ScalarEigenpair> potential) {
  const double mu = potential->mu();
  if (mu <= k * k) throw DomainError("PencilPoint::evanescent: mu <= k^2");
  return PencilPoint(k, Complex(0.0, std::sqrt(mu - k * k)), std::move(potential));
}

SectionJet potential_section_jet(const Eigen::Vector4cd& c, Complex lambda, double k, const ScalarJet& uj) {
  const Complex a = c[0], b = c[1], al = c[2], be = c[3];
  SectionJet s;
  const Complex g[2] = {uj.grad.x(), uj.grad.y()};
  auto put_scalars = [&](Vector8c& v, Complex w) {
    v[2] = a * w;
    v[3] = al * w;
    v[6] = b * w;
    v[7] = be * w;
  };
  put_scalars(s.value, uj.value);
  put_scalars(s.d1, g[0]);
  put_scalars(s.d2, g[1]);

  const Complex mu = k * k - lambda * lambda;
  if (std::abs(mu) == 0.0) return s;
  Eigen::Matrix<Complex, 4, 2> t;
  t << lambda * a + k * be, k * b - lambda * al,
       -k * b + lambda * al, lambda * a + k * be,
       lambda * b - k * al, -k * a - lambda * be,
       k * a + lambda * be, lambda * b - k * al;
  t *= kI / mu;
  const Eigen::Matrix<Complex, 4, 1> v0 = t * Eigen::Vector2cd(g[0], g[1]);
  const Eigen::Matrix<Complex, 4, 1> v1 = t * uj.hess.col(0).cast<Complex>();
  const Eigen::Matrix<Complex, 4, 1> v2 = t * uj.hess.col(1).cast<Complex>();
  const int slot[4] = {0, 1, 4, 5};
  for (int i = 0; i < 4; ++i) {
    s.value[slot[i]] = v0[i];
    s.d1[slot[i]] = v1[i];
    s.d2[slot[i]] = v2[i];
  }
  return s;
}

Vector8c pencil_residual(const SectionJet& s, Complex lambda, double k) {
  const Vector8c& v = s.value;
  const Vector8c& d1 = s.d1;
  const Vector8c& d2 = s.d2;
  const Complex il = kI * lambda;
  // rot(l) w = (d2 w3 - il w2, il w1 - d1 w3, d1 w2 - d2 w1) for w at offset o
  auto rot = [&](int o) {
    return Vector3c(d2[o + 2] - il * v[o + 1], il * v[o] - d1[o + 2], d1[o + 1] - d2[o]);
  };
  auto grad = [&](int o) { return Vector3c(d1[o], d2[o], il * v[o]); };
  auto div = [&](int o) { return d1[o] + d2[o + 1] + il * v[o + 2]; };
  Vector8c r;
  r.segment<3>(0) = kI * rot(comp::psi) + kI * grad(comp::beta) - k * v.segment<3>(comp::phi);
  r[3] = -kI * div(comp::psi) - k * v[comp::alpha];
  r.segment<3>(4) = -kI * rot(comp::phi) - kI * grad(comp::alpha) - k * v.segment<3>(comp::psi);
  r[7] = kI * div(comp::phi) - k * v[comp::beta];
  return r;
}

VectorModeSection VectorModeSection::from_potential(CrossSection domain, std::shared_ptr<const ScalarEigenpair> u,
                                                    const Eigen::Vector4cd& coefficients, Complex lambda, double k,
                                                    Family family) {
  VectorModeSection s(std::move(domain));
  s.potential_ = std::move(u);
  s.coeffs_ = coefficients;
  s.lambda_ = lambda;
  s.k_ = k;
  s.family_ = family;
  return s;
}

VectorModeSection VectorModeSection::from_function(CrossSection domain, JetFn fn, Family family) {
  VectorModeSection s(std::move(domain));
  s.fn_ = std::move(fn);
  s.family_ = family;
  return s;
}

VectorModeSection VectorModeSection::zero(CrossSection domain) {
  return from_function(std::move(domain), [](const Point2&) { return SectionJet{}; });
}

SectionJet VectorModeSection::jet(const Point2& p) const {
  SectionJet s = potential_ ? potential_section_jet(coeffs_, lambda_, k_, potential_->jet(p)) : fn_(p);
  if (scale_ != 1.0) {
    s.value *= scale_;
    s.d1 *= scale_;
    s.d2 *= scale_;
  }
  return s;
}

VectorModeSection VectorModeSection::scaled(Complex c) const {
  VectorModeSection s = *this;
  s.scale_ *= c;
  return s;
}

bool VectorModeSection::in_maxwell_domain() const {
  if (potential_) return coeffs_[2] == 0.0 && coeffs_[3] == 0.0;
  return family_ == Family::te || family_ == Family::tm;
}

namespace {

PencilResidual apply_pencil_fem(const VectorModeSection& section, Complex lambda, double k) {
  const auto& fm = std::get<ScalarEigenpair::FemMode>(section.potential().representation());
  const FemSpace& space = *fm.space;
  const TriangleMesh& mesh = space.mesh();
  const Eigen::VectorXd& u = *fm.nodal;
  const Eigen::VectorXd ku = space.stiffness() * u;
  const Eigen::VectorXd mu = space.mass() * u;
  const Eigen::VectorXd& lumped = space.lumped_mass();
  PencilResidual out;
  auto record = [&](const Point2& p, Vector8c r) {
    r *= section.scale();
    out.points.push_back(p);
    out.values.push_back(r);
    out.max_norm = std::max(out.max_norm, r.cwiseAbs().maxCoeff());
  };
  // In-plane components: constant on each triangle.
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& g = mesh.hat_gradients(t);
    ScalarJet j;
    Point2 c = Point2::Zero();
    for (int i = 0; i < 3; ++i) {
      j.value += u[tri[i]] / 3.0;
      j.grad += u[tri[i]] * g[i];
      c += mesh.nodes()[tri[i]] / 3.0;
    }
    const SectionJet s = potential_section_jet(section.coefficients(), section.lambda(), section.k(), j);
    Vector8c r = pencil_residual(s, lambda, k);
    r[2] = r[3] = r[6] = r[7] = 0.0;
    record(c, r);
  }
  // Axial and scalar components in weak form: Laplace u -> -(K u)_i / m_i, u -> (M u)_i / m_i.
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    ScalarJet j;
    j.value = mu[v] / lumped[v];
    const double lap = -ku[v] / lumped[v];
    j.hess << 0.5 * lap, 0.0, 0.0, 0.5 * lap;
    const SectionJet s = potential_section_jet(section.coefficients(), section.lambda(), section.k(), j);
    Vector8c r = pencil_residual(s, lambda, k);
    r.segment<2>(0).setZero();
    r.segment<2>(4).setZero();
    if (mesh.on_boundary()[v]) r[2] = r[7] = 0.0;
    record(mesh.nodes()[v], r);
  }
  return out;
}

}  // namespace

PencilResidual apply_pencil(const VectorModeSection& section, Complex lambda, double k, int order) {
  if (section.has_potential() && section.potential().is_fem()) {
    return apply_pencil_fem(section, lambda, k);
  }
  PencilResidual out;
  const QuadratureRule2D q = section.domain().volume_rule(order);
  out.points = q.points;
  out.values.reserve(q.points.size());
  for (const auto& p : q.points) {
    const Vector8c r = pencil_residual(section.jet(p), lambda, k);
    out.values.push_back(r);
    out.max_norm = std::max(out.max_norm, r.cwiseAbs().maxCoeff());
  }
  return out;
}

double boundary_defect(const VectorModeSection& section, int samples) {
  const QuadratureRule2D b = section.domain().boundary_samples(samples);
  double worst = 0.0;
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const Vector8c v = section.value(b.points[i]);
    const Point2& nu = b.normals[i];
    const Complex phi_t = -nu.y() * v[0] + nu.x() * v[1];
    const Complex psi_n = nu.x() * v[4] + nu.y() * v[5];
    worst = std::max({worst, std::abs(phi_t), std::abs(v[2]), std::abs(psi_n), std::abs(v[7])});
  }
  return worst;
}

namespace {

double threshold_tol(double k) { return kThresholdTol * std::max(1.0, k * k); }

std::vector<std::shared_ptr<const ScalarEigenpair>> shared_pairs(const CrossSection& cs, BoundaryCondition bc,
                                                                 double cutoff, bool positive_only) {
  std::vector<std::shared_ptr<const ScalarEigenpair>> out;
  for (auto& p : helmholtz_eigs(cs, bc, cutoff))
    if (!positive_only || p.mu() > 0.0) out.push_back(std::make_shared<const ScalarEigenpair>(std::move(p)));
  return out;
}

}  // namespace

void check_off_threshold(const CrossSection& cs, double k) {
  const double tol = threshold_tol(k);
  for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann})
    for (const auto& p : helmholtz_eigs(cs, bc, k * k + tol))
      if (p.mu() > 0.0 && std::abs(k * k - p.mu()) < tol)
        throw ThresholdError("k = " + std::to_string(k) + " lies on the threshold " + std::to_string(std::sqrt(p.mu())),
                             std::sqrt(p.mu()));
}

std::vector<PencilPoint> real_maxwell_spectrum(const CrossSection& cs, double k) {
  if (k == 0.0) throw DomainError("real_maxwell_spectrum: k = 0 is not supported");
  k = std::abs(k);
  check_off_threshold(cs, k);
  std::vector<std::shared_ptr<const ScalarEigenpair>> all;
  for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann})
    for (auto& p : shared_pairs(cs, bc, k * k, true)) all.push_back(std::move(p));
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x->mu() < y->mu(); });
  std::vector<PencilPoint> out;
  for (const auto& p : all) {
    out.push_back(PencilPoint::propagating(k, p, +1));
    out.push_back(PencilPoint::propagating(k, p, -1));
  }
  return out;
}

std::vector<PencilPoint> evanescent_points(const CrossSection& cs, double k, double mu_cutoff) {
  std::vector<std::shared_ptr<const ScalarEigenpair>> all;
  for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann})
    for (auto& p : shared_pairs(cs, bc, mu_cutoff, true))
      if (p->mu() > k * k) all.push_back(std::move(p));
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x->mu() < y->mu(); });
  std::vector<PencilPoint> out;
  for (const auto& p : all) out.push_back(PencilPoint::evanescent(k, p));
  return out;
}

std::vector<Threshold> thresholds(const std::vector<CrossSection>& ends, double k_max) {
  if (!(k_max > 0)) throw DomainError("thresholds: k_max must be positive");
  struct Raw {
    double k;
    int end;
    BoundaryCondition bc;
  };
  std::vector<Raw> raw;
  for (std::size_t e = 0; e < ends.size(); ++e)
    for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann})
      for (const auto& p : helmholtz_eigs(ends[e], bc, k_max * k_max))
        if (p.mu() > 0.0) raw.push_back({std::sqrt(p.mu()), static_cast<int>(e), bc});
  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.k < b.k; });
  std::vector<Threshold> out;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    std::map<std::pair<int, int>, int> counts;
    double sum = 0.0;
    while (j < raw.size() && raw[j].k - raw[i].k <= kMatchTol * raw[i].k) {
      ++counts[{raw[j].end, static_cast<int>(raw[j].bc)}];
      sum += raw[j].k;
      ++j;
    }
    Threshold t;
    t.k = raw[i].k;
    t.multiplicity = static_cast<int>(j - i);
    for (const auto& [key, n] : counts) t.sources.push_back({key.first, static_cast<BoundaryCondition>(key.second), n});
    out.push_back(std::move(t));
    i = j;
  }
  return out;
}

VectorModeSection build_mode(const CrossSection& cs, const PencilPoint& point, std::optional<Family> family) {
  const double k = point.k();
  const Complex lambda = point.lambda();
  const bool dirichlet = point.bc_origin() == BoundaryCondition::dirichlet;
  if (std::abs(point.mu()) <= threshold_tol(k))
    throw DomainError("build_mode: k^2 - lambda^2 vanishes; use special_vectors");
  const Family f = family.value_or(dirichlet ? Family::tm : Family::te);
  Eigen::Vector4cd c = Eigen::Vector4cd::Zero();
  switch (f) {
    case Family::tm:
      if (!dirichlet) throw DomainError("build_mode: TM modes need a dirichlet potential");
      c[0] = 1.0;
      break;
    case Family::te:
      if (dirichlet) throw DomainError("build_mode: TE modes need a neumann potential");
      c[1] = 1.0;
      break;
    case Family::alpha_scalar:
      if (dirichlet) throw DomainError("build_mode: alpha-scalar modes need a neumann potential");
      if (k == 0.0) throw DomainError("build_mode: scalar families need k != 0");
      c[1] = lambda / k;
      c[2] = 1.0;
      break;
    case Family::beta_scalar:
      if (!dirichlet) throw DomainError("build_mode: beta-scalar modes need a dirichlet potential");
      if (k == 0.0) throw DomainError("build_mode: scalar families need k != 0");
      c[0] = -lambda / k;
      c[3] = 1.0;
      break;
    default: throw DomainError("build_mode: unsupported family");
  }
  return VectorModeSection::from_potential(cs, point.potential_ptr(), c, lambda, k, f);
}

std::vector<SpecialVector> special_vectors(const CrossSection& cs, double k) {
  auto u = std::make_shared<const ScalarEigenpair>(constant_mode(cs));
  std::vector<SpecialVector> out;
  if (k == 0.0) {
    const PencilPoint p(0.0, 0.0, u);
    out.push_back({p, VectorModeSection::from_potential(cs, u, Eigen::Vector4cd(0, 0, 1, 0), 0.0, 0.0,
                                                        Family::constant_special)});
    out.push_back({p, VectorModeSection::from_potential(cs, u, Eigen::Vector4cd(0, 1, 0, 0), 0.0, 0.0,
                                                        Family::constant_special)});
    return out;
  }
  for (int sign : {+1, -1}) {
    const PencilPoint p = PencilPoint::propagating(k, u, sign);
    const Complex lambda = p.lambda();
    out.push_back({p, VectorModeSection::from_potential(cs, u, Eigen::Vector4cd(0, lambda / k, 1, 0), lambda, k,
                                                        Family::constant_special)});
  }
  return out;
}

MultiplicityReport multiplicity_report(const CrossSection& cs, double k, double lambda) {
  MultiplicityReport r;
  const double mu = k * k - lambda * lambda;
  if (mu <= 0.0) return r;
  const double tol = kMatchTol * std::max(1.0, mu);
  for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    int n = 0;
    for (const auto& p : helmholtz_eigs(cs, bc, mu + tol))
      if (p.mu() > 0.0 && std::abs(p.mu() - mu) <= tol) ++n;
    (bc == BoundaryCondition::dirichlet ? r.kappa_d : r.kappa_n) = n;
  }
  r.kappa_m = r.kappa_d + r.kappa_n;
  r.kappa_a = 2 * r.kappa_m;
  return r;
}

namespace {

Vector3c cross(const Vector3c& a, const Vector3c& b) {
  return Vector3c(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

// (a, b) = sum a_i conj(b_i)
Complex inner(const Eigen::Ref<const Eigen::VectorXcd>& a, const Eigen::Ref<const Eigen::VectorXcd>& b) {
  return b.dot(a);
}

struct BoundaryData {
  Vector3c bu;  // nu x u1
  Complex bn;   // <u2, nu>
  Complex bs;   // a2
  Vector3c qu;  // -i u2
  Complex qn;   // -i a1
  Complex qs;   // <i u1, nu>
};

BoundaryData boundary_ops(const Vector8c& v, const Vector3c& nu) {
  const Vector3c u1 = v.segment<3>(comp::phi), u2 = v.segment<3>(comp::psi);
  return {cross(nu, u1), nu.dot(u2), v[comp::beta], -kI * u2, -kI * v[comp::alpha], kI * nu.dot(u1)};
}

// (B U, Q V) - (Q U, B V) on one boundary point
Complex boundary_pairing(const Vector8c& u, const Vector8c& v, const Vector3c& nu) {
  const BoundaryData a = boundary_ops(u, nu), b = boundary_ops(v, nu);
  const Complex buqv = inner(a.bu, b.qu) + a.bn * std::conj(b.qn) + a.bs * std::conj(b.qs);
  const Complex qubv = inner(a.qu, b.bu) + a.qn * std::conj(b.bn) + a.qs * std::conj(b.bs);
  return buqv - qubv;
}

}  // namespace

IdentityResiduals identity_residuals(const CrossSection& cs, Complex lambda, const VectorModeSection& u,
                                     const VectorModeSection& v, double length, int order) {
  const QuadratureRule2D vol = cs.volume_rule(order);
  const QuadratureRule2D bnd = cs.boundary_rule(order);
  const Complex il = kI * lambda, ilc = kI * std::conj(lambda);
  Complex o1 = 0.0, o2 = 0.0, vol_green = 0.0, cap0 = 0.0, capT = 0.0;
  for (std::size_t i = 0; i < vol.points.size(); ++i) {
    const SectionJet a = u.jet(vol.points[i]);
    const SectionJet b = v.jet(vol.points[i]);
    const double w = vol.weights[i];
    const Complex al = a.value[comp::alpha];
    const Vector3c grad_al(a.d1[comp::alpha], a.d2[comp::alpha], il * al);
    const Vector3c phi = b.value.segment<3>(comp::phi);
    const Complex div_phi = b.d1[0] + b.d2[1] + ilc * phi[2];
    o1 += w * (inner(grad_al, phi) + al * std::conj(div_phi));
    const Vector3c psi = a.value.segment<3>(comp::psi);
    const Vector3c rot_psi(a.d2[6] - il * psi[1], il * psi[0] - a.d1[6], a.d1[5] - a.d2[4]);
    const Vector3c rot_phi(b.d2[2] - ilc * phi[1], ilc * phi[0] - b.d1[2], b.d1[1] - b.d2[0]);
    o2 += w * (inner(rot_psi, phi) - inner(psi, rot_phi));
    // k-free operator: the -k terms are symmetric and cancel.
    const Vector8c au = pencil_residual(a, lambda, 0.0), av = pencil_residual(b, lambda, 0.0);
    vol_green += w * (inner(au, b.value) - inner(a.value, av));
    cap0 += w * boundary_pairing(a.value, b.value, Vector3c(0, 0, -1));
    capT += w * boundary_pairing(a.value, b.value, Vector3c(0, 0, 1));
  }
  Complex lat = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < bnd.points.size(); ++i) {
    const Vector8c a = u.value(bnd.points[i]);
    const Vector8c b = v.value(bnd.points[i]);
    const Vector3c nu(bnd.normals[i].x(), bnd.normals[i].y(), 0.0);
    const double w = bnd.weights[i];
    b1 += w * a[comp::alpha] * std::conj(b[0] * nu[0] + b[1] * nu[1]);
    b2 += w * inner(cross(nu, a.segment<3>(comp::psi)), b.segment<3>(comp::phi));
    lat += w * boundary_pairing(a, b, nu);
  }
  // |exp(i lambda t)|^2 = exp(-2 Im(lambda) t) integrated along the segment
  const Rule1D gt = gauss_legendre(order, 0.0, length);
  double tw = 0.0;
  for (int i = 0; i < gt.nodes.size(); ++i) tw += gt.weights[i] * std::exp(-2.0 * lambda.imag() * gt.nodes[i]);
  const double end_w = std::exp(-2.0 * lambda.imag() * length);
  IdentityResiduals r;
  r.ort1 = std::abs(o1 - b1);
  r.ort2 = std::abs(o2 - b2);
  r.green = std::abs(tw * (vol_green + lat) + cap0 + end_w * capT);
  r.boundary_ort1 = std::abs(b1);
  r.boundary_ort2 = std::abs(b2);
  r.boundary_green = std::abs(tw * lat);
  return r;
}

double decay_delta(const std::vector<CrossSection>& ends, double k) {
  double delta = std::numeric_limits<double>::infinity();
  for (const auto& cs : ends) {
    double cutoff = 2.0 * k * k + 20.0;
    for (;;) {
      double first = std::numeric_limits<double>::infinity();
      for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann})
        for (const auto& p : helmholtz_eigs(cs, bc, cutoff))
          if (p.mu() > k * k) first = std::min(first, p.mu());
      if (std::isfinite(first)) {
        delta = std::min(delta, 0.5 * std::sqrt(first - k * k));
        break;
      }
      cutoff *= 2.0;
    }
  }
  return delta;
}

}  // namespace wg
