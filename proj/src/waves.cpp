#include "waveguide/waves.hpp"

#include <algorithm>
#include <cmath>

namespace wg {

const char* to_string(Direction d) { return d == Direction::incoming ? "incoming" : "outgoing"; }

namespace {

Vector8c a3(const Vector8c& v) {
  Vector8c r;
  r << v[5], -v[4], -v[7], v[6], -v[1], v[0], v[3], -v[2];
  return r;
}

}  // namespace

Complex flux_pairing(const VectorModeSection& u, const VectorModeSection& v, int order) {
  const QuadratureRule2D q = u.domain().volume_rule(u.domain().backend() == Backend::fem ? 2 : order);
  Complex s = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i)
    s += q.weights[i] * v.value(q.points[i]).dot(a3(u.value(q.points[i])));
  return 0.5 * s;
}

double axial_flux(const VectorModeSection& section, Complex lambda, double k, int order) {
  (void)k;
  if (lambda.imag() != 0.0) throw DomainError("axial_flux: defined for propagating (real lambda) sections only");
  return flux_pairing(section, section, order).real();
}

namespace {

Point2 reference_point(const VectorModeSection& s) {
  const CrossSection& cs = s.domain();
  if (cs.backend() == Backend::fem) {
    const auto& interior = cs.fem()->interior_nodes();
    return cs.fem()->mesh().nodes()[interior.empty() ? 0 : interior.front()];
  }
  return cs.centroid();
}

}  // namespace

CylinderWave normalize_and_orient(const VectorModeSection& raw, int end_index, CutoffProfile cutoff) {
  const double flux = axial_flux(raw, raw.lambda(), raw.k());
  if (std::abs(flux) < 1e-12) throw ThresholdError("normalize_and_orient: vanishing flux", raw.k());
  Complex scale = 1.0 / std::sqrt(std::abs(flux));
  if (raw.has_potential()) {
    const Eigen::Vector4cd c = raw.coefficients() * raw.scale();
    int first = 0;
    while (first < 3 && std::abs(c[first]) <= 1e-14 * c.cwiseAbs().maxCoeff()) ++first;
    const double u_ref = raw.potential().jet(reference_point(raw)).value;
    const double sign = std::abs(u_ref) > 1e-10 ? (u_ref > 0 ? 1.0 : -1.0) : 1.0;
    const Complex z = c[first] * sign;
    scale *= std::conj(z) / std::abs(z);
  }
  CylinderWave w{end_index, raw.scaled(scale), raw.lambda().real(), raw.k(),
                 flux > 0 ? Direction::outgoing : Direction::incoming, flux, raw.family(), cutoff, ""};
  w.label = std::string(to_string(w.family)) + ":" + (raw.has_potential() ? raw.potential().label() : "?") +
            (w.lambda > 0 ? ":+" : ":-");
  return w;
}

std::vector<CylinderWave> ModeLedger::e_incoming() const {
  std::vector<CylinderWave> out;
  for (const auto& e : ends) out.insert(out.end(), e.e_incoming.begin(), e.e_incoming.end());
  return out;
}
std::vector<CylinderWave> ModeLedger::e_outgoing() const {
  std::vector<CylinderWave> out;
  for (const auto& e : ends) out.insert(out.end(), e.e_outgoing.begin(), e.e_outgoing.end());
  return out;
}
std::vector<CylinderWave> ModeLedger::g_incoming() const {
  std::vector<CylinderWave> out;
  for (const auto& e : ends) out.insert(out.end(), e.g_incoming.begin(), e.g_incoming.end());
  return out;
}
std::vector<CylinderWave> ModeLedger::g_outgoing() const {
  std::vector<CylinderWave> out;
  for (const auto& e : ends) out.insert(out.end(), e.g_outgoing.begin(), e.g_outgoing.end());
  return out;
}

ModeLedger build_ledger(const std::vector<CrossSection>& ends, double k, double evanescent_cutoff) {
  if (k == 0.0) throw DomainError("build_ledger: k = 0 is not supported");
  k = std::abs(k);
  ModeLedger L;
  L.k = k;
  if (evanescent_cutoff <= 0.0) evanescent_cutoff = 2.0 * k * k + 50.0;
  for (std::size_t q = 0; q < ends.size(); ++q) {
    const CrossSection& cs = ends[q];
    const int end = static_cast<int>(q);
    EndLedger E;
    const auto spec = real_maxwell_spectrum(cs, k);
    E.upsilon = static_cast<int>(spec.size()) / 2;
    auto add = [](CylinderWave w, std::vector<CylinderWave>& in, std::vector<CylinderWave>& out) {
      (w.direction == Direction::incoming ? in : out).push_back(std::move(w));
    };
    for (const auto& pt : spec) {
      add(normalize_and_orient(build_mode(cs, pt), end), E.e_incoming, E.e_outgoing);
      const Family f = pt.bc_origin() == BoundaryCondition::dirichlet ? Family::beta_scalar : Family::alpha_scalar;
      add(normalize_and_orient(build_mode(cs, pt, f), end), E.g_incoming, E.g_outgoing);
    }
    for (const auto& sv : special_vectors(cs, k)) add(normalize_and_orient(sv.section, end), E.g_incoming, E.g_outgoing);
    E.evanescent = evanescent_points(cs, k, evanescent_cutoff);
    L.upsilon += E.upsilon;
    L.ends.push_back(std::move(E));
  }
  L.t_total = 2 * L.upsilon + static_cast<int>(ends.size());
  L.threshold_distance = std::numeric_limits<double>::infinity();
  for (const auto& t : thresholds(ends, 2.0 * k + 10.0))
    L.threshold_distance = std::min(L.threshold_distance, std::abs(t.k - k));
  return L;
}

double cutoff_chi(const CutoffProfile& p, double t) {
  const double x = std::clamp((t - p.t_inner) / (p.t_outer - p.t_inner), 0.0, 1.0);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double cutoff_chi_derivative(const CutoffProfile& p, double t) {
  const double w = p.t_outer - p.t_inner;
  const double x = (t - p.t_inner) / w;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 30.0 * x * x * (1.0 - x) * (1.0 - x) / w;
}

ExtendedWave::ExtendedWave(CylinderWave wave, double cylinder_start) : wave_(std::move(wave)) {
  const CutoffProfile& p = wave_.cutoff;
  if (std::abs(p.t_outer - p.t_inner - 1.0) > 1e-12) throw DomainError("cutoff profile needs t_inner = t_outer - 1");
  if (p.t_inner < cylinder_start)
    throw GeometryError("cutoff support [" + std::to_string(p.t_inner) + ", inf) leaves the cylindrical end");
}

Vector8c ExtendedWave::evaluate(int end_index, const Point2& y, double t) const {
  if (end_index != wave_.end_index) return Vector8c::Zero();
  const double chi = cutoff_chi(wave_.cutoff, t);
  if (chi == 0.0) return Vector8c::Zero();
  return chi * std::exp(kI * wave_.lambda * t) * wave_.section.value(y);
}

ExtendedWave extend_to_domain(const CylinderWave& wave, CutoffProfile cutoff, double cylinder_start) {
  CylinderWave w = wave;
  w.cutoff = cutoff;
  return ExtendedWave(std::move(w), cylinder_start);
}

}  // namespace wg
