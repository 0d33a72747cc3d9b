#include "waveguide/scattering.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "waveguide/quadrature.hpp"

namespace wg {

void validate(const SeparableStep& s) {
  if (!(s.a1 > 0.0) || !(s.a2 >= s.a1)) throw GeometryError("step: need 0 < a1 <= a2");
  if (!(s.offset >= 0.0) || s.offset + s.a1 > s.a2 * (1.0 + 1e-14))
    throw GeometryError("step: the narrow guide must fit inside the wide one");
  if (!(s.b > 0.0)) throw GeometryError("step: transverse extent b must be positive");
}

double unitarity_residual(const Eigen::MatrixXcd& s) {
  if (s.size() == 0) return 0.0;
  const Eigen::MatrixXcd r = s.adjoint() * s - Eigen::MatrixXcd::Identity(s.cols(), s.cols());
  return r.cwiseAbs().maxCoeff();
}

namespace {

Vector8c a3(const Vector8c& v) {
  Vector8c r;
  r << v[5], -v[4], -v[7], v[6], -v[1], v[0], v[3], -v[2];
  return r;
}

void finish(ScatteringMatrix& m) { m.unitarity_residual = unitarity_residual(m.entries); }

// ---- straight guide -------------------------------------------------------

ScatteringMatrix straight(const StraightGuide& g, double k, FamilyFilter filter, bool incoming_basis) {
  if (!(g.length >= 0.0)) throw GeometryError("straight guide: length must be non-negative");
  const ModeLedger L = build_ledger({g.cs}, k);
  const auto waves = filter == FamilyFilter::maxwell ? L.e_outgoing() : L.g_outgoing();
  const int n = static_cast<int>(waves.size());
  ScatteringMatrix m;
  m.k = L.k;
  m.kind = incoming_basis ? "t" : "s";
  m.entries = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int end = 0; end < 2; ++end)
    for (int j = 0; j < n; ++j) {
      Channel c{end, waves[j].family, j, waves[j].lambda, waves[j].label};
      m.rows.push_back(c);
      m.cols.push_back(c);
    }
  for (int j = 0; j < n; ++j) {
    Complex t = std::exp(kI * waves[j].lambda * g.length);
    if (incoming_basis) t = std::conj(t);
    m.entries(j, n + j) = t;
    m.entries(n + j, j) = t;
  }
  finish(m);
  return m;
}

// ---- scalar step ------------------------------------------------------------

struct Guide1D {
  double width, origin;
  BoundaryCondition bc;
  int count;

  int index(int i) const { return bc == BoundaryCondition::dirichlet ? i + 1 : i; }
  double wavenumber(int i) const { return index(i) * kPi / width; }
  double norm(int i) const { return std::sqrt((index(i) == 0 ? 1.0 : 2.0) / width); }
  double value(int i, double y) const {
    const double x = wavenumber(i) * (y - origin);
    return norm(i) * (bc == BoundaryCondition::dirichlet ? std::sin(x) : std::cos(x));
  }
};

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// int_lo^hi cos(w y + phi) dy, stable for small w.
double cos_integral(double w, double phi, double lo, double hi) {
  const double h = hi - lo;
  return h * std::cos(w * 0.5 * (lo + hi) + phi) * sinc(0.5 * w * h);
}

Eigen::VectorXcd axial_numbers(const Guide1D& g, double k, int& propagating) {
  const double tol = kThresholdTol * std::max(1.0, k * k);
  Eigen::VectorXcd l(g.count);
  propagating = 0;
  for (int i = 0; i < g.count; ++i) {
    const double q = g.wavenumber(i);
    const double d = k * k - q * q;
    if (q > 0.0 && std::abs(d) < tol) throw ThresholdError("k = " + std::to_string(k) + " lies on a step threshold", q);
    if (d > 0.0) {
      l[i] = std::sqrt(d);
      ++propagating;
    } else {
      l[i] = Complex(0.0, std::sqrt(-d));
    }
  }
  return l;
}

struct StepSystem {
  Guide1D left, right;
  Eigen::VectorXcd lam_l, lam_r;
  int prop_l = 0, prop_r = 0;
  Eigen::MatrixXcd G;  // columns [A | B | C | D]

  int ml() const { return left.count; }
  int mr() const { return right.count; }
  int col_a(int n) const { return n; }
  int col_b(int n) const { return ml() + n; }
  int col_c(int m) const { return 2 * ml() + m; }
  int col_d(int m) const { return 2 * ml() + mr() + m; }
};

StepSystem build_step(const SeparableStep& step, double k, BoundaryCondition bc, int M) {
  validate(step);
  if (!(k > 0.0)) throw DomainError("step: k must be positive");
  if (M < 1) throw DomainError("step: truncation M must be positive");
  StepSystem s;
  const int narrow = static_cast<int>(std::ceil(M * step.a1 / step.a2 - 1e-12));
  s.left = Guide1D{step.a1, step.offset, bc, std::max(1, narrow)};
  s.right = Guide1D{step.a2, 0.0, bc, M};
  s.lam_l = axial_numbers(s.left, k, s.prop_l);
  s.lam_r = axial_numbers(s.right, k, s.prop_r);
  if (s.prop_l >= s.ml() || s.prop_r >= s.mr())
    throw DomainError("step: truncation M = " + std::to_string(M) + " does not exceed the propagating mode count");

  const int ml = s.ml(), mr = s.mr();
  Eigen::MatrixXd W(mr, ml);
  const double lo = step.offset, hi = step.offset + step.a1;
  const double sign = bc == BoundaryCondition::dirichlet ? -1.0 : 1.0;
  for (int m = 0; m < mr; ++m)
    for (int n = 0; n < ml; ++n) {
      const double p = s.right.wavenumber(m), q = s.left.wavenumber(n);
      const double v = 0.5 * (cos_integral(p - q, q * step.offset, lo, hi) +
                              sign * cos_integral(p + q, -q * step.offset, lo, hi));
      W(m, n) = s.right.norm(m) * s.left.norm(n) * v;
    }

  s.G = Eigen::MatrixXcd::Zero(ml + mr, 2 * ml + 2 * mr);
  if (bc == BoundaryCondition::dirichlet) {
    for (int m = 0; m < mr; ++m) {
      s.G(m, s.col_c(m)) = 1.0;
      s.G(m, s.col_d(m)) = 1.0;
      for (int n = 0; n < ml; ++n) {
        s.G(m, s.col_a(n)) = -W(m, n);
        s.G(m, s.col_b(n)) = -W(m, n);
      }
    }
    for (int n = 0; n < ml; ++n) {
      const int r = mr + n;
      s.G(r, s.col_a(n)) = s.lam_l[n];
      s.G(r, s.col_b(n)) = -s.lam_l[n];
      for (int m = 0; m < mr; ++m) {
        s.G(r, s.col_c(m)) = -W(m, n) * s.lam_r[m];
        s.G(r, s.col_d(m)) = W(m, n) * s.lam_r[m];
      }
    }
  } else {
    for (int m = 0; m < mr; ++m) {
      s.G(m, s.col_c(m)) = s.lam_r[m];
      s.G(m, s.col_d(m)) = -s.lam_r[m];
      for (int n = 0; n < ml; ++n) {
        s.G(m, s.col_a(n)) = -W(m, n) * s.lam_l[n];
        s.G(m, s.col_b(n)) = W(m, n) * s.lam_l[n];
      }
    }
    for (int n = 0; n < ml; ++n) {
      const int r = mr + n;
      s.G(r, s.col_a(n)) = 1.0;
      s.G(r, s.col_b(n)) = 1.0;
      for (int m = 0; m < mr; ++m) {
        s.G(r, s.col_c(m)) = -W(m, n);
        s.G(r, s.col_d(m)) = -W(m, n);
      }
    }
  }
  return s;
}

// Incident channels: A (propagating, end 0) then D (end 1); outgoing: B then C.
std::vector<int> incident_columns(const StepSystem& s) {
  std::vector<int> c;
  for (int n = 0; n < s.prop_l; ++n) c.push_back(s.col_a(n));
  for (int m = 0; m < s.prop_r; ++m) c.push_back(s.col_d(m));
  return c;
}

std::vector<int> outgoing_columns(const StepSystem& s) {
  std::vector<int> c;
  for (int n = 0; n < s.prop_l; ++n) c.push_back(s.col_b(n));
  for (int m = 0; m < s.prop_r; ++m) c.push_back(s.col_c(m));
  return c;
}

std::vector<int> evanescent_columns(const StepSystem& s, bool decaying) {
  std::vector<int> c;
  for (int n = s.prop_l; n < s.ml(); ++n) c.push_back(decaying ? s.col_b(n) : s.col_a(n));
  for (int m = s.prop_r; m < s.mr(); ++m) c.push_back(decaying ? s.col_c(m) : s.col_d(m));
  return c;
}

double column_lambda(const StepSystem& s, int col) {
  const int ml = s.ml(), mr = s.mr();
  if (col < 2 * ml) return s.lam_l[col % ml].real();
  return s.lam_r[(col - 2 * ml) % mr].real();
}

// Solves with `given` columns prescribed (unit flux, one at a time) and
// `unknown` columns free. Returns the full amplitude vectors as columns.
Eigen::MatrixXcd solve_columns(const StepSystem& s, const std::vector<int>& given, const std::vector<int>& unknown,
                               double& rcond) {
  const int n = static_cast<int>(unknown.size());
  Eigen::MatrixXcd Gu(s.G.rows(), n);
  for (int i = 0; i < n; ++i) Gu.col(i) = s.G.col(unknown[i]);
  Eigen::MatrixXcd rhs(s.G.rows(), given.size());
  for (std::size_t j = 0; j < given.size(); ++j) rhs.col(j) = -s.G.col(given[j]) / std::sqrt(column_lambda(s, given[j]));
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Gu);
  rcond = lu.rcond();
  if (!(rcond > 1e-14)) throw SolverError("step: mode-matching system is singular");
  const Eigen::MatrixXcd x = lu.solve(rhs);
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(s.G.cols(), given.size());
  for (std::size_t j = 0; j < given.size(); ++j) {
    full(given[j], j) = 1.0 / std::sqrt(column_lambda(s, given[j]));
    for (int i = 0; i < n; ++i) full(unknown[i], j) = x(i, j);
  }
  return full;
}

using ChannelNamer = std::function<Channel(int end, int index, double lambda)>;

ScatteringMatrix step_matrix(const SeparableStep& step, double k, BoundaryCondition bc, int M, bool incoming_basis,
                             const ChannelNamer& namer) {
  const StepSystem s = build_step(step, k, bc, M);
  const auto in = incident_columns(s), out = outgoing_columns(s);
  const std::vector<int>& given = incoming_basis ? out : in;
  const std::vector<int>& solved = incoming_basis ? in : out;
  std::vector<int> unknown = solved;
  for (int c : evanescent_columns(s, true)) unknown.push_back(c);
  ScatteringMatrix r;
  r.k = k;
  r.kind = incoming_basis ? "t" : "s";
  r.truncation = M;
  const Eigen::MatrixXcd full = solve_columns(s, given, unknown, r.rcond);
  const int p = static_cast<int>(given.size());
  r.entries.resize(p, p);
  for (int j = 0; j < p; ++j)
    for (int q = 0; q < p; ++q) r.entries(j, q) = full(solved[q], j) * std::sqrt(column_lambda(s, solved[q]));
  auto channels = [&](const std::vector<int>& cols) {
    std::vector<Channel> c;
    for (int col : cols) {
      const int end = col < 2 * s.ml() ? 0 : 1;
      const int idx = end == 0 ? col % s.ml() : (col - 2 * s.ml()) % s.mr();
      const Guide1D& g = end == 0 ? s.left : s.right;
      c.push_back(namer(end, g.index(idx), column_lambda(s, col)));
    }
    return c;
  };
  r.rows = channels(given);
  r.cols = channels(solved);
  finish(r);
  return r;
}

Channel plain_channel(BoundaryCondition bc, int end, int index, double lambda) {
  return Channel{end, Family::general, index, lambda,
                 std::string(end == 0 ? "L:" : "R:") + (bc == BoundaryCondition::dirichlet ? "D" : "N") +
                     std::to_string(index)};
}

void check_single_family_band(const SeparableStep& step, double k) {
  validate(step);
  if (!(k < kPi / step.b))
    throw DomainError("maxwell step: k = " + std::to_string(k) + " must stay below pi / b = " +
                      std::to_string(kPi / step.b));
}

}  // namespace

ScatteringMatrix straight_smatrix(const StraightGuide& guide, double k, FamilyFilter filter) {
  return straight(guide, k, filter, false);
}

ScatteringMatrix straight_tmatrix(const StraightGuide& guide, double k, FamilyFilter filter) {
  return straight(guide, k, filter, true);
}

ScatteringMatrix step_smatrix(const SeparableStep& step, double k, BoundaryCondition bc, int M) {
  return step_matrix(step, k, bc, M, false,
                     [bc](int e, int i, double l) { return plain_channel(bc, e, i, l); });
}

ScatteringMatrix step_tmatrix(const SeparableStep& step, double k, BoundaryCondition bc, int M) {
  return step_matrix(step, k, bc, M, true, [bc](int e, int i, double l) { return plain_channel(bc, e, i, l); });
}

namespace {

Channel te_channel(int end, int m, double lambda) {
  return Channel{end, Family::te, m, lambda, std::string(end == 0 ? "L:" : "R:") + "TE" + std::to_string(m) + "0"};
}

Channel scalar_channel(int end, int m, double lambda) {
  return Channel{end, m == 0 ? Family::constant_special : Family::alpha_scalar, m, lambda,
                 std::string(end == 0 ? "L:" : "R:") + (m == 0 ? "const" : "alpha" + std::to_string(m) + "0")};
}

}  // namespace

ScatteringMatrix maxwell_step_smatrix(const SeparableStep& step, double k, int M) {
  check_single_family_band(step, k);
  return step_matrix(step, k, BoundaryCondition::dirichlet, M, false, te_channel);
}

ScatteringMatrix maxwell_step_tmatrix(const SeparableStep& step, double k, int M) {
  check_single_family_band(step, k);
  return step_matrix(step, k, BoundaryCondition::dirichlet, M, true, te_channel);
}

ScatteringMatrix scalar_step_smatrix(const SeparableStep& step, double k, int M) {
  check_single_family_band(step, k);
  ScatteringMatrix r = step_matrix(step, k, BoundaryCondition::neumann, M, false, scalar_channel);
  r.kind = "upsilon";
  return r;
}

ScatteringMatrix assemble_sigma(const ScatteringMatrix& s, const ScatteringMatrix& upsilon) {
  if (std::abs(s.k - upsilon.k) > 1e-14 * std::max(1.0, s.k))
    throw DomainError("assemble_sigma: blocks computed at different k");
  ScatteringMatrix r;
  r.k = s.k;
  r.kind = "sigma";
  const int n1 = s.size(), n2 = upsilon.size();
  r.entries = Eigen::MatrixXcd::Zero(n1 + n2, n1 + n2);
  r.entries.topLeftCorner(n1, n1) = s.entries;
  r.entries.bottomRightCorner(n2, n2) = upsilon.entries;
  r.rows = s.rows;
  r.rows.insert(r.rows.end(), upsilon.rows.begin(), upsilon.rows.end());
  r.cols = s.cols;
  r.cols.insert(r.cols.end(), upsilon.cols.begin(), upsilon.cols.end());
  r.truncation = std::max(s.truncation, upsilon.truncation);
  r.rcond = std::min(s.rcond, upsilon.rcond);
  // sigma^* sigma is block diagonal, so its defect is the larger block defect
  r.unitarity_residual = std::max(unitarity_residual(s.entries), unitarity_residual(upsilon.entries));
  return r;
}

// ---- step solution and decay -------------------------------------------------

StepSolution solve_step(const SeparableStep& step, double k, BoundaryCondition bc, int M, int incident_channel) {
  const StepSystem s = build_step(step, k, bc, M);
  const auto in = incident_columns(s);
  if (incident_channel < 0 || incident_channel >= static_cast<int>(in.size()))
    throw DomainError("solve_step: incident channel out of range");
  std::vector<int> unknown;
  for (int n = 0; n < s.ml(); ++n) unknown.push_back(s.col_b(n));
  for (int m = 0; m < s.mr(); ++m) unknown.push_back(s.col_c(m));
  double rcond = 0.0;
  const Eigen::VectorXcd x = solve_columns(s, {in[incident_channel]}, unknown, rcond).col(0);
  StepSolution r;
  r.k = k;
  r.step = step;
  r.bc = bc;
  r.lambda_left = s.lam_l;
  r.lambda_right = s.lam_r;
  r.a = x.segment(0, s.ml());
  r.b = x.segment(s.ml(), s.ml());
  r.c = x.segment(2 * s.ml(), s.mr());
  r.d = x.segment(2 * s.ml() + s.mr(), s.mr());
  r.propagating_left = s.prop_l;
  r.propagating_right = s.prop_r;
  return r;
}

namespace {

Complex step_sum(const StepSolution& s, double y, double x3, bool evanescent_only) {
  const bool left = x3 < 0.0;
  const Guide1D g = left ? Guide1D{s.step.a1, s.step.offset, s.bc, static_cast<int>(s.a.size())}
                         : Guide1D{s.step.a2, 0.0, s.bc, static_cast<int>(s.c.size())};
  if (y < g.origin || y > g.origin + g.width) return 0.0;
  const Eigen::VectorXcd& lam = left ? s.lambda_left : s.lambda_right;
  const Eigen::VectorXcd& fwd = left ? s.a : s.c;
  const Eigen::VectorXcd& bwd = left ? s.b : s.d;
  const int first = evanescent_only ? (left ? s.propagating_left : s.propagating_right) : 0;
  Complex sum = 0.0;
  for (int i = first; i < g.count; ++i) {
    Complex term = 0.0;
    if (fwd[i] != 0.0) term += fwd[i] * std::exp(kI * lam[i] * x3);
    if (bwd[i] != 0.0) term += bwd[i] * std::exp(-kI * lam[i] * x3);
    sum += term * g.value(i, y);
  }
  return sum;
}

}  // namespace

Complex StepSolution::field(double y, double x3) const { return step_sum(*this, y, x3, false); }

Complex StepSolution::remainder(double y, double x3) const { return step_sum(*this, y, x3, true); }

double step_decay_delta(const SeparableStep& step, double k, BoundaryCondition bc) {
  validate(step);
  double gap = std::numeric_limits<double>::infinity();
  for (double a : {step.a1, step.a2}) {
    int n = bc == BoundaryCondition::dirichlet ? 1 : 0;
    while (n * kPi / a <= k) ++n;
    gap = std::min(gap, std::sqrt(std::pow(n * kPi / a, 2) - k * k));
  }
  return 0.5 * gap;
}

DecayFit decay_diagnostic(const std::vector<double>& t, const std::vector<std::vector<Complex>>& samples, double delta,
                          double tolerance) {
  if (t.size() != samples.size()) throw DomainError("decay_diagnostic: station and sample counts differ");
  if (t.size() < 10) throw DomainError("decay_diagnostic: at least 10 axial stations are required");
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    double norm = 0.0;
    for (const Complex& v : samples[i]) norm = std::max(norm, std::abs(v));
    A(i, 0) = 1.0;
    A(i, 1) = t[i];
    b[i] = std::log(std::max(norm, 1e-300));
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  return DecayFit{coef[1], coef[1] <= -delta + tolerance};
}

// ---- sources and radiation ------------------------------------------------------

CompatibilityResidual compatibility_residual(const SourceField& f, const CrossSection& cs, double k, int order) {
  if (!(f.z_max > f.z_min)) throw DomainError("source: empty axial support");
  const Rule1D z = gauss_legendre(order, f.z_min, f.z_max);
  const QuadratureRule2D vol = cs.volume_rule(cs.backend() == Backend::fem ? 5 : order);
  const QuadratureRule2D bnd = cs.boundary_samples(4 * order);
  CompatibilityResidual r;
  for (int iz = 0; iz < z.nodes.size(); ++iz) {
    for (const Point2& p : vol.points) {
      const SourceJet j = f.eval(p, z.nodes[iz]);
      r.r1 = std::max(r.r1, std::abs(j.d1[0] + j.d2[1] + j.d3[2] - kI * k * j.value[7]));
      r.r2 = std::max(r.r2, std::abs(j.d1[4] + j.d2[5] + j.d3[6] + kI * k * j.value[3]));
    }
    for (std::size_t i = 0; i < bnd.points.size(); ++i) {
      const SourceJet j = f.eval(bnd.points[i], z.nodes[iz]);
      const Point2& nu = bnd.normals[i];
      r.r3 = std::max(r.r3, std::abs(j.value[4] * nu[0] + j.value[5] * nu[1]));
    }
  }
  return r;
}

AxialProfile sin2_bump(double z0, double z1) {
  if (!(z1 > z0)) throw DomainError("sin2_bump: need z0 < z1");
  const double w = z1 - z0;
  AxialProfile p;
  p.z_min = z0;
  p.z_max = z1;
  p.g = [=](double t) -> Complex {
    if (t <= z0 || t >= z1) return 0.0;
    const double s = std::sin(kPi * (t - z0) / w);
    return s * s;
  };
  p.dg = [=](double t) -> Complex {
    if (t <= z0 || t >= z1) return 0.0;
    return kPi / w * std::sin(2.0 * kPi * (t - z0) / w);
  };
  return p;
}

SourceField modal_source(const VectorModeSection& section, const AxialProfile& profile) {
  SourceField f;
  f.z_min = profile.z_min;
  f.z_max = profile.z_max;
  f.eval = [section, profile](const Point2& y, double t) {
    SourceJet j;
    const Complex g = profile.g(t), dg = profile.dg(t);
    if (g == 0.0 && dg == 0.0) return j;
    const SectionJet s = section.jet(y);
    const Vector8c v = a3(s.value);
    j.value = g * v;
    j.d1 = g * a3(s.d1);
    j.d2 = g * a3(s.d2);
    j.d3 = dg * v;
    return j;
  };
  return f;
}

SourceField operator+(const SourceField& a, const SourceField& b) {
  SourceField f;
  f.z_min = std::min(a.z_min, b.z_min);
  f.z_max = std::max(a.z_max, b.z_max);
  f.breaks = a.breaks;
  f.breaks.insert(f.breaks.end(), b.breaks.begin(), b.breaks.end());
  for (double z : {a.z_min, a.z_max, b.z_min, b.z_max})
    if (z > f.z_min && z < f.z_max) f.breaks.push_back(z);
  std::sort(f.breaks.begin(), f.breaks.end());
  f.breaks.erase(std::unique(f.breaks.begin(), f.breaks.end()), f.breaks.end());
  f.eval = [a, b](const Point2& y, double t) {
    SourceJet x = a.eval(y, t);
    const SourceJet w = b.eval(y, t);
    x.value += w.value;
    x.d1 += w.d1;
    x.d2 += w.d2;
    x.d3 += w.d3;
    return x;
  };
  return f;
}

RadiationResult radiation_coefficients(const SourceField& f, const StraightGuide& guide, double k, int order,
                                       int steps) {
  if (f.z_min < 0.0 || f.z_max > guide.length)
    throw GeometryError("radiation: source support [" + std::to_string(f.z_min) + ", " + std::to_string(f.z_max) +
                        "] leaves the guide (0, " + std::to_string(guide.length) + ")");
  if (steps < 10) throw DomainError("radiation: too few integration steps");
  RadiationResult r;
  r.compatibility = compatibility_residual(f, guide.cs, k).max();
  if (r.compatibility > 1e-8)
    throw DomainError("radiation: source violates the compatibility conditions (residual " +
                      std::to_string(r.compatibility) + ")");

  const ModeLedger L = build_ledger({guide.cs}, k);
  std::vector<CylinderWave> waves = L.e_incoming();
  for (const auto& w : L.e_outgoing()) waves.push_back(w);
  const int n = static_cast<int>(waves.size());
  for (int j = 0; j < n; ++j)
    r.channels.push_back(Channel{waves[j].lambda > 0 ? 1 : 0, waves[j].family, j, std::abs(waves[j].lambda),
                                 waves[j].label});

  const QuadratureRule2D vol = guide.cs.volume_rule(guide.cs.backend() == Backend::fem ? 5 : order);
  const int np = static_cast<int>(vol.points.size());
  std::vector<std::vector<Vector8c>> phi(n, std::vector<Vector8c>(np));
  Eigen::VectorXcd norms = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < np; ++i) {
      phi[j][i] = waves[j].section.value(vol.points[i]);
      norms[j] += vol.weights[i] * phi[j][i].dot(a3(phi[j][i]));
    }
  auto project = [&](double t) {
    Eigen::VectorXcd p = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < np; ++i) {
      const Vector8c v = f.eval(vol.points[i], t).value;
      if (v.isZero(0.0)) continue;
      for (int j = 0; j < n; ++j) p[j] += vol.weights[i] * phi[j][i].dot(v);
    }
    return p;
  };

  // (F, W_j)_G by Gauss quadrature in x3.
  r.coefficients = Eigen::VectorXcd::Zero(n);
  std::vector<double> cuts{f.z_min};
  for (double b : f.breaks)
    if (b > f.z_min && b < f.z_max) cuts.push_back(b);
  cuts.push_back(f.z_max);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const Rule1D z = composite_gauss(order, 8, cuts[c], cuts[c + 1]);
    for (int iz = 0; iz < z.nodes.size(); ++iz) {
      const Eigen::VectorXcd p = project(z.nodes[iz]);
      for (int j = 0; j < n; ++j)
        r.coefficients[j] += z.weights[iz] * std::exp(-kI * waves[j].lambda * z.nodes[iz]) * p[j];
    }
  }
  r.coefficients *= 0.5 * kI;

  // Modal equations -i a' - lambda a = (F, Phi_j) / (A_3 Phi_j, Phi_j), started
  // from rest on the side the wave leaves from.
  const double z0 = f.z_min - 0.5, z1 = f.z_max + 0.5, h = (z1 - z0) / steps;
  std::vector<Eigen::VectorXcd> samples(2 * steps + 1);
  for (int i = 0; i <= 2 * steps; ++i) samples[i] = project(z0 + 0.5 * h * i);
  r.direct = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double lam = waves[j].lambda;
    auto rhs = [&](int half_index, Complex a) { return kI * (samples[half_index][j] / norms[j] + lam * a); };
    Complex a = 0.0;
    if (lam > 0) {
      for (int s = 0; s < steps; ++s) {
        const Complex k1 = rhs(2 * s, a), k2 = rhs(2 * s + 1, a + 0.5 * h * k1), k3 = rhs(2 * s + 1, a + 0.5 * h * k2),
                      k4 = rhs(2 * s + 2, a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      r.direct[j] = a * std::exp(-kI * lam * z1);
    } else {
      for (int s = steps; s > 0; --s) {
        const Complex k1 = rhs(2 * s, a), k2 = rhs(2 * s - 1, a - 0.5 * h * k1), k3 = rhs(2 * s - 1, a - 0.5 * h * k2),
                      k4 = rhs(2 * s - 2, a - h * k3);
        a -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      r.direct[j] = a * std::exp(-kI * lam * z0);
    }
  }
  return r;
}

}  // namespace wg
