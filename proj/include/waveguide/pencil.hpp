#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "waveguide/cross_section.hpp"

namespace wg {

/// Tolerance of the threshold test |k^2 - mu| < kThresholdTol * max(1, k^2).
inline constexpr double kThresholdTol = 1e-8;
/// Relative tolerance for matching eigenvalues (multiplicities, merged thresholds).
inline constexpr double kMatchTol = 1e-8;

/// Point (lambda, k) of the pencil driven by a scalar eigenpair, mu = k^2 - lambda^2.
class PencilPoint {
 public:
  /// Throws DomainError when mu(potential) differs from k^2 - lambda^2, or when
  /// lambda is not real for mu <= k^2 (not imaginary for mu > k^2).
  PencilPoint(double k, Complex lambda, std::shared_ptr<const ScalarEigenpair> potential);

  /// lambda = sign * sqrt(k^2 - mu); requires mu <= k^2.
  static PencilPoint propagating(double k, std::shared_ptr<const ScalarEigenpair> potential, int sign);
  /// lambda = +i sqrt(mu - k^2); requires mu > k^2.
  static PencilPoint evanescent(double k, std::shared_ptr<const ScalarEigenpair> potential);

  double k() const { return k_; }
  Complex lambda() const { return lambda_; }
  double mu() const { return potential_->mu(); }
  BoundaryCondition bc_origin() const { return potential_->bc(); }
  const ScalarEigenpair& potential() const { return *potential_; }
  const std::shared_ptr<const ScalarEigenpair>& potential_ptr() const { return potential_; }
  bool is_propagating() const { return lambda_.imag() == 0.0; }
  /// Same point with lambda -> -lambda.
  PencilPoint mirrored() const { return PencilPoint(k_, -lambda_, potential_); }

 private:
  double k_;
  Complex lambda_;
  std::shared_ptr<const ScalarEigenpair> potential_;
};

enum class Family { te, tm, alpha_scalar, beta_scalar, constant_special, general };
const char* to_string(Family f);

/// Value and first derivatives of an 8-component section (phi[3], alpha, psi[3], beta).
struct SectionJet {
  Vector8c value = Vector8c::Zero();
  Vector8c d1 = Vector8c::Zero();
  Vector8c d2 = Vector8c::Zero();
};

/// Section Phi = (phi, alpha, psi, beta) over a cross-section.
///
/// Sections built from a scalar potential u carry the coefficients of u in
/// (phi_3, psi_3, alpha, beta); the in-plane components follow from the
/// reconstruction formulas. General sections wrap an arbitrary jet function.
class VectorModeSection {
 public:
  using JetFn = std::function<SectionJet(const Point2&)>;

  static VectorModeSection from_potential(CrossSection domain, std::shared_ptr<const ScalarEigenpair> u,
                                          const Eigen::Vector4cd& coefficients, Complex lambda, double k,
                                          Family family);
  static VectorModeSection from_function(CrossSection domain, JetFn fn, Family family = Family::general);
  static VectorModeSection zero(CrossSection domain);

  const CrossSection& domain() const { return domain_; }
  Family family() const { return family_; }
  bool has_potential() const { return static_cast<bool>(potential_); }
  const ScalarEigenpair& potential() const { return *potential_; }
  const std::shared_ptr<const ScalarEigenpair>& potential_ptr() const { return potential_; }
  /// Coefficients of u in (phi_3, psi_3, alpha, beta).
  const Eigen::Vector4cd& coefficients() const { return coeffs_; }
  Complex lambda() const { return lambda_; }
  double k() const { return k_; }
  Complex scale() const { return scale_; }

  SectionJet jet(const Point2& p) const;
  Vector8c value(const Point2& p) const { return jet(p).value; }
  VectorModeSection scaled(Complex c) const;

  /// True when alpha = beta = 0 identically.
  bool in_maxwell_domain() const;

 private:
  VectorModeSection(CrossSection domain) : domain_(std::move(domain)) {}

  CrossSection domain_;
  Family family_ = Family::general;
  std::shared_ptr<const ScalarEigenpair> potential_;
  Eigen::Vector4cd coeffs_ = Eigen::Vector4cd::Zero();
  Complex lambda_ = 0.0;
  double k_ = 0.0;
  Complex scale_ = 1.0;
  JetFn fn_;
};

/// Section jet of c * u via the reconstruction formulas; `uj` is the jet of u.
SectionJet potential_section_jet(const Eigen::Vector4cd& c, Complex lambda, double k, const ScalarJet& uj);

/// Pointwise A(lambda, k) Phi from a section jet.
Vector8c pencil_residual(const SectionJet& s, Complex lambda, double k);

struct PencilResidual {
  std::vector<Point2> points;
  std::vector<Vector8c> values;
  double max_norm = 0.0;
};

/// A(lambda, k) applied to a section on a quadrature grid. Potential sections
/// on the fem backend use the weak form: in-plane components at triangle
/// centroids, axial and scalar components tested against hat functions and
/// divided by the lumped mass.
PencilResidual apply_pencil(const VectorModeSection& section, Complex lambda, double k, int order = 12);

/// Max over boundary samples of |phi_tau|, |psi_nu| and |beta|.
double boundary_defect(const VectorModeSection& section, int samples = 100);

/// Throws ThresholdError when k^2 is within tolerance of a dirichlet or positive neumann eigenvalue.
void check_off_threshold(const CrossSection& cs, double k);

/// Real eigenvalues of the Maxwell pencil at k, ordered by mu, each as +lambda then -lambda.
std::vector<PencilPoint> real_maxwell_spectrum(const CrossSection& cs, double k);

/// Evanescent points (lambda = +i sqrt(mu - k^2)) with k^2 < mu <= mu_cutoff.
std::vector<PencilPoint> evanescent_points(const CrossSection& cs, double k, double mu_cutoff);

struct ThresholdSource {
  int end = 0;
  BoundaryCondition bc = BoundaryCondition::neumann;
  int multiplicity = 0;
};

struct Threshold {
  double k = 0.0;
  int multiplicity = 0;
  std::vector<ThresholdSource> sources;
};

/// All thresholds k = sqrt(mu) <= k_max over the listed ends, coincidences merged.
std::vector<Threshold> thresholds(const std::vector<CrossSection>& ends, double k_max);

/// Mode of the given family at a pencil point. `family` defaults to TM for
/// dirichlet potentials and TE for neumann ones; alpha_scalar needs a neumann
/// and beta_scalar a dirichlet potential.
VectorModeSection build_mode(const CrossSection& cs, const PencilPoint& point, std::optional<Family> family = {});

struct SpecialVector {
  PencilPoint point;
  VectorModeSection section;
};

/// Eigenvectors with lambda^2 = k^2: for k != 0 the pair lambda = +-k with
/// alpha = 1/sqrt|Omega|, psi_3 = (lambda/k) alpha; for k = 0 the pair
/// (alpha constant, psi_3 constant) at lambda = 0.
std::vector<SpecialVector> special_vectors(const CrossSection& cs, double k);

struct MultiplicityReport {
  int kappa_a = 0;
  int kappa_m = 0;
  int kappa_d = 0;
  int kappa_n = 0;
};

MultiplicityReport multiplicity_report(const CrossSection& cs, double k, double lambda);

struct IdentityResiduals {
  double ort1 = 0.0;   // (grad(l) a, phi) + (a, div(conj l) phi) - (a, <phi, nu>)
  double ort2 = 0.0;   // (rot(l) psi, phi) - (psi, rot(conj l) phi) - (nu x psi, phi)
  double green = 0.0;  // Green formula on the segment Omega x (0, length)
  // Magnitudes of the lateral boundary terms of each identity.
  double boundary_ort1 = 0.0;
  double boundary_ort2 = 0.0;
  double boundary_green = 0.0;
};

/// Integration-by-parts defects for trial sections u, v at lambda. The Green
/// formula uses U = exp(i lambda t) u, V = exp(i lambda t) v.
IdentityResiduals identity_residuals(const CrossSection& cs, Complex lambda, const VectorModeSection& u,
                                     const VectorModeSection& v, double length = 1.0, int order = 16);

/// Half the smallest gap sqrt(mu - k^2) over evanescent eigenvalues of all ends.
double decay_delta(const std::vector<CrossSection>& ends, double k);

}  // namespace wg
