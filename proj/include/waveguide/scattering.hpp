#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "waveguide/waves.hpp"

namespace wg {

/// Straight guide cs x (0, length); end 1 is the left (x3 < 0) side, end 2 the right.
struct StraightGuide {
  CrossSection cs;
  double length = 1.0;
};

/// Two-dimensional step: the left guide occupies (offset, offset + a1) for
/// x3 < 0 and the right guide (0, a2) for x3 > 0, with a2 >= a1. For the
/// Maxwell reduction the guides are the rectangles a1 x b and a2 x b and the
/// fields do not depend on the second transverse coordinate.
struct SeparableStep {
  double a1 = 1.0;
  double a2 = 2.0;
  double offset = 0.0;
  double b = 0.5;
};

using JunctionGeometry = std::variant<StraightGuide, SeparableStep>;

/// Throws GeometryError unless 0 < a1 <= a2, 0 <= offset, offset + a1 <= a2, b > 0.
void validate(const SeparableStep& step);

/// One port channel of a scattering matrix.
struct Channel {
  int end = 0;  // 0 = left / -inf, 1 = right / +inf
  Family family = Family::general;
  int mode = 0;
  double lambda = 0.0;  // axial wavenumber magnitude
  std::string label;
};

/// Rows are indexed by incident channels, columns by outgoing channels:
/// a unit-flux wave incident in row j produces outgoing amplitude entries(j, q).
struct ScatteringMatrix {
  double k = 0.0;
  std::string kind;  // "s", "t", "upsilon", "sigma"
  Eigen::MatrixXcd entries;
  std::vector<Channel> rows;
  std::vector<Channel> cols;
  double unitarity_residual = 0.0;  // max |S^* S - I|
  int truncation = 0;               // modes kept on the wide side (0 when exact)
  double rcond = 1.0;               // reciprocal condition estimate of the matching system

  int size() const { return static_cast<int>(entries.rows()); }
};

double unitarity_residual(const Eigen::MatrixXcd& s);

enum class FamilyFilter { maxwell, scalar };

/// Exact s of a straight guide: no reflection, transmission exp(i lambda_j L).
ScatteringMatrix straight_smatrix(const StraightGuide& guide, double k, FamilyFilter filter = FamilyFilter::maxwell);
/// Its incoming-basis companion t = conj(s).
ScatteringMatrix straight_tmatrix(const StraightGuide& guide, double k, FamilyFilter filter = FamilyFilter::maxwell);

/// Scalar Helmholtz step by mode matching with M modes on the wide side and
/// ceil(M a1 / a2) on the narrow side.
ScatteringMatrix step_smatrix(const SeparableStep& step, double k, BoundaryCondition bc, int M);
/// t for the same problem: outgoing amplitudes prescribed, incoming solved for.
ScatteringMatrix step_tmatrix(const SeparableStep& step, double k, BoundaryCondition bc, int M);

/// Maxwell block for the step: TE_m0 waves, matched through the dirichlet
/// problem for the transverse electric component. Requires k < pi / b.
ScatteringMatrix maxwell_step_smatrix(const SeparableStep& step, double k, int M);
ScatteringMatrix maxwell_step_tmatrix(const SeparableStep& step, double k, int M);
/// Scalar (augmented) block for the step: the neumann scalar step, whose
/// zeroth mode is the lambda = +-k channel.
ScatteringMatrix scalar_step_smatrix(const SeparableStep& step, double k, int M);

/// Block-diagonal sigma = diag(s, upsilon); throws DomainError on k mismatch.
ScatteringMatrix assemble_sigma(const ScatteringMatrix& s, const ScatteringMatrix& upsilon);

/// Full modal solution of one step problem.
struct StepSolution {
  double k = 0.0;
  SeparableStep step;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  Eigen::VectorXcd lambda_left, lambda_right;  // +sqrt(k^2 - mu) or +i sqrt(mu - k^2)
  Eigen::VectorXcd a, b;                       // left: a exp(i l x3) + b exp(-i l x3)
  Eigen::VectorXcd c, d;                       // right: c exp(i l x3) + d exp(-i l x3)
  int propagating_left = 0, propagating_right = 0;

  Complex field(double y, double x3) const;
  /// Field minus its propagating part.
  Complex remainder(double y, double x3) const;
};

/// Solves for a unit-flux wave incident in the given channel (ordered as the
/// rows of step_smatrix).
StepSolution solve_step(const SeparableStep& step, double k, BoundaryCondition bc, int M, int incident_channel);

/// Half the smallest evanescent gap over both guides of the step.
double step_decay_delta(const SeparableStep& step, double k, BoundaryCondition bc);

struct DecayFit {
  double rate = 0.0;  // least-squares slope of log(max-norm) against t
  bool pass = false;  // rate <= -delta + tolerance
};

/// `t` are axial stations along an end (distance from the junction) and
/// `samples[i]` the field values at station i. Needs at least 10 stations.
DecayFit decay_diagnostic(const std::vector<double>& t, const std::vector<std::vector<Complex>>& samples, double delta,
                          double tolerance = 1e-3);

/// Value and derivatives of a source F = (f1, h1, f2, h2) at (y, x3).
struct SourceJet {
  Vector8c value = Vector8c::Zero();
  Vector8c d1 = Vector8c::Zero();
  Vector8c d2 = Vector8c::Zero();
  Vector8c d3 = Vector8c::Zero();
};

struct SourceField {
  std::function<SourceJet(const Point2&, double)> eval;
  double z_min = 0.0;
  double z_max = 1.0;
  std::vector<double> breaks;  // interior points where the profile is not smooth
};

/// Max-norm residuals of div f1 - i k h2 = 0, div f2 + i k h1 = 0 (volume)
/// and <f2, nu> = 0 (lateral boundary) over the support.
struct CompatibilityResidual {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  double max() const { return std::max({r1, r2, r3}); }
};

CompatibilityResidual compatibility_residual(const SourceField& f, const CrossSection& cs, double k, int order = 12);

/// Axial profile g with derivative.
struct AxialProfile {
  std::function<Complex(double)> g;
  std::function<Complex(double)> dg;
  double z_min = 0.0;
  double z_max = 1.0;
};

/// g(t) = sin^2(pi (t - z0) / (z1 - z0)) on [z0, z1], zero elsewhere.
AxialProfile sin2_bump(double z0, double z1);

/// F = g(x3) A_3 Phi for a mode section Phi; Maxwell-compatible for TE/TM sections.
SourceField modal_source(const VectorModeSection& section, const AxialProfile& profile);
SourceField operator+(const SourceField& a, const SourceField& b);

struct RadiationResult {
  std::vector<Channel> channels;  // outgoing Maxwell channels: end 0 (lambda < 0), end 1 (lambda > 0)
  Eigen::VectorXcd coefficients;  // (i/2) (F, W_j)_G for unit-flux waves
  Eigen::VectorXcd direct;        // from integrating the modal equations
  double compatibility = 0.0;
};

/// Radiation coefficients of the forced problem in a straight guide.
/// Throws DomainError when the source is incompatible (residual > 1e-8) and
/// GeometryError when its support leaves (0, L).
RadiationResult radiation_coefficients(const SourceField& f, const StraightGuide& guide, double k, int order = 16,
                                       int steps = 4000);

}  // namespace wg
