#pragma once

#include <string>
#include <vector>

#include "waveguide/pencil.hpp"

namespace wg {

enum class Direction { incoming, outgoing };
const char* to_string(Direction d);

/// Axial current pairing F(U, V) = 1/2 (A_3 U, V)_Omega, where A_3 maps
/// (phi, alpha, psi, beta) to (psi_2, -psi_1, -beta, psi_3, -phi_2, phi_1, alpha, -phi_3).
/// F(U, U) is Re int (phi x conj psi)_3 for Maxwell sections.
Complex flux_pairing(const VectorModeSection& u, const VectorModeSection& v, int order = 24);

/// Signed axial flux of a propagating section; throws DomainError for complex lambda.
double axial_flux(const VectorModeSection& section, Complex lambda, double k, int order = 24);

/// Axial support of the cutoff chi: 0 below t_inner, 1 above t_outer = t_inner + 1.
struct CutoffProfile {
  double t_inner = 1.0;
  double t_outer = 2.0;
};

/// Normalized propagating cylinder wave exp(i lambda t) Phi(y) on one end.
struct CylinderWave {
  int end_index = 0;
  VectorModeSection section;
  double lambda = 0.0;
  double k = 0.0;
  Direction direction = Direction::outgoing;
  double raw_flux = 0.0;  // before normalization
  Family family = Family::general;
  CutoffProfile cutoff;
  std::string label;
};

/// Scales to unit |flux|, orients by the flux sign (positive = outgoing) and
/// fixes the phase: the first nonzero potential coefficient times the sign of
/// u at the reference point (centroid, or lowest interior node for fem) is
/// made real positive. Throws ThresholdError when |flux| < 1e-12.
CylinderWave normalize_and_orient(const VectorModeSection& raw, int end_index, CutoffProfile cutoff = {});

struct EndLedger {
  std::vector<CylinderWave> e_incoming, e_outgoing;  // Maxwell waves
  std::vector<CylinderWave> g_incoming, g_outgoing;  // scalar waves and the lambda = +-k pair
  std::vector<PencilPoint> evanescent;
  int upsilon = 0;
};

/// Waves of all ends at one frequency. Within each end and list, waves are
/// ordered by eigenvalue; global indices concatenate the ends in order.
struct ModeLedger {
  double k = 0.0;
  std::vector<EndLedger> ends;
  int upsilon = 0;
  int t_total = 0;
  double threshold_distance = 0.0;

  std::vector<CylinderWave> e_incoming() const;
  std::vector<CylinderWave> e_outgoing() const;
  std::vector<CylinderWave> g_incoming() const;
  std::vector<CylinderWave> g_outgoing() const;
};

/// Builds the ledger at k (k != 0, off thresholds). Evanescent points are
/// listed for mu <= evanescent_cutoff (default 2 k^2 + 50).
ModeLedger build_ledger(const std::vector<CrossSection>& ends, double k, double evanescent_cutoff = 0.0);

/// Quintic smoothstep 6x^5 - 15x^4 + 10x^3 on [t_inner, t_outer] and its derivative.
double cutoff_chi(const CutoffProfile& p, double t);
double cutoff_chi_derivative(const CutoffProfile& p, double t);

/// chi(t) exp(i lambda t) Phi(y) on the wave's end, zero elsewhere.
class ExtendedWave {
 public:
  /// `cylinder_start` is the axial coordinate from which the end is a straight
  /// cylinder; the support [t_inner, inf) must lie inside it (GeometryError).
  ExtendedWave(CylinderWave wave, double cylinder_start = 0.0);
  const CylinderWave& wave() const { return wave_; }
  Vector8c evaluate(int end_index, const Point2& y, double t) const;

 private:
  CylinderWave wave_;
};

ExtendedWave extend_to_domain(const CylinderWave& wave, CutoffProfile cutoff, double cylinder_start = 0.0);

}  // namespace wg
