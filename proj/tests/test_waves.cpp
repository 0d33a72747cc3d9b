#include <cmath>

#include "doctest.h"
#include "waveguide/waves.hpp"

using namespace wg;

namespace {

std::shared_ptr<const ScalarEigenpair> rect_pair(const CrossSection& cs, BoundaryCondition bc, int m, int n) {
  for (auto& p : helmholtz_eigs(cs, bc, 400)) {
    const auto& r = std::get<ScalarEigenpair::RectMode>(p.representation());
    if (r.m == m && r.n == n) return std::make_shared<const ScalarEigenpair>(p);
  }
  return nullptr;
}

std::vector<CylinderWave> all_waves(const ModeLedger& L) {
  std::vector<CylinderWave> w;
  for (const auto& list : {L.e_incoming(), L.e_outgoing(), L.g_incoming(), L.g_outgoing()})
    w.insert(w.end(), list.begin(), list.end());
  return w;
}

}  // namespace

TEST_CASE("TE and TM flux closed forms") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.6;
  for (auto [bc, m, n] : {std::tuple{BoundaryCondition::neumann, 1, 0}, std::tuple{BoundaryCondition::dirichlet, 1, 1},
                          std::tuple{BoundaryCondition::neumann, 1, 1}}) {
    const auto u = rect_pair(cs, bc, m, n);
    const PencilPoint pt = PencilPoint::propagating(k, u, +1);
    const double lambda = pt.lambda().real(), mu = pt.mu();
    // Symbolic: int |grad u|^2 = mu for the normalized potential.
    const double grad_sq = kPi * kPi * (m * m + n * n);
    CHECK(grad_sq == doctest::Approx(mu));
    const auto mode = build_mode(cs, pt);
    const double f = axial_flux(mode, pt.lambda(), k);
    CHECK(f == doctest::Approx(k * lambda / (mu * mu) * grad_sq).epsilon(1e-12));
    CHECK(f > 0);
    const auto back = build_mode(cs, pt.mirrored());
    CHECK(axial_flux(back, -lambda, k) == doctest::Approx(-f).epsilon(1e-12));
  }
}

TEST_CASE("scalar and special flux") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.6;
  const auto u = rect_pair(cs, BoundaryCondition::dirichlet, 1, 1);
  const PencilPoint pt = PencilPoint::propagating(k, u, +1);
  const auto beta = build_mode(cs, pt, Family::beta_scalar);
  CHECK(axial_flux(beta, pt.lambda(), k) == doctest::Approx(pt.lambda().real() / k).epsilon(1e-12));
  for (const auto& sv : special_vectors(cs, k))
    CHECK(axial_flux(sv.section, sv.point.lambda(), k) == doctest::Approx(sv.point.lambda().real() / k).epsilon(1e-12));
  CHECK_THROWS_AS(axial_flux(beta, Complex(0, 1), k), DomainError);
}

TEST_CASE("flux is quadratic under scaling and normalization is idempotent") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto u = rect_pair(cs, BoundaryCondition::neumann, 0, 1);
  const PencilPoint pt = PencilPoint::propagating(4.0, u, +1);
  const auto mode = build_mode(cs, pt);
  const Complex c(2.0, -3.0);
  CHECK(axial_flux(mode.scaled(c), pt.lambda(), 4.0) ==
        doctest::Approx(std::norm(c) * axial_flux(mode, pt.lambda(), 4.0)).epsilon(1e-12));
  const auto w1 = normalize_and_orient(mode, 0);
  const auto w7 = normalize_and_orient(mode.scaled(7.0), 0);
  const auto wi = normalize_and_orient(mode.scaled(Complex(0, -7.0)), 0);
  for (const Point2& p : {Point2(0.2, 0.3), Point2(0.7, 0.9)}) {
    CHECK((w1.section.value(p) - w7.section.value(p)).norm() < 1e-13);
    CHECK((w1.section.value(p) - wi.section.value(p)).norm() < 1e-13);
  }
  CHECK(w1.direction == Direction::outgoing);
  CHECK(axial_flux(w1.section, w1.lambda, 4.0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto in = normalize_and_orient(build_mode(cs, pt.mirrored()), 0);
  CHECK(in.direction == Direction::incoming);
  CHECK(in.raw_flux < 0);
  CHECK(axial_flux(in.section, in.lambda, 4.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("ledger counts on the unit square") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto L4 = build_ledger({cs}, 4.0);
  CHECK(L4.upsilon == 2);
  CHECK(L4.e_incoming().size() == 2);
  CHECK(L4.e_outgoing().size() == 2);
  CHECK(L4.g_incoming().size() == 3);
  CHECK(L4.g_outgoing().size() == 3);
  CHECK(L4.t_total == 5);
  CHECK(L4.threshold_distance == doctest::Approx(std::sqrt(2.0) * kPi - 4.0));
  CHECK(L4.ends[0].evanescent.front().lambda().imag() == doctest::Approx(std::sqrt(2 * kPi * kPi - 16)));

  const auto L3 = build_ledger({cs}, 3.0);
  CHECK(L3.upsilon == 0);
  CHECK(L3.e_incoming().empty());
  CHECK(L3.g_incoming().size() == 1);
  CHECK(L3.g_outgoing().size() == 1);
  CHECK(L3.t_total == 1);

  const auto L2 = build_ledger({cs, cs}, 4.0);
  CHECK(L2.upsilon == 4);
  CHECK(L2.t_total == 10);
  CHECK(L2.g_outgoing().size() == 6);
  CHECK_THROWS_AS(build_ledger({cs}, kPi), ThresholdError);
}

TEST_CASE("normalized waves are flux-orthonormal") {
  for (const auto& cs : {CrossSection::rectangle(1, 1), CrossSection::rectangle(1.2, 0.7), CrossSection::disc(1.0)}) {
    for (double k : {4.6, 6.1}) {
      const auto w = all_waves(build_ledger({cs}, k));
      for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK((w[i].direction == Direction::outgoing) == (w[i].lambda > 0));
        for (std::size_t j = 0; j < w.size(); ++j) {
          const Complex f = flux_pairing(w[i].section, w[j].section);
          const double expected = i == j ? (w[i].direction == Direction::outgoing ? 1.0 : -1.0) : 0.0;
          CAPTURE(w[i].label);
          CAPTURE(w[j].label);
          CHECK(std::abs(f - expected) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("fem waves are flux-orthonormal") {
  const auto cs = CrossSection::rectangle(1, 1, Backend::fem, 0.05);
  const auto w = all_waves(build_ledger({cs}, 4.6));
  REQUIRE(w.size() == 2 * (8 / 2 + 8 / 2 + 1));
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double expected = i == j ? (w[i].direction == Direction::outgoing ? 1.0 : -1.0) : 0.0;
      CHECK(std::abs(flux_pairing(w[i].section, w[j].section) - expected) < 1e-9);
    }
}

TEST_CASE("cutoff extension") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto L = build_ledger({cs}, 4.0);
  const auto wave = L.e_outgoing().front();
  const auto ext = extend_to_domain(wave, {3.0, 4.0}, 0.0);
  const Point2 y(0.3, 0.4);
  CHECK(ext.evaluate(0, y, 2.9).norm() == 0.0);
  CHECK(ext.evaluate(1, y, 5.0).norm() == 0.0);
  const Vector8c far = ext.evaluate(0, y, 5.5);
  CHECK((far - std::exp(kI * wave.lambda * 5.5) * wave.section.value(y)).norm() == 0.0);
  CHECK_THROWS_AS(extend_to_domain(wave, {0.5, 1.5}, 1.0), GeometryError);
  CHECK_THROWS_AS(extend_to_domain(wave, {1.0, 3.0}, 0.0), DomainError);

  const CutoffProfile p{3.0, 4.0};
  for (double t = 2.95; t < 4.05; t += 0.05) {
    const double h = 1e-6;
    const double fd = (cutoff_chi(p, t + h) - cutoff_chi(p, t - h)) / (2 * h);
    CHECK(std::abs(fd - cutoff_chi_derivative(p, t)) < 1e-6);
  }
  CHECK(cutoff_chi(p, 3.5) == doctest::Approx(0.5));
}
