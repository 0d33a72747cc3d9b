#include <cmath>

#include "doctest.h"
#include "waveguide/quadrature.hpp"
#include "waveguide/scattering.hpp"

using namespace wg;

namespace {

const SeparableStep kStep{1.0, 2.0, 0.5, 0.5};

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// int_0^w e^{i beta x} dx
Complex phase_integral(double beta, double w) {
  if (std::abs(beta) < 1e-12) return w;
  return (std::exp(kI * beta * w) - 1.0) / (kI * beta);
}

// Fourier transform int g(s) e^{-i lambda s} ds of sin^2(pi (s - z0) / w) on [z0, z0 + w].
Complex bump_transform(double lambda, double z0, double w) {
  const double om = 2 * kPi / w;
  const Complex inner = 0.5 * phase_integral(-lambda, w) -
                        0.25 * (phase_integral(om - lambda, w) + phase_integral(-om - lambda, w));
  return std::exp(-kI * lambda * z0) * inner;
}

}  // namespace

TEST_CASE("straight guide s is pure transmission") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.0, L = 1.7;
  const auto s = straight_smatrix({cs, L}, k);
  REQUIRE(s.size() == 4);
  std::vector<double> expected;
  for (double mu : {kPi * kPi, kPi * kPi}) expected.push_back(std::sqrt(k * k - mu));
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(s.entries(j, 2 + j) - std::exp(kI * expected[j] * L)) < 1e-12);
    CHECK(std::abs(s.entries(2 + j, j) - std::exp(kI * expected[j] * L)) < 1e-12);
    CHECK(std::abs(s.entries(j, j)) == 0.0);
  }
  CHECK(s.unitarity_residual < 1e-12);
  const auto t = straight_tmatrix({cs, L}, k);
  CHECK(max_abs(t.entries * s.entries - Eigen::MatrixXcd::Identity(4, 4)) < 1e-12);

  const auto g = straight_smatrix({cs, L}, k, FamilyFilter::scalar);
  CHECK(g.size() == 2 * 3);
  bool has_special = false;
  for (const auto& c : g.rows)
    if (c.family == Family::constant_special) {
      has_special = true;
      CHECK(c.lambda == doctest::Approx(k));
    }
  CHECK(has_special);
  CHECK_THROWS_AS(straight_smatrix({cs, L}, kPi), ThresholdError);
}

TEST_CASE("step matching equations hold under independent quadrature") {
  for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    const int M = 30;
    const auto sol = solve_step(kStep, 4.5, bc, M, 0);
    const Rule1D wide = composite_gauss(10, 40, 0.0, kStep.a2);
    const Rule1D ap = composite_gauss(10, 20, kStep.offset, kStep.offset + kStep.a1);
    const double eps = 1e-13;
    for (int m = 0; m < 5; ++m) {
      const int idx = bc == BoundaryCondition::dirichlet ? m + 1 : m;
      auto um = [&](double y) {
        const double nrm = std::sqrt((idx == 0 ? 1.0 : 2.0) / kStep.a2);
        return nrm * (bc == BoundaryCondition::dirichlet ? std::sin(idx * kPi * y / kStep.a2)
                                                          : std::cos(idx * kPi * y / kStep.a2));
      };
      if (bc == BoundaryCondition::dirichlet) {
        // right trace projected on right modes equals the left trace on the aperture
        Complex lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < wide.nodes.size(); ++i) lhs += wide.weights[i] * sol.field(wide.nodes[i], eps) * um(wide.nodes[i]);
        for (int i = 0; i < ap.nodes.size(); ++i) rhs += ap.weights[i] * sol.field(ap.nodes[i], -eps) * um(ap.nodes[i]);
        CHECK(std::abs(lhs - rhs) < 1e-9);
      } else {
        // same for the axial derivative, by central differences across the junction
        const double h = 1e-5;
        Complex lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < wide.nodes.size(); ++i)
          lhs += wide.weights[i] * (sol.field(wide.nodes[i], 2 * h) - sol.field(wide.nodes[i], h)) / h * um(wide.nodes[i]);
        for (int i = 0; i < ap.nodes.size(); ++i)
          rhs += ap.weights[i] * (sol.field(ap.nodes[i], -h) - sol.field(ap.nodes[i], -2 * h)) / h * um(ap.nodes[i]);
        CHECK(std::abs(lhs - rhs) < 1e-3);
      }
    }
  }
}

TEST_CASE("step s is unitary, reciprocal and inverted by t") {
  for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    const auto s = step_smatrix(kStep, 4.5, bc, 40);
    const auto t = step_tmatrix(kStep, 4.5, bc, 40);
    CHECK(s.size() == (bc == BoundaryCondition::dirichlet ? 3 : 5));
    CHECK(s.unitarity_residual < 1e-10);
    CHECK(max_abs(s.entries - s.entries.transpose()) < 1e-3);
    CHECK(max_abs(t.entries * s.entries - Eigen::MatrixXcd::Identity(s.size(), s.size())) < 1e-10);
    CHECK(max_abs(t.entries - s.entries.conjugate()) < 1e-10);
    CHECK(s.rcond > 0.0);
    for (int j = 0; j < s.size(); ++j) CHECK(s.entries.row(j).squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("step truncation convergence") {
  const double ref = std::abs(step_smatrix(kStep, 4.5, BoundaryCondition::dirichlet, 200).entries(0, 0));
  // Frozen from M = 200.
  CHECK(ref == doctest::Approx(0.0924274987).epsilon(1e-8));
  double prev_diff = 1e300, prev_res = 0.0;
  bool first = true;
  for (int M : {10, 20, 40, 80}) {
    const auto s = step_smatrix(kStep, 4.5, BoundaryCondition::dirichlet, M);
    CHECK(s.truncation == M);
    const double diff = std::abs(std::abs(s.entries(0, 0)) - ref);
    CHECK(diff <= prev_diff * 1.05);
    if (!first) CHECK(s.unitarity_residual <= std::max(1.1 * prev_res, 1e-12));
    prev_diff = diff;
    prev_res = s.unitarity_residual;
    first = false;
  }
  CHECK(std::abs(std::abs(step_smatrix(kStep, 4.5, BoundaryCondition::dirichlet, 40).entries(0, 0)) - ref) < 1e-2);
}

TEST_CASE("degenerate step is a straight junction") {
  const SeparableStep flat{1.0, 1.0, 0.0, 0.5};
  const auto s = step_smatrix(flat, 4.5, BoundaryCondition::dirichlet, 20);
  REQUIRE(s.size() == 2);
  CHECK(max_abs(s.entries - (Eigen::MatrixXcd(2, 2) << 0, 1, 1, 0).finished()) < 1e-12);
}

TEST_CASE("maxwell step dimensions agree with the ledger") {
  const double k = 4.5;
  const auto s = maxwell_step_smatrix(kStep, k, 40);
  const auto u = scalar_step_smatrix(kStep, k, 40);
  const auto sigma = assemble_sigma(s, u);
  const auto L = build_ledger({CrossSection::rectangle(kStep.a1, kStep.b), CrossSection::rectangle(kStep.a2, kStep.b)}, k);
  CHECK(s.size() == L.upsilon);
  CHECK(u.size() == L.upsilon + 2);
  CHECK(sigma.size() == L.t_total);
  for (const auto& c : s.rows) CHECK(c.family == Family::te);
  CHECK(sigma.unitarity_residual < 1e-10);
  const auto t = maxwell_step_tmatrix(kStep, k, 40);
  CHECK(max_abs(t.entries * s.entries - Eigen::MatrixXcd::Identity(s.size(), s.size())) < 1e-10);
  CHECK_THROWS_AS(maxwell_step_smatrix(kStep, 6.5, 40), DomainError);
  CHECK_THROWS_AS(assemble_sigma(s, scalar_step_smatrix(kStep, 4.4, 40)), DomainError);
  CHECK_THROWS_AS(step_smatrix(kStep, kPi, BoundaryCondition::dirichlet, 40), ThresholdError);
  CHECK_THROWS_AS(step_smatrix(kStep, 4.5, BoundaryCondition::dirichlet, 2), DomainError);
  CHECK_THROWS_AS(step_smatrix({2.0, 1.0, 0.0, 0.5}, 4.5, BoundaryCondition::dirichlet, 40), GeometryError);
  CHECK_THROWS_AS(step_smatrix({1.0, 2.0, 1.5, 0.5}, 4.5, BoundaryCondition::dirichlet, 40), GeometryError);
}

TEST_CASE("step remainder decays at the gap rate") {
  const double k = 4.5;
  const auto sol = solve_step(kStep, k, BoundaryCondition::dirichlet, 60, 0);
  const double delta = step_decay_delta(kStep, k, BoundaryCondition::dirichlet);
  CHECK(delta == doctest::Approx(0.5 * std::sqrt(std::pow(3 * kPi / 2, 2) - k * k)));
  for (int side : {-1, 1}) {
    std::vector<double> t;
    std::vector<std::vector<Complex>> samples;
    for (int i = 0; i < 12; ++i) {
      const double x = 0.5 + 0.25 * i;
      t.push_back(x);
      std::vector<Complex> row;
      for (int j = 1; j < 80; ++j) row.push_back(sol.remainder(kStep.a2 * j / 80.0, side * x));
      samples.push_back(row);
    }
    const auto fit = decay_diagnostic(t, samples, delta);
    CAPTURE(fit.rate);
    CHECK(fit.pass);
    CHECK(fit.rate <= -delta);
  }
  std::vector<double> t(10);
  std::vector<std::vector<Complex>> flat(10, std::vector<Complex>{1.0});
  for (int i = 0; i < 10; ++i) t[i] = i;
  CHECK_FALSE(decay_diagnostic(t, flat, 0.5).pass);
  t.pop_back();
  flat.pop_back();
  CHECK_THROWS_AS(decay_diagnostic(t, flat, 0.5), DomainError);
}

TEST_CASE("radiation coefficients of modal sources") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.0;
  const StraightGuide guide{cs, 3.0};
  const auto L = build_ledger({cs}, k);
  const auto te = L.e_outgoing()[0], back = L.e_incoming()[1];
  const double z0 = 0.8, w = 1.3;
  const auto f = modal_source(te.section, sin2_bump(z0, z0 + w)) + modal_source(back.section, sin2_bump(1.0, 2.0));
  const auto r = radiation_coefficients(f, guide, k);
  CHECK(r.compatibility < 1e-10);
  REQUIRE(r.coefficients.size() == 4);
  for (int j = 0; j < 4; ++j) {
    Complex expected = 0.0;
    if (r.channels[j].label == te.label) expected = kI * bump_transform(te.lambda, z0, w);
    if (r.channels[j].label == back.label) expected = -kI * bump_transform(back.lambda, 1.0, 1.0);
    CAPTURE(r.channels[j].label);
    CHECK(std::abs(r.coefficients[j] - expected) < 1e-10);
    CHECK(std::abs(r.direct[j] - r.coefficients[j]) < 1e-6);
    CHECK(r.channels[j].end == (r.channels[j].label.back() == '+' ? 1 : 0));
  }

  const auto ev = build_mode(cs, L.ends[0].evanescent.front());
  const auto r0 = radiation_coefficients(modal_source(ev, sin2_bump(0.5, 2.5)), guide, k);
  CHECK(max_abs(r0.coefficients) < 1e-10);
  CHECK(max_abs(r0.direct) < 1e-6);

  CHECK_THROWS_AS(radiation_coefficients(modal_source(te.section, sin2_bump(2.0, 3.5)), guide, k), GeometryError);

  SourceField bad;
  bad.z_min = 1.0;
  bad.z_max = 2.0;
  bad.eval = [](const Point2&, double t) {
    SourceJet j;
    j.value[4] = std::sin(kPi * (t - 1.0));
    j.d3[4] = kPi * std::cos(kPi * (t - 1.0));
    return j;
  };
  CHECK(compatibility_residual(bad, cs, k).r3 > 0.5);
  CHECK_THROWS_AS(radiation_coefficients(bad, guide, k), DomainError);
}

TEST_CASE("straight guide closed-form phases, L = 0 and sigma") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double lam = std::sqrt(16.0 - kPi * kPi);
  const auto s = straight_smatrix({cs, 2.0}, 4.0);
  CHECK(std::abs(s.entries(0, 2) - std::exp(2.0 * kI * lam)) < 1e-12);
  CHECK(max_abs(s.entries.topLeftCorner(2, 2)) == 0.0);
  const auto s0 = straight_smatrix({cs, 0.0}, 4.0);
  Eigen::MatrixXcd swap = Eigen::MatrixXcd::Zero(4, 4);
  swap.topRightCorner(2, 2).setIdentity();
  swap.bottomLeftCorner(2, 2).setIdentity();
  CHECK(max_abs(s0.entries - swap) < 1e-15);
  const auto sigma = assemble_sigma(s, straight_smatrix({cs, 2.0}, 4.0, FamilyFilter::scalar));
  CHECK(sigma.size() == build_ledger({cs, cs}, 4.0).t_total);
  CHECK(sigma.unitarity_residual < 1e-12);
  CHECK(max_abs(sigma.entries.topRightCorner(4, 6)) == 0.0);
}

TEST_CASE("step below the first threshold is empty") {
  const auto s = step_smatrix(kStep, 1.0, BoundaryCondition::dirichlet, 20);
  CHECK(s.size() == 0);
  CHECK(s.unitarity_residual == 0.0);
  CHECK(step_smatrix(kStep, 1.0, BoundaryCondition::neumann, 20).size() == 2);
}

TEST_CASE("decay fit of an exact evanescent mode") {
  const double mu = 4 * kPi * kPi, k = 4.0, rate = std::sqrt(mu - k * k);
  std::vector<double> t;
  std::vector<std::vector<Complex>> samples;
  for (int i = 0; i < 12; ++i) {
    t.push_back(0.2 * i);
    std::vector<Complex> row;
    for (int j = 1; j < 20; ++j) row.push_back(std::exp(-rate * t.back()) * std::sin(2 * kPi * j / 20.0));
    samples.push_back(row);
  }
  const auto fit = decay_diagnostic(t, samples, 0.5 * rate);
  CHECK(std::abs(fit.rate + rate) < 1e-4);
  CHECK(fit.pass);
}

TEST_CASE("compatibility residuals") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.0;
  SourceField zero;
  zero.eval = [](const Point2&, double) { return SourceJet{}; };
  const auto r0 = compatibility_residual(zero, cs, k);
  CHECK(r0.max() == 0.0);

  // f1 = grad g with g = sin(pi y1) sin(pi y2) sin^2(pi t); div f1 = Laplace g.
  SourceField grad;
  grad.eval = [](const Point2& y, double t) {
    const double s1 = std::sin(kPi * y[0]), c1 = std::cos(kPi * y[0]);
    const double s2 = std::sin(kPi * y[1]), c2 = std::cos(kPi * y[1]);
    const double b = std::pow(std::sin(kPi * t), 2), db = kPi * std::sin(2 * kPi * t);
    const double ddb = 2 * kPi * kPi * std::cos(2 * kPi * t);
    SourceJet j;
    j.value << kPi * c1 * s2 * b, 0.0, s1 * s2 * db, 0.0, 0.0, 0.0, 0.0, 0.0;
    j.value[1] = kPi * s1 * c2 * b;
    j.d1[0] = -kPi * kPi * s1 * s2 * b;
    j.d2[1] = -kPi * kPi * s1 * s2 * b;
    j.d3[2] = s1 * s2 * ddb;
    return j;
  };
  const auto r = compatibility_residual(grad, cs, k);
  double sup = 0.0;
  for (double t = 0.0; t <= 1.0; t += 1e-4)
    sup = std::max(sup, std::abs(-2 * kPi * kPi * std::pow(std::sin(kPi * t), 2) + 2 * kPi * kPi * std::cos(2 * kPi * t)));
  CHECK(r.r1 > 0.9 * sup);
  CHECK(r.r1 <= sup * (1 + 1e-12));
  CHECK(r.r2 == 0.0);
  CHECK(r.r3 == 0.0);
}
