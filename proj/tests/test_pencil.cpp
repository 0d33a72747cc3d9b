#include <cmath>
#include <random>

#include "doctest.h"
#include "waveguide/pencil.hpp"

using namespace wg;

namespace {

std::shared_ptr<const ScalarEigenpair> rect_pair(const CrossSection& cs, BoundaryCondition bc, int m, int n) {
  for (auto& p : helmholtz_eigs(cs, bc, 400)) {
    const auto& r = std::get<ScalarEigenpair::RectMode>(p.representation());
    if (r.m == m && r.n == n) return std::make_shared<const ScalarEigenpair>(p);
  }
  return nullptr;
}

// Random quadratic polynomial section with its exact derivatives.
VectorModeSection polynomial_section(const CrossSection& cs, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix<Complex, 8, 6> c;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j) c(i, j) = Complex(n(rng), n(rng));
  return VectorModeSection::from_function(cs, [c](const Point2& p) {
    const double x = p.x(), y = p.y();
    SectionJet s;
    s.value = c.col(0) + x * c.col(1) + y * c.col(2) + x * x * c.col(3) + x * y * c.col(4) + y * y * c.col(5);
    s.d1 = c.col(1) + 2 * x * c.col(3) + y * c.col(4);
    s.d2 = c.col(2) + x * c.col(4) + 2 * y * c.col(5);
    return s;
  });
}

// Smooth non-polynomial section.
VectorModeSection smooth_section(const CrossSection& cs, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Eigen::Matrix<double, 8, 2> w;
  for (int i = 0; i < 8; ++i) w(i, 0) = u(rng), w(i, 1) = u(rng);
  return VectorModeSection::from_function(cs, [w](const Point2& p) {
    SectionJet s;
    for (int i = 0; i < 8; ++i) {
      const double e = std::exp(w(i, 0) * p.x() - w(i, 1) * p.y() * p.y());
      s.value[i] = Complex(e, std::sin(w(i, 1) * p.x()));
      s.d1[i] = Complex(w(i, 0) * e, w(i, 1) * std::cos(w(i, 1) * p.x()));
      s.d2[i] = -2.0 * w(i, 1) * p.y() * e;
    }
    return s;
  });
}

}  // namespace

TEST_CASE("TE mode on the unit square matches the closed form") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto u = rect_pair(cs, BoundaryCondition::neumann, 1, 0);
  REQUIRE(u);
  const double k = 4.0;
  const PencilPoint pt = PencilPoint::propagating(k, u, +1);
  const double lambda = std::sqrt(16 - kPi * kPi);
  CHECK(pt.lambda().real() == doctest::Approx(lambda));
  const auto mode = build_mode(cs, pt);
  CHECK(mode.family() == Family::te);
  CHECK(mode.in_maxwell_domain());
  const Point2 p(0.23, 0.61);
  const Vector8c v = mode.value(p);
  const double s = std::sqrt(2.0) * std::sin(kPi * p.x()) / kPi;
  CHECK(std::abs(v[0]) < 1e-14);
  CHECK(std::abs(v[1] - kI * k * s) < 1e-13);
  CHECK(std::abs(v[2]) == 0.0);
  CHECK(std::abs(v[4] + kI * lambda * s) < 1e-13);
  CHECK(std::abs(v[5]) < 1e-14);
  CHECK(std::abs(v[6] - std::sqrt(2.0) * std::cos(kPi * p.x())) < 1e-14);
  CHECK(apply_pencil(mode, pt.lambda(), k).max_norm < 1e-10);
  CHECK(boundary_defect(mode) < 1e-12);
}

TEST_CASE("pencil is linear and sensitive to lambda") {
  const auto cs = CrossSection::rectangle(1, 1);
  CHECK(apply_pencil(VectorModeSection::zero(cs), Complex(1.3, 0.2), 4.0).max_norm == 0.0);
  const auto u = rect_pair(cs, BoundaryCondition::neumann, 1, 0);
  const PencilPoint pt = PencilPoint::propagating(4.0, u, +1);
  const auto mode = build_mode(cs, pt);
  const double off = apply_pencil(mode, pt.lambda() + 0.1, 4.0).max_norm;
  CHECK(off > 0.1);
  CHECK(off == doctest::Approx(0.176591).epsilon(1e-5));
}

TEST_CASE("every family satisfies the pencil equation and the boundary conditions") {
  for (const auto& cs : {CrossSection::rectangle(1, 1), CrossSection::rectangle(1.3, 0.8), CrossSection::disc(1.0)}) {
    for (double k : {4.6, 7.3}) {
      for (const auto& pt : real_maxwell_spectrum(cs, k)) {
        const bool dir = pt.bc_origin() == BoundaryCondition::dirichlet;
        for (Family f : {dir ? Family::tm : Family::te, dir ? Family::beta_scalar : Family::alpha_scalar}) {
          const auto mode = build_mode(cs, pt, f);
          CAPTURE(pt.potential().label());
          CHECK(apply_pencil(mode, pt.lambda(), k).max_norm < 1e-9);
          CHECK(boundary_defect(mode) < 1e-9);
          CHECK(mode.in_maxwell_domain() == (f == Family::te || f == Family::tm));
        }
      }
      for (const auto& pt : evanescent_points(cs, k, 120)) {
        CHECK(pt.lambda().imag() > 0);
        CHECK(apply_pencil(build_mode(cs, pt), pt.lambda(), k).max_norm < 1e-9);
      }
    }
  }
}

TEST_CASE("scalar families are gradient fields") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.6;
  const auto u = rect_pair(cs, BoundaryCondition::dirichlet, 1, 1);
  const PencilPoint pt = PencilPoint::propagating(k, u, -1);
  const auto beta = build_mode(cs, pt, Family::beta_scalar);
  const Point2 p(0.3, 0.45);
  const ScalarJet j = u->jet(p);
  const Vector8c v = beta.value(p);
  // phi = (i/k) grad(lambda) u, psi = 0
  CHECK(std::abs(v[0] - kI / k * j.grad.x()) < 1e-13);
  CHECK(std::abs(v[1] - kI / k * j.grad.y()) < 1e-13);
  CHECK(std::abs(v[2] - kI / k * kI * pt.lambda() * j.value) < 1e-13);
  CHECK(v.segment<3>(4).norm() < 1e-13);
}

TEST_CASE("real Maxwell spectrum of the unit square") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto s4 = real_maxwell_spectrum(cs, 4.0);
  REQUIRE(s4.size() == 4);
  for (const auto& p : s4) {
    CHECK(std::abs(p.lambda().real()) == doctest::Approx(std::sqrt(16 - kPi * kPi)).epsilon(1e-14));
    CHECK(std::abs(p.lambda() * p.lambda() + p.mu() - 16.0) < 1e-12 * 16);
  }
  CHECK(real_maxwell_spectrum(cs, 3.0).empty());
  // Above sqrt(2) pi both D(1,1) and N(1,1) propagate next to the N pair at pi^2.
  const auto s46 = real_maxwell_spectrum(cs, 4.6);
  REQUIRE(s46.size() == 8);
  int dir = 0;
  for (const auto& p : s46)
    if (p.bc_origin() == BoundaryCondition::dirichlet) {
      ++dir;
      CHECK(std::abs(p.lambda().real()) == doctest::Approx(std::sqrt(21.16 - 2 * kPi * kPi)).epsilon(1e-12));
      CHECK(std::abs(p.lambda().real()) == doctest::Approx(1.191).epsilon(1e-3));
    }
  CHECK(dir == 2);
  CHECK_THROWS_AS(real_maxwell_spectrum(cs, kPi), ThresholdError);
  CHECK_THROWS_AS(real_maxwell_spectrum(cs, 0.0), DomainError);
}

TEST_CASE("kappa is even, symmetric and constant between thresholds") {
  const auto cs = CrossSection::rectangle(1, 0.6);
  const auto th = thresholds({cs}, 12);
  REQUIRE(th.size() > 4);
  for (std::size_t i = 0; i + 1 < th.size(); ++i) {
    std::size_t count = 0;
    for (int s = 1; s <= 5; ++s) {
      const double k = th[i].k + (th[i + 1].k - th[i].k) * s / 6.0;
      const auto spec = real_maxwell_spectrum(cs, k);
      CHECK(spec.size() % 2 == 0);
      if (s == 1) count = spec.size();
      CHECK(spec.size() == count);
      for (std::size_t j = 0; j < spec.size(); j += 2) CHECK(spec[j].lambda() == -spec[j + 1].lambda());
    }
  }
}

TEST_CASE("thresholds of the unit square") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto th = thresholds({cs}, 8);
  // Oracle: enumerate pi^2 (m^2 + n^2) directly.
  std::vector<std::pair<int, int>> expected;  // (m^2 + n^2, multiplicity)
  for (int q = 1; q * kPi * kPi <= 64; ++q) {
    int mult = 0;
    for (int m = 0; m * m <= q; ++m)
      for (int n = 0; n * n <= q; ++n)
        if (m * m + n * n == q) mult += (m > 0 && n > 0) ? 2 : 1;
    if (mult) expected.emplace_back(q, mult);
  }
  REQUIRE(th.size() == expected.size());
  for (std::size_t i = 0; i < th.size(); ++i) {
    CHECK(th[i].k == doctest::Approx(kPi * std::sqrt(double(expected[i].first))).epsilon(1e-14));
    CHECK(th[i].multiplicity == expected[i].second);
  }
  CHECK(th[0].k == doctest::Approx(kPi).epsilon(1e-15));
  REQUIRE(th[0].sources.size() == 1);
  CHECK(th[0].sources[0].bc == BoundaryCondition::neumann);
  CHECK(th[1].multiplicity == 2);  // N(1,1) and D(1,1)
  CHECK(thresholds({cs}, 3.0).empty());
}

TEST_CASE("thresholds of two ends are the merged union") {
  const auto a = CrossSection::rectangle(1, 1), b = CrossSection::rectangle(0.7, 0.4);
  const auto both = thresholds({a, b}, 15);
  const auto ta = thresholds({a}, 15), tb = thresholds({b}, 15);
  int total = 0, ends_b = 0;
  for (const auto& t : both) {
    total += t.multiplicity;
    for (const auto& s : t.sources) ends_b += s.end == 1 ? s.multiplicity : 0;
  }
  int na = 0, nb = 0;
  for (const auto& t : ta) na += t.multiplicity;
  for (const auto& t : tb) nb += t.multiplicity;
  CHECK(total == na + nb);
  CHECK(ends_b == nb);
  for (std::size_t i = 1; i < both.size(); ++i) CHECK(both[i].k > both[i - 1].k);
  CHECK(both[0].k == doctest::Approx(kPi / 1.0));
}

TEST_CASE("build_mode preconditions") {
  const auto cs = CrossSection::rectangle(1, 1);
  auto c = std::make_shared<const ScalarEigenpair>(constant_mode(cs));
  const PencilPoint at_k = PencilPoint::propagating(2.0, c, +1);
  CHECK(at_k.lambda() == Complex(2.0));
  CHECK_THROWS_AS(build_mode(cs, at_k, Family::alpha_scalar), DomainError);
  const auto d = rect_pair(cs, BoundaryCondition::dirichlet, 1, 1);
  CHECK_THROWS_AS(build_mode(cs, PencilPoint::propagating(4.6, d, 1), Family::te), DomainError);
  CHECK_THROWS_AS(PencilPoint(4.6, 1.0, d), DomainError);
}

TEST_CASE("TM mode on the unit square satisfies the boundary conditions") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto d = rect_pair(cs, BoundaryCondition::dirichlet, 1, 1);
  const auto mode = build_mode(cs, PencilPoint::propagating(4.6, d, +1));
  CHECK(mode.family() == Family::tm);
  CHECK(boundary_defect(mode, 100) < 1e-12);
}

TEST_CASE("special vectors") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto sv = special_vectors(cs, 2.0);
  REQUIRE(sv.size() == 2);
  for (const auto& s : sv) {
    const double l = s.point.lambda().real();
    CHECK(std::abs(l) == 2.0);
    const Vector8c v = s.section.value({0.3, 0.7});
    CHECK(v[3] == Complex(1.0));
    CHECK(v[6] == Complex(l / 2.0));
    CHECK(apply_pencil(s.section, s.point.lambda(), 2.0).max_norm == 0.0);
    CHECK_FALSE(s.section.in_maxwell_domain());
    CHECK(s.section.family() == Family::constant_special);
  }
  const auto s0 = special_vectors(cs, 0.0);
  REQUIRE(s0.size() == 2);
  CHECK(s0[0].point.lambda() == 0.0);
  CHECK_FALSE(s0[0].section.in_maxwell_domain());
  CHECK(s0[1].section.in_maxwell_domain());
  for (const auto& s : s0) CHECK(apply_pencil(s.section, 0.0, 0.0).max_norm == 0.0);
}

TEST_CASE("multiplicity report") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto r = multiplicity_report(cs, 4.0, std::sqrt(16 - kPi * kPi));
  CHECK(r.kappa_a == 4);
  CHECK(r.kappa_m == 2);
  CHECK(r.kappa_d == 0);
  CHECK(r.kappa_n == 2);
  const auto z = multiplicity_report(cs, 4.0, 1.0);
  CHECK(z.kappa_a + z.kappa_m + z.kappa_d + z.kappa_n == 0);
  // 5 pi^2 is a double eigenvalue of both the dirichlet and the neumann problem.
  const auto f = multiplicity_report(cs, 8.0, std::sqrt(64 - 5 * kPi * kPi));
  CHECK(f.kappa_d == 2);
  CHECK(f.kappa_n == 2);
  CHECK(f.kappa_a == 8);
}

TEST_CASE("integration by parts identities") {
  const auto cs = CrossSection::rectangle(1, 1);
  const Complex lambda(1.0, 1.0);
  const auto u = polynomial_section(cs, 1), v = polynomial_section(cs, 2);
  const auto r = identity_residuals(cs, lambda, u, v);
  CHECK(r.ort1 < 1e-10);
  CHECK(r.ort2 < 1e-10);
  CHECK(r.green < 1e-10);
  CHECK(r.boundary_green > 1e-3);

  const auto disc = CrossSection::disc(1.2);
  const auto rd = identity_residuals(disc, lambda, polynomial_section(disc, 3), polynomial_section(disc, 4));
  CHECK(rd.ort1 < 1e-10);
  CHECK(rd.ort2 < 1e-10);
  CHECK(rd.green < 1e-10);
}

TEST_CASE("boundary terms vanish for fields with the boundary conditions") {
  const auto cs = CrossSection::rectangle(1, 1);
  const double k = 4.6;
  const auto spec = real_maxwell_spectrum(cs, k);
  const auto a = build_mode(cs, spec[0]), b = build_mode(cs, spec.back());
  const auto r = identity_residuals(cs, spec[0].lambda(), a, b);
  CHECK(r.boundary_ort2 < 1e-12);
  CHECK(r.boundary_green < 1e-12);
  CHECK(r.green < 1e-10);
}

TEST_CASE("identity defects decrease under quadrature refinement") {
  const auto cs = CrossSection::rectangle(1, 1);
  const auto u = smooth_section(cs, 5), v = smooth_section(cs, 6);
  double prev = 1e300;
  for (int order : {2, 3, 4, 6}) {
    const auto r = identity_residuals(cs, Complex(0.5, 0.3), u, v, 1.0, order);
    const double d = r.ort1 + r.ort2 + r.green;
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("fem modes satisfy the weak pencil equation") {
  const auto cs = CrossSection::rectangle(1, 1, Backend::fem, 0.02);
  const double k = 4.6;
  for (const auto& pt : real_maxwell_spectrum(cs, k)) {
    const auto mode = build_mode(cs, pt);
    CHECK(apply_pencil(mode, pt.lambda(), k).max_norm < 1e-5);
    const auto scalar = build_mode(cs, pt, pt.bc_origin() == BoundaryCondition::dirichlet ? Family::beta_scalar
                                                                                          : Family::alpha_scalar);
    CHECK(apply_pencil(scalar, pt.lambda(), k).max_norm < 1e-5);
  }
}

TEST_CASE("decay rate from the spectral gap") {
  const auto cs = CrossSection::rectangle(1, 1);
  // At k = 4 the first evanescent eigenvalue is 2 pi^2.
  CHECK(decay_delta({cs}, 4.0) == doctest::Approx(0.5 * std::sqrt(2 * kPi * kPi - 16)));
  CHECK(decay_delta({cs, CrossSection::rectangle(1.5, 1)}, 4.0) < decay_delta({cs}, 4.0));
}
