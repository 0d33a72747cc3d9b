#include "waveguide/bessel.hpp"

#include <cmath>
#include <functional>

namespace wg::bessel {

double j(int m, double x) { return std::cyl_bessel_j(static_cast<double>(m), x); }

double jp(int m, double x) {
  if (m == 0) return -j(1, x);
  return 0.5 * (j(m - 1, x) - j(m + 1, x));
}

double jpp(int m, double x) {
  if (x == 0.0) {
    // Limits from the series J_m(x) ~ (x/2)^m / m!.
    if (m == 0) return -0.5;
    if (m == 2) return 0.25;
    return 0.0;
  }
  return -jp(m, x) / x - (1.0 - static_cast<double>(m * m) / (x * x)) * j(m, x);
}

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> scan_roots(const std::function<double(double)>& f, double start, double x_max) {
  std::vector<double> roots;
  constexpr double step = 0.05;
  double a = start;
  double fa = f(a);
  while (a < x_max) {
    const double b = a + step;
    const double fb = f(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if ((fa < 0) != (fb < 0)) {
      const double r = bisect(f, a, b);
      if (r <= x_max) roots.push_back(r);
    }
    a = b;
    fa = fb;
  }
  return roots;
}

}  // namespace

std::vector<double> zeros(int m, double x_max) {
  // No zero of J_m lies below m (and none below 2.4 for m = 0).
  const double start = std::max(1e-3, 0.9 * m);
  return scan_roots([m](double x) { return j(m, x); }, start, x_max);
}

std::vector<double> derivative_zeros(int m, double x_max) {
  // j'_{m,1} >= m for m >= 1; the x = 0 stationary point of J_m (m >= 2) is skipped.
  const double start = std::max(1e-3, 0.9 * m);
  return scan_roots([m](double x) { return jp(m, x); }, start, x_max);
}

}  // namespace wg::bessel
