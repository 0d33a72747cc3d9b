#pragma once

#include <vector>

namespace wg::bessel {

double j(int m, double x);
/// d/dx J_m(x).
double jp(int m, double x);
/// d^2/dx^2 J_m(x), from Bessel's equation.
double jpp(int m, double x);

/// Positive zeros of J_m not exceeding x_max, ascending.
std::vector<double> zeros(int m, double x_max);

/// Positive zeros of J_m' not exceeding x_max, ascending (x = 0 excluded).
std::vector<double> derivative_zeros(int m, double x_max);

}  // namespace wg::bessel
