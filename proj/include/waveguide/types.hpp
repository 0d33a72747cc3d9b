#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wg {

using Complex = std::complex<double>;
using Point2 = Eigen::Vector2d;
using Vector3c = Eigen::Matrix<Complex, 3, 1>;

// Eight-component section / source layout: (phi[3], alpha, psi[3], beta),
// equivalently (f1[3], h1, f2[3], h2) for right-hand sides.
using Vector8c = Eigen::Matrix<Complex, 8, 1>;

namespace comp {
inline constexpr int phi = 0;
inline constexpr int alpha = 3;
inline constexpr int psi = 4;
inline constexpr int beta = 7;
}  // namespace comp

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

enum class BoundaryCondition { dirichlet, neumann };
enum class Backend { analytic, fem };

const char* to_string(BoundaryCondition bc);
const char* to_string(Backend backend);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid cross-section or junction description.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Frequency too close to a threshold (k^2 ~ mu for some cross-section eigenvalue).
class ThresholdError : public Error {
 public:
  ThresholdError(const std::string& what, double threshold)
      : Error(what), threshold_(threshold) {}
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

/// Iterative or direct solver did not reach the requested accuracy.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int achieved = -1)
      : Error(what), achieved_(achieved) {}
  int achieved() const { return achieved_; }

 private:
  int achieved_;
};

/// Argument violates a documented precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace wg
