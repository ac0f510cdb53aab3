// Shared scalar/matrix aliases, error types and small linear-algebra helpers
// used across the library.
#ifndef RISBEAM_TYPES_HPP
#define RISBEAM_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risbeam {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;

/// Invalid or inconsistent configuration values.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Ill-conditioned or singular linear-algebra operation.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inputs whose shapes do not match the operation's contract.
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Square diagonal matrix holding the diagonal of `a` (zero elsewhere).
inline CMat keep_diagonal(const CMat& a) {
  return a.diagonal().asDiagonal();
}

/// Scrub roundoff asymmetry from a nominally Hermitian matrix.
inline CMat hermitize(const CMat& a) {
  return 0.5 * (a + a.adjoint());
}

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

inline double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Wrap an angle into [-pi, pi).
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // (-pi, pi]
  if (w >= kPi) w -= 2.0 * kPi;
  return w;
}

}  // namespace risbeam

#endif  // RISBEAM_TYPES_HPP
