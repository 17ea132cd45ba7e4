#pragma once

// Quadrature-level representation of single bosonic modes.
//
// A mode a is stored as the real pair (X, P) with X = (a + a^dag)/sqrt(2) and
// P = (a - a^dag)/(sqrt(2) i). Multiplying a by a complex number c acts on the
// pair as the 2x2 matrix [[Re c, -Im c], [Im c, Re c]]; taking the adjoint
// flips the sign of P. All second moments are symmetrically ordered, so the
// vacuum has variance 1/2 in each quadrature.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

namespace steerkit {

using cplx = std::complex<double>;

inline Eigen::Matrix2d complex_map(cplx c) {
  Eigen::Matrix2d m;
  m << c.real(), -c.imag(), c.imag(), c.real();
  return m;
}

inline Eigen::Matrix2d conjugation_map() { return Eigen::Vector2d(1.0, -1.0).asDiagonal(); }

// Map of o -> c * o^dag on the quadrature pair of o.
inline Eigen::Matrix2d conjugate_complex_map(cplx c) { return complex_map(c) * conjugation_map(); }

// Row vector selecting cos(theta) X + sin(theta) P.
inline Eigen::RowVector2d quadrature_row(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline constexpr double vacuum_variance = 0.5;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace steerkit
