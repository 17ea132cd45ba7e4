#pragma once

// Reference computations used only by the tests. Each one is derived without
// going through the library code it checks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

// Collective witness at zero mirror damping in its reduced algebraic form.
inline double undamped_collective(double r, double n0) {
  return (n0 + 0.5) / (2.0 * (n0 + 1.0) * std::expm1(2.0 * r) + 1.0);
}

// Mirror quadrature variance of the undamped, unrotated reduced model:
// d<X^2>/dt = 2G <X^2> + G (two vacuum inputs), solved in closed form.
inline double undamped_mirror_variance(double r, double n0) { return (n0 + 1.0) * std::exp(2.0 * r) - 0.5; }

// At zero damping the mirror and the collective cavity mode form a two-mode
// squeezed thermal state; a cavity mode carrying a fraction f of the gain sees
// a beam-splitter share sqrt(f) of the collective correlations.
struct TwoModeSqueezed {
  double var_m;     // mirror quadrature variance
  double var_w;     // collective cavity quadrature variance
  double cov_m_pw;  // <X_m, P_W>

  TwoModeSqueezed(double r, double n0) {
    const double c = std::expm1(2.0 * r);
    var_m = n0 + 0.5 + (n0 + 1.0) * c;
    var_w = 0.5 + (n0 + 1.0) * c;
    cov_m_pw = -(n0 + 1.0) * std::sqrt(c * (c + 1.0));
  }
  double var_party(double f) const { return 0.5 + f * (var_w - 0.5); }
  double cov_party(double f) const { return std::sqrt(f) * cov_m_pw; }
  double conditional_collective() const { return var_m - cov_m_pw * cov_m_pw / var_w; }
  double conditional_single(double f) const {
    return var_m - cov_party(f) * cov_party(f) / var_party(f);
  }
  // |<A_1^dag A_2>| for cavity fractions f and 1 - f.
  double cross(double f) const { return std::sqrt(f * (1.0 - f)) * (var_w - 0.5); }
};

// Scalar self-consistency for the static mirror displacement, solved by plain
// bisection: x = -sqrt2 sum_j g0j E_j^2 / (kappa_j^2 + (D0j + sqrt2 g0j x)^2) / omega_m.
struct DisplacementProblem {
  double omega_m;
  double kappa[2];
  double g0[2];
  double E[2];
  double D0[2];

  double photons(int j, double x) const {
    const double d = D0[j] + std::sqrt(2.0) * g0[j] * x;
    return E[j] * E[j] / (kappa[j] * kappa[j] + d * d);
  }
  double residual(double x) const {
    return x + std::sqrt(2.0) * (g0[0] * photons(0, x) + g0[1] * photons(1, x)) / omega_m;
  }
  double solve(double tol = 1e-14) const {
    double lo = -std::sqrt(2.0) * (g0[0] * E[0] * E[0] / (kappa[0] * kappa[0]) + g0[1] * E[1] * E[1] / (kappa[1] * kappa[1])) /
                omega_m;
    double hi = 0.0;
    if (lo == hi) return 0.0;
    for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Smallest Var(a + u b) over a uniform grid of gains around u0.
inline double grid_minimum(double var_a, double cov_ab, double var_b, double u0, double half_width, int points) {
  double best = INFINITY;
  for (int i = 0; i <= points; ++i) {
    const double u = u0 - half_width + 2.0 * half_width * i / points;
    best = std::min(best, var_a + 2.0 * u * cov_ab + u * u * var_b);
  }
  return best;
}

// One cavity (a) pumping a mirror (b) on the blue sideband with no detuning,
// no mirror damping and a vacuum cavity input. Normally ordered moments
// (N_a, N_b, y) with <a b> = -i y obey a constant-coefficient linear system,
// solved here through the eigen-decomposition of its 3x3 matrix.
inline double pumped_mirror_occupation(double g, double kappa, double n0, double t) {
  Eigen::Matrix3d A;
  A << -2.0 * kappa, 0.0, 2.0 * g,
       0.0, 0.0, 2.0 * g,
       g, g, -kappa;
  const Eigen::Vector3d c(0.0, 0.0, g);
  const Eigen::Vector3d x0(0.0, n0, 0.0);
  const Eigen::Vector3d shift = A.fullPivLu().solve(c);  // fixed point is -shift
  Eigen::EigenSolver<Eigen::Matrix3d> es(A);
  const Eigen::Matrix3cd V = es.eigenvectors();
  const Eigen::Vector3cd lambda = es.eigenvalues();
  const Eigen::Vector3cd coeff = V.fullPivLu().solve((x0 + shift).cast<std::complex<double>>());
  Eigen::Vector3cd x = Eigen::Vector3cd::Zero();
  for (int k = 0; k < 3; ++k) x += coeff(k) * std::exp(lambda(k) * t) * V.col(k);
  return x(1).real() - shift(1);
}

// Two-mode squeezed vacuum covariance over (X_1, P_1, X_2, P_2).
inline Eigen::Matrix4d two_mode_squeezed(double s) {
  const double c = 0.5 * std::cosh(2.0 * s), d = 0.5 * std::sinh(2.0 * s);
  Eigen::Matrix4d m;
  m << c, 0, d, 0,
       0, c, 0, -d,
       d, 0, c, 0,
       0, -d, 0, c;
  return m;
}

}  // namespace oracle
