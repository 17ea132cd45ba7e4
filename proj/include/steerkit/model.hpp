#pragma once

// Device parameters, the classical working point of the driven cavities and
// the reduced (linearized, rotating-wave) parameters of the three-mode model.
//
// Angular frequencies and rates are in rad/s throughout.

#include "steerkit/errors.hpp"
#include "steerkit/quadrature.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

namespace steerkit {

struct PhysicalParams {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega_m = 0.0;
  double omega_L = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma = 0.0;
  double g01 = 0.0;
  double g02 = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  double n0 = 0.0;
  double n = 0.0;
  double tau = 0.0;

  double detuning1() const { return omega1 - omega_L; }
  double detuning2() const { return omega2 - omega_L; }

  bool operator==(const PhysicalParams&) const = default;
};

inline void validate(const PhysicalParams& p) {
  auto positive = [](double v, const char* name) {
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidParams, std::string(name) + " must be positive");
  };
  auto non_negative = [](double v, const char* name) {
    require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidParams, std::string(name) + " must be >= 0");
  };
  positive(p.omega1, "omega1");
  positive(p.omega2, "omega2");
  positive(p.omega_m, "omega_m");
  positive(p.omega_L, "omega_L");
  positive(p.kappa1, "kappa1");
  positive(p.kappa2, "kappa2");
  positive(p.tau, "tau");
  // gamma = 0 is admitted as the undamped limit used throughout the analysis.
  non_negative(p.gamma, "gamma");
  non_negative(p.g01, "g01");
  non_negative(p.g02, "g02");
  non_negative(p.E1, "E1");
  non_negative(p.E2, "E2");
  non_negative(p.n0, "n0");
  non_negative(p.n, "n");
}

struct WorkingPoint {
  cplx alpha1{};
  cplx alpha2{};
  double x_s = 0.0;
  double p_s = 0.0;
  double Delta1 = 0.0;
  double Delta2 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

namespace detail {

struct WorkingPointEquations {
  const PhysicalParams& p;

  double detuning(int j, double x) const {
    return j == 1 ? p.detuning1() + std::sqrt(2.0) * p.g01 * x : p.detuning2() + std::sqrt(2.0) * p.g02 * x;
  }
  cplx alpha(int j, double x) const {
    const double E = j == 1 ? p.E1 : p.E2;
    const double kappa = j == 1 ? p.kappa1 : p.kappa2;
    return E / cplx(kappa, detuning(j, x));
  }
  // Right-hand side of the mirror displacement condition.
  double displacement(double x) const {
    return -std::sqrt(2.0) * (p.g01 * std::norm(alpha(1, x)) + p.g02 * std::norm(alpha(2, x))) / p.omega_m;
  }
  double residual(double x) const { return x - displacement(x); }

  WorkingPoint at(double x) const {
    WorkingPoint wp;
    wp.x_s = x;
    wp.alpha1 = alpha(1, x);
    wp.alpha2 = alpha(2, x);
    wp.Delta1 = detuning(1, x);
    wp.Delta2 = detuning(2, x);
    wp.g1 = p.g01 * std::abs(wp.alpha1);
    wp.g2 = p.g02 * std::abs(wp.alpha2);
    return wp;
  }
};

}  // namespace detail

// Self-consistent mean fields. Damped Picard iteration on x_s, falling back to
// bisection on the scalar condition; the root is always bracketed by
// [most negative possible displacement, 0].
inline WorkingPoint derive_working_point(const PhysicalParams& p, double tol = 1e-12, int max_iter = 10000) {
  validate(p);
  require(tol > 0.0, ErrorKind::InvalidParams, "tol must be positive");
  require(max_iter >= 1, ErrorKind::InvalidParams, "max_iter must be >= 1");

  const detail::WorkingPointEquations eq{p};
  constexpr double damping = 0.5;

  double x = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double r = eq.residual(x);
    if (std::abs(r) < tol) return eq.at(x);
    x -= damping * r;
  }

  double lo = -std::sqrt(2.0) *
              (p.g01 * p.E1 * p.E1 / (p.kappa1 * p.kappa1) + p.g02 * p.E2 * p.E2 / (p.kappa2 * p.kappa2)) / p.omega_m;
  double hi = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = eq.residual(mid);
    if (std::abs(r) < tol) return eq.at(mid);
    (r > 0.0 ? hi : lo) = mid;
  }
  std::ostringstream msg;
  msg << "working point did not converge in " << max_iter << " iterations (bistable or marginal drive?)";
  fail(ErrorKind::NonConvergence, msg.str());
}

// Working point for a device whose effective couplings g_j = g0j |alpha_j| are
// specified directly instead of through the drive amplitudes.
inline WorkingPoint working_point_from_couplings(const PhysicalParams& p, double g1, double g2) {
  validate(p);
  require(g1 >= 0.0 && g2 >= 0.0, ErrorKind::InvalidParams, "effective couplings must be >= 0");
  require(g1 == 0.0 || p.g01 > 0.0, ErrorKind::InvalidParams, "g1 > 0 requires g01 > 0");
  require(g2 == 0.0 || p.g02 > 0.0, ErrorKind::InvalidParams, "g2 > 0 requires g02 > 0");
  const double n1 = g1 > 0.0 ? (g1 / p.g01) * (g1 / p.g01) : 0.0;
  const double n2 = g2 > 0.0 ? (g2 / p.g02) * (g2 / p.g02) : 0.0;
  WorkingPoint wp;
  wp.x_s = -std::sqrt(2.0) * (p.g01 * n1 + p.g02 * n2) / p.omega_m;
  wp.Delta1 = p.detuning1() + std::sqrt(2.0) * p.g01 * wp.x_s;
  wp.Delta2 = p.detuning2() + std::sqrt(2.0) * p.g02 * wp.x_s;
  wp.alpha1 = std::polar(std::sqrt(n1), -std::atan2(wp.Delta1, p.kappa1));
  wp.alpha2 = std::polar(std::sqrt(n2), -std::atan2(wp.Delta2, p.kappa2));
  wp.g1 = g1;
  wp.g2 = g2;
  return wp;
}

struct ReducedParams {
  double g1 = 0.0;
  double g2 = 0.0;
  double kappa = 0.0;
  double Delta = 0.0;
  double gamma = 0.0;
  double n0 = 0.0;
  double n = 0.0;
  double tau = 0.0;
  std::vector<std::string> warnings;

  bool operator==(const ReducedParams&) const = default;
};

inline void validate(const ReducedParams& rp) {
  auto finite = [](double v) { return std::isfinite(v); };
  require(finite(rp.g1) && rp.g1 >= 0.0 && finite(rp.g2) && rp.g2 >= 0.0, ErrorKind::InvalidParams,
          "couplings must be finite and >= 0");
  require(finite(rp.kappa) && rp.kappa > 0.0, ErrorKind::InvalidParams, "kappa must be positive");
  require(finite(rp.Delta), ErrorKind::InvalidParams, "Delta must be finite");
  require(finite(rp.gamma) && rp.gamma >= 0.0, ErrorKind::InvalidParams, "gamma must be >= 0");
  require(finite(rp.tau) && rp.tau > 0.0, ErrorKind::InvalidParams, "tau must be positive");
  require(finite(rp.n0) && rp.n0 >= 0.0 && finite(rp.n) && rp.n >= 0.0, ErrorKind::InvalidParams,
          "occupations must be >= 0");
}

struct ReduceOptions {
  // Allowed |omega_L - omega_0 - omega_m|, in units of the mean cavity linewidth.
  double resonance_tolerance = 0.05;
  // Allowed relative difference |kappa1 - kappa2| / mean(kappa).
  double damping_tolerance = 0.01;
  // Regime warnings for g_j << kappa << omega_m.
  double coupling_ratio_warning = 0.2;
  double linewidth_ratio_warning = 0.2;
  // Warn when the radiation-pressure detuning shift exceeds this fraction of kappa.
  double shift_ratio_warning = 0.2;
};

inline ReducedParams reduce(const PhysicalParams& p, const WorkingPoint& wp, const ReduceOptions& opts = {}) {
  validate(p);
  const double kappa = 0.5 * (p.kappa1 + p.kappa2);
  const double offset = p.omega_L - 0.5 * (p.omega1 + p.omega2) - p.omega_m;
  if (std::abs(offset) > opts.resonance_tolerance * kappa) {
    std::ostringstream msg;
    msg << "laser is " << offset << " rad/s away from the blue sideband of the mean cavity frequency";
    fail(ErrorKind::OffResonance, msg.str());
  }
  if (std::abs(p.kappa1 - p.kappa2) > opts.damping_tolerance * kappa) {
    fail(ErrorKind::AsymmetricDamping, "kappa1 and kappa2 differ by more than the allowed tolerance");
  }

  ReducedParams rp;
  rp.g1 = wp.g1;
  rp.g2 = wp.g2;
  rp.kappa = kappa;
  rp.Delta = 0.5 * (p.omega1 - p.omega2);
  rp.gamma = p.gamma;
  rp.n0 = p.n0;
  rp.n = p.n;
  rp.tau = p.tau;
  validate(rp);

  auto warn = [&rp](const std::string& s) { rp.warnings.push_back(s); };
  for (int j = 1; j <= 2; ++j) {
    const double g = j == 1 ? rp.g1 : rp.g2;
    if (g / kappa > opts.coupling_ratio_warning) {
      std::ostringstream msg;
      msg << "g" << j << "/kappa = " << g / kappa << " exceeds " << opts.coupling_ratio_warning;
      warn(msg.str());
    }
  }
  if (kappa / p.omega_m > opts.linewidth_ratio_warning) {
    std::ostringstream msg;
    msg << "kappa/omega_m = " << kappa / p.omega_m << " exceeds " << opts.linewidth_ratio_warning;
    warn(msg.str());
  }
  const double shift = std::max(std::abs(wp.Delta1 - p.detuning1()), std::abs(wp.Delta2 - p.detuning2()));
  if (shift > opts.shift_ratio_warning * kappa) {
    std::ostringstream msg;
    msg << "radiation-pressure detuning shift " << shift << " rad/s is not small against kappa";
    warn(msg.str());
  }
  return rp;
}

struct DerivedQuantities {
  double G1 = 0.0;
  double G2 = 0.0;
  double G = 0.0;
  double delta = 0.0;
  double phi = 0.0;
  double r = 0.0;
  double gamma = 0.0;
  double tau = 0.0;

  double gamma_over_G() const { return gamma / G; }
  // G_j / G for j = 1, 2.
  double fraction(int j) const { return (j == 1 ? G1 : G2) / G; }
};

inline DerivedQuantities derived_quantities(const ReducedParams& rp) {
  validate(rp);
  const double denom = rp.kappa * rp.kappa + rp.Delta * rp.Delta;
  DerivedQuantities dq;
  dq.G1 = rp.g1 * rp.g1 * rp.kappa / denom;
  dq.G2 = rp.g2 * rp.g2 * rp.kappa / denom;
  dq.delta = (rp.g1 * rp.g1 - rp.g2 * rp.g2) * rp.Delta / denom;
  dq.G = dq.G1 + dq.G2 - rp.gamma;
  dq.phi = std::atan(rp.Delta / rp.kappa);
  dq.gamma = rp.gamma;
  dq.tau = rp.tau;
  dq.r = dq.G * rp.tau;
  if (!(dq.G > 0.0)) {
    std::ostringstream msg;
    msg << "net gain G = G1 + G2 - gamma = " << dq.G << " must be positive";
    fail(ErrorKind::GainNotPositive, msg.str());
  }
  return dq;
}

// Operating point in units where the net gain G is 1. The remaining two
// ratios only matter for the three-mode (non-adiabatic) model.
struct DimensionlessPoint {
  double r = 1.0;
  double gamma_over_G = 0.0;
  double G1_over_G2 = 1.0;
  double n0 = 0.0;
  double n = 0.0;
  double kappa_over_g = 20.0;  // kappa over the larger of g1, g2
  double Delta_over_kappa = 1.0;

  bool operator==(const DimensionlessPoint&) const = default;
};

inline DerivedQuantities dimensionless_quantities(double gamma_over_G, double G1_over_G2, double r) {
  require(gamma_over_G >= 0.0 && std::isfinite(gamma_over_G), ErrorKind::InvalidParams, "gamma/G must be >= 0");
  require(G1_over_G2 >= 0.0, ErrorKind::InvalidParams, "G1/G2 must be >= 0");
  require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidParams, "r must be >= 0");
  DerivedQuantities dq;
  dq.G = 1.0;
  dq.gamma = gamma_over_G;
  const double total = 1.0 + gamma_over_G;
  if (std::isinf(G1_over_G2)) {
    dq.G1 = total;
  } else {
    dq.G1 = total * G1_over_G2 / (1.0 + G1_over_G2);
    dq.G2 = total - dq.G1;
  }
  dq.r = r;
  dq.tau = r;
  return dq;
}

// Concrete reduced parameters (kappa = 1 rad/s) realizing a dimensionless point.
inline ReducedParams reduced_from_dimensionless(const DimensionlessPoint& pt) {
  require(pt.kappa_over_g > 0.0 && pt.r > 0.0, ErrorKind::InvalidParams, "kappa/g and r must be positive");
  require(pt.G1_over_G2 > 0.0 || pt.G1_over_G2 == 0.0, ErrorKind::InvalidParams, "G1/G2 must be >= 0");
  ReducedParams rp;
  rp.kappa = 1.0;
  rp.Delta = pt.Delta_over_kappa;
  const double g_max = 1.0 / pt.kappa_over_g;
  if (pt.G1_over_G2 >= 1.0) {
    rp.g1 = g_max;
    rp.g2 = g_max / std::sqrt(pt.G1_over_G2);
  } else {
    rp.g2 = g_max;
    rp.g1 = g_max * std::sqrt(pt.G1_over_G2);
  }
  const double denom = 1.0 + rp.Delta * rp.Delta;
  const double sum = (rp.g1 * rp.g1 + rp.g2 * rp.g2) / denom;
  const double G = sum / (1.0 + pt.gamma_over_G);
  rp.gamma = sum - G;
  rp.tau = pt.r / G;
  rp.n0 = pt.n0;
  rp.n = pt.n;
  validate(rp);
  return rp;
}

}  // namespace steerkit
