#pragma once

// Analytic output moments and steering parameters of the pulsed three-mode
// system in the adiabatic (bad-cavity) limit.
//
// Shorthand used below, with u = 2r:
//   x = e^{2r} - 1
//   h = 2r / (e^{2r} - 1)            -> 1 as r -> 0
//   s = 2r e^{2r} / (e^{2r} - 1) = h (x + 1) = h + 2r
//   q = e^{2r} + 1 - 2 s             ~ u^2 / 3 as r -> 0
// Below r = 1e-4 the removable singularities are evaluated by Taylor series.

#include "steerkit/errors.hpp"
#include "steerkit/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace steerkit {

struct MomentSet {
  double var_Xm_out = 0.0;
  double var_X1_out = 0.0;
  double var_X2_out = 0.0;
  double var_XW_out = 0.0;
  double cov_Xm_P1 = 0.0;
  double cov_Xm_P2 = 0.0;
  double cov_Xm_PW = 0.0;

  double var_X_out(int j) const { return j == 1 ? var_X1_out : var_X2_out; }
  double cov_Xm_P(int j) const { return j == 1 ? cov_Xm_P1 : cov_Xm_P2; }
};

namespace closedform_detail {

inline constexpr double series_crossover = 1e-4;

struct PulseFactors {
  double r = 0.0;
  double x = 0.0;         // e^{2r} - 1
  double er = 1.0;        // e^r
  double h = 1.0;         // 2r / (e^{2r} - 1)
  double s_minus_1 = 0.0; // s - 1
  double q = 0.0;         // e^{2r} + 1 - 2 s

  double s() const { return 1.0 + s_minus_1; }
  double sqrt_x_er() const { return std::sqrt(x) * er; }  // sqrt((e^{2r}-1) e^{2r})
};

inline PulseFactors pulse_factors(double r) {
  PulseFactors f;
  f.r = r;
  f.x = std::expm1(2.0 * r);
  f.er = std::exp(r);
  const double u = 2.0 * r;
  if (r < series_crossover) {
    const double u2 = u * u;
    const double u4 = u2 * u2;
    const double u6 = u4 * u2;
    f.h = 1.0 - u / 2.0 + u2 / 12.0 - u4 / 720.0 + u6 / 30240.0;
    f.s_minus_1 = u / 2.0 + u2 / 12.0 - u4 / 720.0 + u6 / 30240.0;
    f.q = u2 / 3.0 + u2 * u / 6.0 + 2.0 * u4 / 45.0 + u4 * u / 120.0 + u6 / 756.0;
  } else {
    f.h = u / f.x;
    f.s_minus_1 = (f.h - 1.0) + u;
    f.q = f.x + 2.0 - 2.0 * f.s();
  }
  return f;
}

inline void require_gain(const DerivedQuantities& dq) {
  if (!(dq.G > 0.0)) {
    std::ostringstream msg;
    msg << "net gain G = " << dq.G << " must be positive";
    fail(ErrorKind::GainNotPositive, msg.str());
  }
  require(dq.r >= 0.0 && !std::isnan(dq.r), ErrorKind::InvalidParams, "squeezing parameter r must be >= 0");
}

// Numerator and denominator of a conditional variance var - cov^2 / var_party,
// each of the form (lead * x + rest). The e^{4r} terms cancel analytically, so
// evaluating these is free of catastrophic cancellation; for x > 1 both are
// divided by x, which also keeps r > ~350 finite.
struct Ratio {
  double num_lead, num_rest, den_lead, den_rest;

  double evaluate(double x) const {
    if (x > 1.0) return (num_lead + num_rest / x) / (den_lead + den_rest / x);
    return (num_lead * x + num_rest) / (den_lead * x + den_rest);
  }
  double denominator_sign(double x) const { return x > 1.0 ? den_lead + den_rest / x : den_lead * x + den_rest; }
};

}  // namespace closedform_detail

// Output variances and covariances (symmetric ordering, vacuum = 1/2). The
// P-variances equal the X-variances and <P_m, X_j> = <X_m, P_j>.
inline MomentSet moment_set(const DerivedQuantities& dq, double n0, double n) {
  closedform_detail::require_gain(dq);
  require(n0 >= 0.0 && n >= 0.0, ErrorKind::InvalidParams, "occupations must be >= 0");
  const auto f = closedform_detail::pulse_factors(dq.r);
  const double g = dq.gamma_over_G();
  const double m = g * (n + 1.0);
  const double b = 0.5 + m;

  MomentSet ms;
  ms.var_Xm_out = n0 + 0.5 + (n0 + 1.0) * f.x + m * f.x;
  ms.var_X1_out = 0.5 + dq.fraction(1) * ((n0 + 1.0) * f.x + m * f.q);
  ms.var_X2_out = 0.5 + dq.fraction(2) * ((n0 + 1.0) * f.x + m * f.q);
  ms.var_XW_out = (1.0 + g) * (1.0 + g) * ((n0 + 1.0 + m) * (f.x + 1.0) - (n0 + 0.5)) + g * b * (g - 2.0 * (1.0 + g) * f.s());
  const double single = (n0 + 1.0 + m * (1.0 - f.h));
  ms.cov_Xm_P1 = -std::sqrt(dq.fraction(1)) * f.sqrt_x_er() * single;
  ms.cov_Xm_P2 = -std::sqrt(dq.fraction(2)) * f.sqrt_x_er() * single;
  ms.cov_Xm_PW = f.sqrt_x_er() * (-(1.0 + g) * (n0 + 1.0 + m) + g * f.h * b);
  return ms;
}

// Two-mode covariance matrix over (A_m^out, party) implied by a moment set,
// with party = 0 for the collective mode W and 1, 2 for the cavity modes.
inline Eigen::Matrix4d pair_covariance(const MomentSet& ms, int party) {
  const double vp = party == 0 ? ms.var_XW_out : ms.var_X_out(party);
  const double c = party == 0 ? ms.cov_Xm_PW : ms.cov_Xm_P(party);
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(0, 0) = s(1, 1) = ms.var_Xm_out;
  s(2, 2) = s(3, 3) = vp;
  s(0, 3) = s(3, 0) = c;
  s(1, 2) = s(2, 1) = c;
  return s;
}

// Conditional variances straight from a moment set. Algebraically equal to
// steering_collective / steering_single but subject to cancellation at large r.
inline double collective_conditional_variance(const MomentSet& ms) {
  require(ms.var_XW_out > 0.0, ErrorKind::DegenerateVariance, "var(X_W) must be positive");
  return ms.var_Xm_out - ms.cov_Xm_PW * ms.cov_Xm_PW / ms.var_XW_out;
}

inline double single_conditional_variance(const MomentSet& ms, int j) {
  require(ms.var_X_out(j) > 0.0, ErrorKind::DegenerateVariance, "var(X_j) must be positive");
  return ms.var_Xm_out - ms.cov_Xm_P(j) * ms.cov_Xm_P(j) / ms.var_X_out(j);
}

// Collective steering parameter E_{m|W}. For gamma -> 0 this reduces to
// (n0 + 1/2) / (2 (n0 + 1)(e^{2r} - 1) + 1).
inline double steering_collective(const DerivedQuantities& dq, double n0, double n) {
  closedform_detail::require_gain(dq);
  require(n0 >= 0.0 && n >= 0.0, ErrorKind::InvalidParams, "occupations must be >= 0");
  const auto f = closedform_detail::pulse_factors(dq.r);
  const double g = dq.gamma_over_G();
  const double m = g * (n + 1.0);
  const double a = n0 + 1.0 + m;
  const double b = 0.5 + m;
  const double c0 = 2.0 * n0 + 1.0;
  const double k = 2.0 * g * (1.0 + g);
  const double damping = 1.0 - k * f.s_minus_1;
  const closedform_detail::Ratio ratio{
      g * g * a * b,
      0.5 * b * (c0 * damping - 4.0 * g * g * b * f.r * f.s()),
      (1.0 + g) * (1.0 + g) * a,
      b * damping,
  };
  require(ratio.denominator_sign(f.x) > 0.0, ErrorKind::DegenerateVariance, "var(X_W) must be positive");
  return ratio.evaluate(f.x);
}

// Bipartite steering parameter E_{m|j}; swapping G1 and G2 swaps j.
inline double steering_single(const DerivedQuantities& dq, double n0, double n, int j) {
  closedform_detail::require_gain(dq);
  require(j == 1 || j == 2, ErrorKind::InvalidParams, "cavity index must be 1 or 2");
  require(n0 >= 0.0 && n >= 0.0, ErrorKind::InvalidParams, "occupations must be >= 0");
  const auto f = closedform_detail::pulse_factors(dq.r);
  const double g = dq.gamma_over_G();
  const double fj = dq.fraction(j);
  const double m = g * (n + 1.0);
  const double a = n0 + 1.0 + m;
  const double c0 = 2.0 * n0 + 1.0;
  const closedform_detail::Ratio ratio{
      a * (0.5 - 0.5 * fj + fj * m),
      0.25 * c0 - fj * m * c0 * f.s_minus_1 - 2.0 * fj * m * m * f.r * f.s(),
      fj * a,
      0.5 - 2.0 * fj * m * f.s_minus_1,
  };
  require(ratio.denominator_sign(f.x) > 0.0, ErrorKind::DegenerateVariance, "var(X_j) must be positive");
  return ratio.evaluate(f.x);
}

// |<A_1^out^dag A_2^out>|, the mutual coherence of the two output pulses.
inline double cross_correlation(const DerivedQuantities& dq, double n0, double n) {
  closedform_detail::require_gain(dq);
  if (dq.r == 0.0) return 0.0;
  const double u = 2.0 * dq.r;
  const double x = std::expm1(u);
  double sinh_minus_u = 0.0;
  if (u < 1.0) {
    double term = u * u * u / 6.0;
    for (int k = 2; term > 1e-18 * sinh_minus_u; ++k) {
      sinh_minus_u += term;
      term *= u * u / ((2.0 * k) * (2.0 * k + 1.0));
    }
  } else {
    sinh_minus_u = std::sinh(u) - u;
  }
  const double g = dq.gamma_over_G();
  return std::sqrt(dq.fraction(1) * dq.fraction(2)) *
         ((n0 + 1.0) * x + 2.0 * (n + 1.0) * g * (x + 1.0) * (sinh_minus_u / x));
}

// Minimal squeezing parameter for collective steering of a thermal mirror in
// the undamped limit.
inline double threshold_r(double n0) {
  require(n0 >= 0.0 && std::isfinite(n0), ErrorKind::InvalidParams, "n0 must be >= 0");
  return 0.5 * std::log1p(n0 / (n0 + 1.0));
}

}  // namespace steerkit
