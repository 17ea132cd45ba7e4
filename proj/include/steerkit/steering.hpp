#pragma once

// EPR steering witnesses evaluated on covariance matrices, plus threshold and
// region searches on the analytic collective witness.

#include "steerkit/closedform.hpp"
#include "steerkit/covariance.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/model.hpp"
#include "steerkit/numeric.hpp"
#include "steerkit/parallel.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace steerkit {

inline constexpr double steering_bound = 0.5;
inline constexpr double zero_variance_floor = 1e-15;

struct Inference {
  double variance = 0.0;
  double gain = 0.0;
};

// min_u Var(steered + u party) and its minimizer.
inline Inference inferred_variance(const OutputCovariance& oc, const QuadratureSelector& steered,
                                   const QuadratureSelector& party) {
  const double vp = oc.covariance(party, party);
  if (vp < zero_variance_floor) {
    std::ostringstream msg;
    msg << "variance of the measured quadrature of '" << party.mode << "' is " << vp;
    fail(ErrorKind::ZeroVariance, msg.str());
  }
  const double c = oc.covariance(steered, party);
  return {oc.covariance(steered, steered) - c * c / vp, -c / vp};
}

struct SteeringReport {
  double E_value = 0.0;
  std::string steered_mode;
  std::string steering_party;
  double gain_X = 0.0;
  double gain_P = 0.0;
  // Steered quadrature pair is (angle_steered, angle_steered + pi/2); the
  // party quadratures used to infer each of them follow.
  double angle_steered = 0.0;
  double angle_party = 0.5 * std::numbers::pi;
  double angle_party_P = 0.0;
  double inferred_X = 0.0;
  double inferred_P = 0.0;
  bool is_steering = false;
};

namespace steering_detail {

// Closed-form access to the (steered, party) 4x4 block for angle scans.
struct PairBlock {
  Eigen::Matrix2d A, C, B;

  PairBlock(const OutputCovariance& oc, const std::string& steered, const std::string& party)
      : A(oc.block(steered, steered)), C(oc.block(steered, party)), B(oc.block(party, party)) {}

  Inference infer(double theta, double phi) const {
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    const Eigen::Vector2d w(std::cos(phi), std::sin(phi));
    const double vp = w.dot(B * w);
    if (vp < zero_variance_floor) fail(ErrorKind::ZeroVariance, "degenerate party quadrature");
    const double c = u.dot(C * w);
    return {u.dot(A * u) - c * c / vp, -c / vp};
  }
};

inline constexpr int angle_grid_points = 64;
inline constexpr double angle_tolerance = 1e-10;

}  // namespace steering_detail

// E = Delta_inf X * Delta_inf P of `steered` given measurements on `party`.
// Without angle optimization X is inferred from P_party and P from X_party.
inline SteeringReport steering_product(const OutputCovariance& oc, const std::string& steered,
                                       const std::string& party, bool optimize_angles = false) {
  using namespace steering_detail;
  const PairBlock pb(oc, steered, party);
  const double half_pi = 0.5 * std::numbers::pi;
  SteeringReport rep;
  rep.steered_mode = steered;
  rep.steering_party = party;

  if (!optimize_angles) {
    const Inference x = pb.infer(0.0, half_pi);
    const Inference p = pb.infer(half_pi, 0.0);
    rep.inferred_X = x.variance;
    rep.inferred_P = p.variance;
    rep.gain_X = x.gain;
    rep.gain_P = p.gain;
  } else {
    const double pi = std::numbers::pi;
    auto best_party = [&](double theta) {
      return numeric::periodic_scan_and_refine([&](double phi) { return pb.infer(theta, phi).variance; }, pi,
                                               angle_grid_points, angle_tolerance);
    };
    auto product = [&](double theta) {
      const double vx = best_party(theta).value;
      const double vp = best_party(theta + half_pi).value;
      return std::sqrt(std::max(vx, 0.0) * std::max(vp, 0.0));
    };
    const numeric::Minimum outer = numeric::periodic_scan_and_refine(product, pi, angle_grid_points, angle_tolerance);
    rep.angle_steered = outer.location;
    const numeric::Minimum bx = best_party(outer.location);
    const numeric::Minimum bp = best_party(outer.location + half_pi);
    rep.angle_party = bx.location;
    rep.angle_party_P = bp.location;
    const Inference x = pb.infer(outer.location, bx.location);
    const Inference p = pb.infer(outer.location + half_pi, bp.location);
    rep.inferred_X = x.variance;
    rep.inferred_P = p.variance;
    rep.gain_X = x.gain;
    rep.gain_P = p.gain;
  }
  rep.E_value = std::sqrt(std::max(rep.inferred_X, 0.0)) * std::sqrt(std::max(rep.inferred_P, 0.0));
  rep.is_steering = rep.E_value < steering_bound;
  return rep;
}

struct MonogamyReport {
  std::array<std::string, 2> parties;
  std::array<double, 2> E{};
  // Both parties steering the same mode; impossible for a physical state.
  bool violated = false;
};

// Witnesses pinned at exactly 1/2 (equal gains) come out of the oracle with
// round-off of either sign; only values below 1/2 - tol count as steering here.
inline MonogamyReport monogamy_check(const OutputCovariance& oc, const std::string& steered,
                                     const std::array<std::string, 2>& parties, double tol = 1e-9) {
  MonogamyReport rep;
  rep.parties = parties;
  for (int k = 0; k < 2; ++k) rep.E[k] = steering_product(oc, steered, parties[k]).E_value;
  rep.violated = rep.E[0] < steering_bound - tol && rep.E[1] < steering_bound - tol;
  return rep;
}

struct ThresholdResult {
  std::string variable;
  double value = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};
  double sup_location = 0.0;
  double sup_E = 0.0;
};

struct SupremumResult {
  double location = 0.0;
  double value = 0.0;
};

// sup over r in (0, r_max] of E_{m|W}: log-spaced scan from 1e-4 r_max, then
// golden-section refinement around the largest sample.
inline SupremumResult collective_supremum(double gamma_over_G, double n0, double n, double r_max) {
  static constexpr int scan_points = 128;
  const auto grid = numeric::logspace(1e-4 * r_max, r_max, scan_points);
  auto negE = [&](double r) { return -steering_collective(dimensionless_quantities(gamma_over_G, 1.0, r), n0, n); };
  const numeric::Minimum m = numeric::scan_and_refine(negE, grid, 1e-10 * r_max);
  return {m.location, -m.value};
}

// Largest bath occupation n for which the mirror is collectively steered at
// every r in (0, r_max]. Outer bisection in n to absolute tolerance tol.
inline ThresholdResult noise_threshold(double gamma_over_G, double n0 = 0.0, double r_max = 10.0, double tol = 0.5,
                                       double cap = 1e6) {
  require(gamma_over_G > 0.0 && gamma_over_G < 1.0, ErrorKind::InvalidParams, "gamma/G must lie in (0, 1)");
  require(r_max > 0.0 && std::isfinite(r_max), ErrorKind::InvalidParams, "r_max must be positive");
  require(tol > 0.0, ErrorKind::InvalidParams, "tol must be positive");
  require(n0 >= 0.0, ErrorKind::InvalidParams, "n0 must be >= 0");

  auto steers_everywhere = [&](double n) { return collective_supremum(gamma_over_G, n0, n, r_max).value < steering_bound; };
  if (!steers_everywhere(0.0)) {
    std::ostringstream msg;
    msg << "E_m|W reaches 1/2 for some r <= " << r_max << " already at n = 0 (n0 = " << n0 << ")";
    fail(ErrorKind::NoThreshold, msg.str());
  }
  double lo = 0.0;
  double hi = 1.0;
  while (steers_everywhere(hi)) {
    lo = hi;
    hi *= 2.0;
    if (lo >= cap) {
      std::ostringstream msg;
      msg << "steering persists up to n = " << lo << " at gamma/G = " << gamma_over_G
          << "; the threshold exceeds the search cap";
      fail(ErrorKind::NoThreshold, msg.str());
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (steers_everywhere(mid) ? lo : hi) = mid;
  }
  ThresholdResult res;
  res.variable = "n";
  res.value = lo;
  res.bracket = {lo, hi};
  const SupremumResult sup = collective_supremum(gamma_over_G, n0, lo, r_max);
  res.sup_location = sup.location;
  res.sup_E = sup.value;
  return res;
}

struct ContourPoint {
  double r = 0.0;
  double gamma_over_G = 0.0;
};

// Linear-interpolated points where a row-major grid of values (rows along ys,
// columns along xs) crosses the steering bound, scanning every grid edge.
inline std::vector<ContourPoint> contour_crossings(const std::vector<double>& xs, const std::vector<double>& ys,
                                                   const std::vector<double>& values) {
  const std::size_t nx = xs.size(), ny = ys.size();
  auto at = [&](std::size_t yi, std::size_t xi) { return values[yi * nx + xi]; };
  auto crossing = [](double a, double b) {
    const double fa = a - steering_bound, fb = b - steering_bound;
    if (std::isnan(fa) || std::isnan(fb) || (fa < 0.0) == (fb < 0.0)) return -1.0;
    return fa / (fa - fb);
  };
  std::vector<ContourPoint> out;
  for (std::size_t yi = 0; yi < ny; ++yi) {
    for (std::size_t xi = 0; xi < nx; ++xi) {
      if (xi + 1 < nx) {
        const double t = crossing(at(yi, xi), at(yi, xi + 1));
        if (t >= 0.0) out.push_back({xs[xi] + t * (xs[xi + 1] - xs[xi]), ys[yi]});
      }
      if (yi + 1 < ny) {
        const double t = crossing(at(yi, xi), at(yi + 1, xi));
        if (t >= 0.0) out.push_back({xs[xi], ys[yi] + t * (ys[yi + 1] - ys[yi])});
      }
    }
  }
  return out;
}

struct SteeringRegion {
  std::vector<double> r_grid;
  std::vector<double> gamma_over_G_grid;
  // values[i * r_grid.size() + j] = E at (gamma_over_G_grid[i], r_grid[j]).
  std::vector<double> values;
  // Linear-interpolated crossings of E = 1/2 along grid edges.
  std::vector<ContourPoint> contour;

  double at(std::size_t gi, std::size_t ri) const { return values[gi * r_grid.size() + ri]; }
};

inline SteeringRegion steering_region(const std::vector<double>& r_grid, const std::vector<double>& gamma_over_G_grid,
                                      double n0, double n, double G1_over_G2 = 1.0, unsigned threads = 1) {
  require(!r_grid.empty() && !gamma_over_G_grid.empty(), ErrorKind::InvalidParams, "grids must be nonempty");
  for (double r : r_grid) require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidParams, "r grid must be >= 0");
  for (double g : gamma_over_G_grid)
    require(g >= 0.0 && std::isfinite(g), ErrorKind::InvalidParams, "gamma/G grid must be >= 0");

  SteeringRegion reg;
  reg.r_grid = r_grid;
  reg.gamma_over_G_grid = gamma_over_G_grid;
  const std::size_t nr = r_grid.size();
  const std::size_t ng = gamma_over_G_grid.size();
  reg.values.resize(nr * ng);
  parallel_for(ng, threads, [&](std::size_t gi) {
    for (std::size_t ri = 0; ri < nr; ++ri)
      reg.values[gi * nr + ri] =
          steering_collective(dimensionless_quantities(gamma_over_G_grid[gi], G1_over_G2, r_grid[ri]), n0, n);
  });

  reg.contour = contour_crossings(r_grid, gamma_over_G_grid, reg.values);
  return reg;
}

}  // namespace steerkit
