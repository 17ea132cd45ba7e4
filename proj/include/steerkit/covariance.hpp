#pragma once

#include "steerkit/errors.hpp"
#include "steerkit/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace steerkit {

// Quadrature cos(angle) X + sin(angle) P of a labelled mode.
struct QuadratureSelector {
  std::string mode;
  double angle = 0.0;

  static QuadratureSelector X(std::string mode) { return {std::move(mode), 0.0}; }
  static QuadratureSelector P(std::string mode) { return {std::move(mode), 0.5 * std::numbers::pi}; }
};

// Term of a linear mode combination: coefficient * source (or * source^dag).
struct ModeTerm {
  std::string source;
  cplx coefficient{1.0, 0.0};
  bool conjugate = false;
};

// Symmetrically ordered covariance over an ordered list of modes, quadrature
// order (X_1, P_1, X_2, P_2, ...).
struct OutputCovariance {
  std::vector<std::string> labels;
  Eigen::MatrixXd sigma;
  // Per-entry statistical errors; only set for Monte Carlo estimates.
  std::optional<Eigen::MatrixXd> standard_errors;
  long trajectories = 0;

  std::size_t size() const { return labels.size(); }

  bool has(const std::string& label) const { return std::find(labels.begin(), labels.end(), label) != labels.end(); }

  std::size_t index(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) fail(ErrorKind::MissingModes, "mode '" + label + "' not present in covariance");
    return static_cast<std::size_t>(it - labels.begin());
  }

  Eigen::Matrix2d block(const std::string& a, const std::string& b) const {
    return sigma.block<2, 2>(2 * index(a), 2 * index(b));
  }

  Eigen::RowVectorXd selector_row(const QuadratureSelector& q) const {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(sigma.cols());
    row.segment<2>(2 * index(q.mode)) = quadrature_row(q.angle);
    return row;
  }

  double covariance(const QuadratureSelector& a, const QuadratureSelector& b) const {
    return (selector_row(a) * sigma * selector_row(b).transpose())(0, 0);
  }

  double standard_error(const QuadratureSelector& a, const QuadratureSelector& b) const {
    if (!standard_errors) return 0.0;
    const std::size_t ia = 2 * index(a.mode) + (a.angle == 0.0 ? 0 : 1);
    const std::size_t ib = 2 * index(b.mode) + (b.angle == 0.0 ? 0 : 1);
    return (*standard_errors)(ia, ib);
  }

  OutputCovariance subset(const std::vector<std::string>& keep) const {
    OutputCovariance out;
    out.labels = keep;
    out.trajectories = trajectories;
    const auto m = static_cast<Eigen::Index>(keep.size());
    out.sigma.resize(2 * m, 2 * m);
    if (standard_errors) out.standard_errors = Eigen::MatrixXd(2 * m, 2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto si = static_cast<Eigen::Index>(2 * index(keep[i]));
        const auto sj = static_cast<Eigen::Index>(2 * index(keep[j]));
        out.sigma.block<2, 2>(2 * i, 2 * j) = sigma.block<2, 2>(si, sj);
        if (standard_errors) out.standard_errors->block<2, 2>(2 * i, 2 * j) = standard_errors->block<2, 2>(si, sj);
      }
    }
    return out;
  }
};

// Appends a mode defined as a linear combination of existing modes. Standard
// errors of the new entries (Monte Carlo input only) follow Gaussian sampling
// theory, Var(S_ab) = (S_aa S_bb + S_ab^2) / N.
inline OutputCovariance combine_modes(const OutputCovariance& oc, const std::string& label,
                                      const std::vector<ModeTerm>& terms) {
  const Eigen::Index d = oc.sigma.rows();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, d);
  for (const auto& t : terms) {
    const Eigen::Matrix2d map = t.conjugate ? conjugate_complex_map(t.coefficient) : complex_map(t.coefficient);
    rows.middleCols<2>(2 * static_cast<Eigen::Index>(oc.index(t.source))) += map;
  }
  Eigen::MatrixXd transform(d + 2, d);
  transform.topRows(d).setIdentity();
  transform.bottomRows(2) = rows;

  OutputCovariance out;
  out.labels = oc.labels;
  out.labels.push_back(label);
  out.sigma = transform * oc.sigma * transform.transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.trajectories = oc.trajectories;
  if (oc.standard_errors) {
    Eigen::MatrixXd se(d + 2, d + 2);
    se.topLeftCorner(d, d) = *oc.standard_errors;
    const double count = static_cast<double>(std::max<long>(oc.trajectories, 1));
    for (Eigen::Index i = 0; i < d + 2; ++i) {
      for (Eigen::Index j = d; j < d + 2; ++j) {
        const double v = out.sigma(i, i) * out.sigma(j, j) + out.sigma(i, j) * out.sigma(i, j);
        se(i, j) = se(j, i) = std::sqrt(v / count);
      }
    }
    out.standard_errors = se;
  }
  return out;
}

struct CrossMoment {
  cplx value{};
  // Standard error of |value| (Monte Carlo input only), from Gaussian theory.
  double abs_standard_error = 0.0;
};

// <a^dag b> for two distinct modes a and b.
inline CrossMoment cross_moment(const OutputCovariance& oc, const std::string& a, const std::string& b) {
  const auto xa = static_cast<Eigen::Index>(2 * oc.index(a));
  const auto xb = static_cast<Eigen::Index>(2 * oc.index(b));
  const Eigen::Index pa = xa + 1, pb = xb + 1;
  const Eigen::MatrixXd& S = oc.sigma;
  struct Product {
    double weight;
    Eigen::Index i, j;
  };
  const std::vector<Product> re{{0.5, xa, xb}, {0.5, pa, pb}};
  const std::vector<Product> im{{0.5, xa, pb}, {-0.5, pa, xb}};
  auto value = [&](const std::vector<Product>& t) {
    double v = 0.0;
    for (const auto& p : t) v += p.weight * S(p.i, p.j);
    return v;
  };
  // Cov(y_i y_j, y_k y_l) = S_ik S_jl + S_il S_jk for zero-mean Gaussians.
  auto cov = [&](const std::vector<Product>& t1, const std::vector<Product>& t2) {
    double v = 0.0;
    for (const auto& p : t1)
      for (const auto& q : t2) v += p.weight * q.weight * (S(p.i, q.i) * S(p.j, q.j) + S(p.i, q.j) * S(p.j, q.i));
    return v;
  };
  CrossMoment out;
  out.value = {value(re), value(im)};
  const double mag = std::abs(out.value);
  if (oc.standard_errors && oc.trajectories > 0 && mag > 0.0) {
    const double vr = out.value.real(), vi = out.value.imag();
    const double var = (vr * vr * cov(re, re) + vi * vi * cov(im, im) + 2.0 * vr * vi * cov(re, im)) / (mag * mag);
    out.abs_standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(oc.trajectories));
  }
  return out;
}

// Symplectic spectrum of a covariance matrix over 2x2 blocks [[0,1],[-1,0]],
// sorted ascending: the moduli of the eigenvalues +-i nu of Omega sigma.
// Working on Omega sigma directly avoids squaring the condition number.
inline Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& sigma) {
  const Eigen::Index d = sigma.rows();
  const Eigen::Index modes = d / 2;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  // Indefinite beyond round-off: no symplectic spectrum, report zeros.
  const Eigen::VectorXd plain = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues();
  if (plain.minCoeff() < -64.0 * std::numeric_limits<double>::epsilon() * plain.cwiseAbs().maxCoeff())
    return Eigen::VectorXd::Zero(modes);
  Eigen::EigenSolver<Eigen::MatrixXd> es(omega * sym, false);
  Eigen::VectorXd all = es.eigenvalues().cwiseAbs();
  std::sort(all.begin(), all.end());
  Eigen::VectorXd nu(modes);
  for (Eigen::Index k = 0; k < modes; ++k) nu(k) = all(2 * k);
  return nu;
}

inline double min_symplectic_eigenvalue(const Eigen::MatrixXd& sigma) {
  return symplectic_eigenvalues(sigma).minCoeff();
}

inline bool is_physical(const Eigen::MatrixXd& sigma, double tol = 1e-9) {
  return min_symplectic_eigenvalue(sigma) >= vacuum_variance - tol;
}

// Label groups of a covariance whose modes are mutually canonical, so that
// the uncertainty bound applies to their joint covariance: the output modes
// A_m^out, A_j^out; each family of input-noise filters; and every mode alone.
// Filters of input noise do not commute with the outputs, and W/U contain
// such a filter, so they are only grouped with each other when they can be
// checked as single modes.
inline std::vector<std::vector<std::string>> canonical_groups(const OutputCovariance& oc) {
  const std::vector<std::vector<std::string>> families{
      {"Am_out", "A1_out", "A2_out"}, {"At1_in", "At2_in", "Bt_m"}, {"A1_in", "A2_in", "B_m"}};
  std::vector<std::vector<std::string>> groups;
  for (const auto& fam : families) {
    std::vector<std::string> present;
    for (const auto& l : fam)
      if (oc.has(l)) present.push_back(l);
    if (present.size() > 1) groups.push_back(present);
  }
  for (const auto& l : oc.labels) groups.push_back({l});
  return groups;
}

// Smallest symplectic eigenvalue over all canonical groups.
inline double min_canonical_symplectic_eigenvalue(const OutputCovariance& oc) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& g : canonical_groups(oc)) lowest = std::min(lowest, min_symplectic_eigenvalue(oc.subset(g).sigma));
  return lowest;
}

}  // namespace steerkit
