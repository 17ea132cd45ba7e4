#pragma once

// Linear quantum Langevin models over quadratures, normalized temporal pulse
// modes, and deterministic propagation of second moments through them.
//
// A model state y (quadratures of all intracavity/mirror modes) obeys
//   dy = A y dt + B dW,   <dW dW^T> = diag(q) dt,
// where q holds the symmetrically ordered intensity of each white-noise
// quadrature (1/2 for vacuum, n + 1/2 for a thermal bath). Each output port is
// an affine combination C y + D dW/dt. A temporal mode integrates
// w(t) (C y + D dW/dt) over [0, tau]; appending one accumulator per mode gives
// a linear system whose Lyapunov equation yields all output moments exactly.

#include "steerkit/covariance.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/model.hpp"
#include "steerkit/quadrature.hpp"

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

namespace steerkit {

struct NoiseChannel {
  std::string id;
  double occupation = 0.0;

  double intensity() const { return occupation + 0.5; }
};

// A propagating field available for filtering, as a map from (state, noise).
struct OutputPort {
  std::string id;
  Eigen::MatrixXd state_map;  // 2 x 2*dimension
  Eigen::MatrixXd noise_map;  // 2 x 2*channels
};

struct LinearModel {
  std::string kind;
  std::vector<std::string> mode_ids;
  Eigen::MatrixXd drift;
  Eigen::MatrixXd noise_input;
  std::vector<NoiseChannel> noise_channels;
  Eigen::MatrixXd initial_covariance;
  std::vector<OutputPort> ports;
  std::string mirror_mode = "b";
  // The mirror output amplitude is b(tau) e^{-i rotation tau}.
  double mirror_rotation = 0.0;

  std::size_t dimension() const { return mode_ids.size(); }

  std::size_t mode_index(const std::string& id) const {
    for (std::size_t i = 0; i < mode_ids.size(); ++i)
      if (mode_ids[i] == id) return i;
    fail(ErrorKind::MissingModes, "model has no mode '" + id + "'");
  }

  const OutputPort& port(const std::string& id) const {
    for (const auto& p : ports)
      if (p.id == id) return p;
    fail(ErrorKind::MissingModes, "model has no port '" + id + "'");
  }

  // Per-quadrature white-noise intensities, two entries per channel.
  Eigen::VectorXd noise_intensities() const {
    Eigen::VectorXd q(2 * noise_channels.size());
    for (std::size_t c = 0; c < noise_channels.size(); ++c) q(2 * c) = q(2 * c + 1) = noise_channels[c].intensity();
    return q;
  }

  Eigen::MatrixXd diffusion() const {
    return noise_input * noise_intensities().asDiagonal() * noise_input.transpose();
  }
};

enum class KernelSide { Input, Output };

// Contribution normalization * coefficient * e^{rate t} * s(t), where s is the
// port signal or its adjoint.
struct KernelTerm {
  std::string port;
  cplx coefficient{1.0, 0.0};
  cplx rate{0.0, 0.0};
  bool conjugate = false;
};

struct TemporalKernel {
  std::string mode_id;
  KernelSide side = KernelSide::Output;
  double normalization = 1.0;
  std::vector<KernelTerm> terms;

  cplx weight(std::size_t term, double t) const {
    const auto& k = terms.at(term);
    return normalization * k.coefficient * std::exp(k.rate * t);
  }
  // Leading term's exponent and phase.
  cplx rate() const { return terms.at(0).rate; }
  cplx phase() const { return terms.at(0).coefficient; }

  // Commutator norm [A, A^dag] on [0, tau]: squared L2 norms of the weights,
  // counted negative for adjoint terms. Single-port modes reduce to the plain
  // L2 norm; every mode built below has norm 1.
  double norm_squared(double tau) const {
    double total = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const double c2 = std::norm(normalization * terms[k].coefficient);
      const double a = 2.0 * terms[k].rate.real();
      total += (terms[k].conjugate ? -c2 : c2) * (a == 0.0 ? tau : std::expm1(a * tau) / a);
    }
    return total;
  }
};

namespace dynamics_detail {

inline constexpr int s_sign(int j) { return j == 1 ? -1 : 1; }

inline Eigen::MatrixXd place(Eigen::Index rows, Eigen::Index cols, Eigen::Index at, const Eigen::Matrix2d& block) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  m.middleCols<2>(at) = block;
  return m;
}

inline std::string cavity(int j, const char* suffix) { return "a" + std::to_string(j) + suffix; }

}  // namespace dynamics_detail

// Three-mode rotating-frame model over (a1, a2, b).
inline LinearModel build_full_model(const ReducedParams& rp) {
  validate(rp);
  using dynamics_detail::place;
  LinearModel m;
  m.kind = "full";
  m.mode_ids = {"a1", "a2", "b"};
  m.mirror_mode = "b";
  m.drift = Eigen::MatrixXd::Zero(6, 6);
  const double gj[2] = {rp.g1, rp.g2};
  for (int j = 0; j < 2; ++j) {
    const double sign = j == 0 ? 1.0 : -1.0;
    m.drift.block<2, 2>(2 * j, 2 * j) = complex_map(-cplx(rp.kappa, sign * rp.Delta));
    m.drift.block<2, 2>(2 * j, 4) = conjugate_complex_map(cplx(0.0, -gj[j]));
    m.drift.block<2, 2>(4, 2 * j) = conjugate_complex_map(cplx(0.0, -gj[j]));
  }
  m.drift.block<2, 2>(4, 4) = complex_map(-rp.gamma);

  m.noise_channels = {{"a1_in", 0.0}, {"a2_in", 0.0}, {"b_in", rp.n}};
  m.noise_input = Eigen::MatrixXd::Zero(6, 6);
  m.noise_input.block<2, 2>(0, 0) = -std::sqrt(2.0 * rp.kappa) * Eigen::Matrix2d::Identity();
  m.noise_input.block<2, 2>(2, 2) = -std::sqrt(2.0 * rp.kappa) * Eigen::Matrix2d::Identity();
  m.noise_input.block<2, 2>(4, 4) = -std::sqrt(2.0 * rp.gamma) * Eigen::Matrix2d::Identity();

  m.initial_covariance = Eigen::MatrixXd::Identity(6, 6) * vacuum_variance;
  m.initial_covariance.block<2, 2>(4, 4) *= (2.0 * rp.n0 + 1.0);

  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  for (int j = 1; j <= 2; ++j) {
    const Eigen::Index c = 2 * (j - 1);
    m.ports.push_back({dynamics_detail::cavity(j, "_in"), Eigen::MatrixXd::Zero(2, 6), place(2, 6, c, id)});
    // a_out = a_in + sqrt(2 kappa) a
    m.ports.push_back({dynamics_detail::cavity(j, "_out"), place(2, 6, c, std::sqrt(2.0 * rp.kappa) * id),
                       place(2, 6, c, id)});
  }
  m.ports.push_back({"b_in", Eigen::MatrixXd::Zero(2, 6), place(2, 6, 4, id)});
  m.mirror_rotation = (rp.g1 * rp.g1 - rp.g2 * rp.g2) * rp.Delta / (rp.kappa * rp.kappa + rp.Delta * rp.Delta);
  return m;
}

// Mirror-only model with the cavities adiabatically eliminated.
inline LinearModel build_reduced_model(const ReducedParams& rp) {
  using dynamics_detail::place;
  using dynamics_detail::s_sign;
  const DerivedQuantities dq = derived_quantities(rp);
  const cplx i(0.0, 1.0);
  LinearModel m;
  m.kind = "reduced";
  m.mode_ids = {"b"};
  m.mirror_mode = "b";
  m.drift = complex_map(cplx(dq.G, dq.delta));

  m.noise_channels = {{"a1_in", 0.0}, {"a2_in", 0.0}, {"b_in", rp.n}};
  m.noise_input = Eigen::MatrixXd::Zero(2, 6);
  m.noise_input.middleCols<2>(0) = conjugate_complex_map(i * std::sqrt(2.0 * dq.G1) * std::exp(i * dq.phi));
  m.noise_input.middleCols<2>(2) = conjugate_complex_map(i * std::sqrt(2.0 * dq.G2) * std::exp(-i * dq.phi));
  m.noise_input.middleCols<2>(4) = complex_map(-std::sqrt(2.0 * dq.gamma));

  m.initial_covariance = Eigen::MatrixXd::Identity(2, 2) * (rp.n0 + 0.5);

  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  for (int j = 1; j <= 2; ++j) {
    const Eigen::Index c = 2 * (j - 1);
    const double Gj = j == 1 ? dq.G1 : dq.G2;
    const double s = s_sign(j);
    m.ports.push_back({dynamics_detail::cavity(j, "_in"), Eigen::MatrixXd::Zero(2, 2), place(2, 6, c, id)});
    // a_out = -e^{2 s i phi} a_in - i sqrt(2 G_j) e^{s i phi} b^dag
    m.ports.push_back({dynamics_detail::cavity(j, "_out"),
                       conjugate_complex_map(-i * std::sqrt(2.0 * Gj) * std::exp(s * i * dq.phi)),
                       place(2, 6, c, complex_map(-std::exp(2.0 * s * i * dq.phi)))});
  }
  m.ports.push_back({"b_in", Eigen::MatrixXd::Zero(2, 2), place(2, 6, 4, id)});
  m.mirror_rotation = dq.delta;
  return m;
}

// Standard pulse modes. Names: A1_out, A2_out, At1_in, At2_in, Bt_m (output
// side, growing weights) and A1_in, A2_in, B_m (input side, decaying weights);
// W_out, U_out, Wt_in, Ut_in are the collective combinations as single
// multi-term kernels.
inline TemporalKernel standard_kernel(const std::string& name, const DerivedQuantities& dq) {
  require(dq.G > 0.0, ErrorKind::GainNotPositive, "temporal modes need a positive net gain");
  require(dq.tau > 0.0, ErrorKind::InvalidParams, "temporal modes need a positive pulse length");
  using dynamics_detail::s_sign;
  const cplx i(0.0, 1.0);
  const double tau = dq.tau;
  const double two_r = 2.0 * dq.G * tau;
  const double n_out = std::sqrt(2.0 * dq.G / std::expm1(two_r));
  const double n_in = std::sqrt(2.0 * dq.G / -std::expm1(-two_r));
  const cplx grow_plus(dq.G, dq.delta);    // G + i delta
  const cplx grow_minus(dq.G, -dq.delta);  // G - i delta

  TemporalKernel k;
  k.mode_id = name;
  auto phase = [&](int j, int sign) { return std::exp(static_cast<double>(sign * s_sign(j)) * i * dq.phi); };

  for (int j = 1; j <= 2; ++j) {
    const std::string js = std::to_string(j);
    if (name == "A" + js + "_out") {
      k.side = KernelSide::Output;
      k.normalization = n_out;
      k.terms = {{"a" + js + "_out", phase(j, -1), grow_plus, false}};
      return k;
    }
    if (name == "At" + js + "_in") {
      k.side = KernelSide::Output;
      k.normalization = n_out;
      k.terms = {{"a" + js + "_in", phase(j, 1), grow_plus, false}};
      return k;
    }
    if (name == "A" + js + "_in") {
      k.side = KernelSide::Input;
      k.normalization = n_in;
      k.terms = {{"a" + js + "_in", phase(j, 1), -grow_minus, false}};
      return k;
    }
  }
  if (name == "Bt_m") {
    k.side = KernelSide::Output;
    k.normalization = n_out;
    k.terms = {{"b_in", 1.0, grow_minus, false}};
    return k;
  }
  if (name == "B_m") {
    k.side = KernelSide::Input;
    k.normalization = n_in;
    k.terms = {{"b_in", 1.0, -grow_plus, false}};
    return k;
  }
  const double w1 = std::sqrt(dq.G1 / dq.G);
  const double w2 = std::sqrt(dq.G2 / dq.G);
  const double wb = std::sqrt(dq.gamma / dq.G);
  // B_tilde^dag carries the conjugate weight e^{(G + i delta) t}.
  if (name == "W_out" || name == "U_out") {
    const bool w = name == "W_out";
    k.side = KernelSide::Output;
    k.normalization = n_out;
    k.terms = {{"a1_out", (w ? w1 : w2) * phase(1, -1), grow_plus, false},
               {"a2_out", (w ? w2 : -w1) * phase(2, -1), grow_plus, false},
               {"b_in", i * wb, grow_plus, true}};
    return k;
  }
  if (name == "Wt_in" || name == "Ut_in") {
    const bool w = name == "Wt_in";
    k.side = KernelSide::Output;
    k.normalization = n_out;
    k.terms = {{"a1_in", (w ? w1 : w2) * phase(1, 1), grow_plus, false},
               {"a2_in", (w ? w2 : -w1) * phase(2, 1), grow_plus, false},
               {"b_in", -i * wb, grow_plus, true}};
    return k;
  }
  fail(ErrorKind::MissingModes, "unknown temporal mode '" + name + "'");
}

inline std::vector<TemporalKernel> standard_kernels(const std::vector<std::string>& names, const DerivedQuantities& dq) {
  std::vector<TemporalKernel> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(standard_kernel(n, dq));
  return out;
}

// The constituents of the collective output modes.
inline std::vector<TemporalKernel> output_kernels(const DerivedQuantities& dq) {
  return standard_kernels({"A1_out", "A2_out", "Bt_m"}, dq);
}

inline const std::string mirror_output_label = "Am_out";

// Augmented linear system: model state followed by one (X, P) accumulator per
// kernel. Drift and noise input are time dependent through the kernel weights.
class AugmentedSystem {
 public:
  AugmentedSystem(const LinearModel& model, const std::vector<TemporalKernel>& kernels)
      : model_(model), kernels_(kernels) {
    d_ = static_cast<Eigen::Index>(2 * model.dimension());
    k_ = static_cast<Eigen::Index>(2 * model.noise_channels.size());
    m_ = d_ + 2 * static_cast<Eigen::Index>(kernels.size());
    require(model.drift.rows() == d_ && model.drift.cols() == d_, ErrorKind::InvalidParams, "drift shape mismatch");
    require(model.noise_input.rows() == d_ && model.noise_input.cols() == k_, ErrorKind::InvalidParams,
            "noise input shape mismatch");
    for (std::size_t kk = 0; kk < kernels.size(); ++kk) {
      for (const auto& term : kernels[kk].terms) {
        const OutputPort& p = model.port(term.port);
        const Eigen::Matrix2d pre = term.conjugate ? conjugation_map() : Eigen::Matrix2d::Identity();
        terms_.push_back({kk, &term, pre * p.state_map, pre * p.noise_map});
      }
    }
    q_sqrt_ = model.noise_intensities().cwiseSqrt();
  }

  Eigen::Index state_size() const { return m_; }
  Eigen::Index model_size() const { return d_; }
  Eigen::Index noise_size() const { return k_; }
  const Eigen::VectorXd& noise_intensity_roots() const { return q_sqrt_; }

  void matrices(double t, Eigen::MatrixXd& M, Eigen::MatrixXd& N) const {
    M.setZero(m_, m_);
    N.setZero(m_, k_);
    M.topLeftCorner(d_, d_) = model_.drift;
    N.topRows(d_) = model_.noise_input;
    for (const auto& term : terms_) {
      const Eigen::Matrix2d w =
          complex_map(kernels_[term.kernel].normalization * term.spec->coefficient * std::exp(term.spec->rate * t));
      const Eigen::Index row = d_ + 2 * static_cast<Eigen::Index>(term.kernel);
      M.block(row, 0, 2, d_) += w * term.state_map;
      N.middleRows(row, 2) += w * term.noise_map;
    }
  }

  Eigen::MatrixXd initial_covariance() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m_, m_);
    s.topLeftCorner(d_, d_) = model_.initial_covariance;
    return s;
  }

  // Map from the augmented state at tau to (A_m^out, kernel modes...).
  Eigen::MatrixXd readout(double tau) const {
    const Eigen::Index outs = 2 + 2 * static_cast<Eigen::Index>(kernels_.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(outs, m_);
    const auto b = static_cast<Eigen::Index>(2 * model_.mode_index(model_.mirror_mode));
    L.block<2, 2>(0, b) = complex_map(std::exp(cplx(0.0, -model_.mirror_rotation * tau)));
    L.bottomRightCorner(outs - 2, m_ - d_).setIdentity();
    return L;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out{mirror_output_label};
    for (const auto& k : kernels_) out.push_back(k.mode_id);
    return out;
  }

 private:
  struct Term {
    std::size_t kernel;
    const KernelTerm* spec;
    Eigen::MatrixXd state_map;
    Eigen::MatrixXd noise_map;
  };

  const LinearModel& model_;
  const std::vector<TemporalKernel>& kernels_;
  std::vector<Term> terms_;
  Eigen::VectorXd q_sqrt_;
  Eigen::Index d_ = 0, k_ = 0, m_ = 0;
};

struct PropagationOptions {
  double tol = 1e-9;
  long max_steps = 5'000'000;
  // Relative errors of the large (amplified) moments leak into the squeezed
  // directions. While the result misses physicality by more than
  // physicality_slack, the run is repeated with tol / 10, down to tol_floor.
  double physicality_slack = 2e-10;
  double tol_floor = 1e-14;
};

namespace dynamics_detail {

inline OutputCovariance integrate_once(const AugmentedSystem& sys, double tau, double tol, long max_steps) {
  const Eigen::Index m = sys.state_size();

  using State = std::vector<double>;
  State y(static_cast<std::size_t>(m * m));
  Eigen::Map<Eigen::MatrixXd>(y.data(), m, m) = sys.initial_covariance();

  Eigen::MatrixXd M, N;
  auto rhs = [&](const State& s, State& ds, double t) {
    sys.matrices(t, M, N);
    Eigen::Map<const Eigen::MatrixXd> S(s.data(), m, m);
    Eigen::Map<Eigen::MatrixXd> dS(ds.data(), m, m);
    const Eigen::MatrixXd MS = M * S;
    const Eigen::MatrixXd Nq = N * sys.noise_intensity_roots().asDiagonal();
    dS = MS + MS.transpose();
    dS.noalias() += Nq * Nq.transpose();
  };

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(tol * 1e-2, tol, ode::runge_kutta_dopri5<State>());
  double t = 0.0;
  double dt = tau / 64.0;
  const double min_dt = 1e-14 * std::max(tau, 1e-300);
  long steps = 0;
  while (tau - t > 1e-13 * tau) {
    if (t + dt > tau) dt = tau - t;
    if (stepper.try_step(rhs, y, t, dt) == ode::fail) {
      if (dt < min_dt) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t << " of " << tau;
        fail(ErrorKind::IntegratorFailure, msg.str());
      }
      continue;
    }
    if (++steps > max_steps) fail(ErrorKind::IntegratorFailure, "step budget exhausted");
  }
  for (double v : y)
    if (!std::isfinite(v)) fail(ErrorKind::IntegratorFailure, "non-finite moments");

  const Eigen::Map<const Eigen::MatrixXd> S(y.data(), m, m);
  const Eigen::MatrixXd L = sys.readout(tau);
  OutputCovariance oc;
  oc.labels = sys.labels();
  oc.sigma = L * S * L.transpose();
  oc.sigma = 0.5 * (oc.sigma + oc.sigma.transpose()).eval();
  return oc;
}

}  // namespace dynamics_detail

// Integrates dS/dt = M S + S M^T + N diag(q) N^T for the augmented system with
// an adaptive Dormand-Prince 5(4) pair.
inline OutputCovariance propagate_output_covariance(const LinearModel& model, const std::vector<TemporalKernel>& kernels,
                                                    double tau, const PropagationOptions& opts = {}) {
  require(std::isfinite(tau) && tau >= 0.0, ErrorKind::InvalidParams, "tau must be >= 0");
  require(opts.tol > 0.0, ErrorKind::InvalidParams, "tol must be positive");
  const AugmentedSystem sys(model, kernels);
  double tol = opts.tol;
  OutputCovariance oc = dynamics_detail::integrate_once(sys, tau, tol, opts.max_steps);
  while (tol > opts.tol_floor && min_canonical_symplectic_eigenvalue(oc) < 0.5 - opts.physicality_slack) {
    tol = std::max(tol * 0.1, opts.tol_floor);
    oc = dynamics_detail::integrate_once(sys, tau, tol, opts.max_steps);
  }
  return oc;
}

// Appends W_out and U_out built from A1_out, A2_out and Bt_m.
inline OutputCovariance collective_transform(const OutputCovariance& oc, const DerivedQuantities& dq) {
  for (const char* need : {"A1_out", "A2_out", "Bt_m"})
    if (!oc.has(need)) fail(ErrorKind::MissingModes, std::string("collective transform needs ") + need);
  require(dq.G > 0.0, ErrorKind::GainNotPositive, "collective modes need a positive net gain");
  const double w1 = std::sqrt(dq.G1 / dq.G);
  const double w2 = std::sqrt(dq.G2 / dq.G);
  const cplx wb(0.0, std::sqrt(dq.gamma / dq.G));
  OutputCovariance out = combine_modes(oc, "W_out", {{"A1_out", w1, false}, {"A2_out", w2, false}, {"Bt_m", wb, true}});
  return combine_modes(out, "U_out", {{"A1_out", w2, false}, {"A2_out", -w1, false}, {"Bt_m", wb, true}});
}

// Input-side counterpart: appends Ut_in from At1_in, At2_in and Bt_m.
inline OutputCovariance collective_input_transform(const OutputCovariance& oc, const DerivedQuantities& dq) {
  for (const char* need : {"At1_in", "At2_in", "Bt_m"})
    if (!oc.has(need)) fail(ErrorKind::MissingModes, std::string("input transform needs ") + need);
  require(dq.G > 0.0, ErrorKind::GainNotPositive, "collective modes need a positive net gain");
  const double w1 = std::sqrt(dq.G1 / dq.G);
  const double w2 = std::sqrt(dq.G2 / dq.G);
  const cplx wb(0.0, -std::sqrt(dq.gamma / dq.G));
  return combine_modes(oc, "Ut_in", {{"At1_in", w2, false}, {"At2_in", -w1, false}, {"Bt_m", wb, true}});
}

}  // namespace steerkit
