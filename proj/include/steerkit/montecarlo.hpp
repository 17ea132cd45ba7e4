#pragma once

// Stochastic estimate of output covariances from classical Gaussian
// trajectories of the augmented linear system.
//
// Each step applies the stochastic Heun (trapezoidal predictor-corrector)
// update, which for a linear system with additive noise is the affine map
//   y' = Phi_n y + Psi_n dW,
//   Phi_n = I + dt/2 (M_n + M_{n+1}) + dt^2/2 M_{n+1} M_n,
//   Psi_n = (N_n + N_{n+1})/2 + dt/2 M_{n+1} N_n.
// The covariance this scheme produces can be iterated exactly, which is what
// the automatic step selection compares against.

#include "steerkit/covariance.hpp"
#include "steerkit/dynamics.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace steerkit {

struct MonteCarloOptions {
  int steps = 0;  // 0 selects the step count automatically
  unsigned threads = 1;
  // Largest admissible standard error relative to sqrt(S_ii S_jj).
  double max_relative_standard_error = std::numeric_limits<double>::infinity();
};

inline constexpr long min_trajectories = 1000;

struct HeunScheme {
  double dt = 0.0;
  std::vector<Eigen::MatrixXd> phi;
  std::vector<Eigen::MatrixXd> psi;
  Eigen::MatrixXd initial;
  Eigen::MatrixXd readout;
  Eigen::VectorXd noise_intensities;
  std::vector<std::string> labels;
  Eigen::Index model_size = 0;  // accumulators follow the model state and start at 0
};

inline HeunScheme heun_scheme(const LinearModel& model, const std::vector<TemporalKernel>& kernels, double tau,
                              int steps) {
  require(steps >= 1, ErrorKind::InvalidParams, "step count must be >= 1");
  require(std::isfinite(tau) && tau > 0.0, ErrorKind::InvalidParams, "tau must be positive");
  const AugmentedSystem sys(model, kernels);
  HeunScheme h;
  h.dt = tau / steps;
  h.initial = sys.initial_covariance();
  h.readout = sys.readout(tau);
  h.noise_intensities = model.noise_intensities();
  h.labels = sys.labels();
  h.model_size = sys.model_size();
  const Eigen::Index m = sys.state_size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd M0, N0, M1, N1;
  sys.matrices(0.0, M0, N0);
  h.phi.reserve(steps);
  h.psi.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    sys.matrices((s + 1) * h.dt, M1, N1);
    h.phi.push_back(I + 0.5 * h.dt * (M0 + M1) + 0.5 * h.dt * h.dt * M1 * M0);
    h.psi.push_back(0.5 * (N0 + N1) + 0.5 * h.dt * M1 * N0);
    std::swap(M0, M1);
    std::swap(N0, N1);
  }
  return h;
}

// Output covariance the scheme converges to with infinitely many trajectories.
inline Eigen::MatrixXd heun_covariance(const HeunScheme& h) {
  Eigen::MatrixXd s = h.initial;
  const Eigen::VectorXd q = h.noise_intensities * h.dt;
  for (std::size_t n = 0; n < h.phi.size(); ++n) {
    s = (h.phi[n] * s * h.phi[n].transpose()).eval();
    s.noalias() += h.psi[n] * q.asDiagonal() * h.psi[n].transpose();
  }
  return h.readout * s * h.readout.transpose();
}

// Smallest power-of-two step count for which doubling the resolution moves
// every output moment by less than a quarter of its expected standard error.
inline int choose_monte_carlo_steps(const LinearModel& model, const std::vector<TemporalKernel>& kernels, double tau,
                                    long trajectories, int max_steps = 1 << 15) {
  int steps = 16;
  Eigen::MatrixXd coarse = heun_covariance(heun_scheme(model, kernels, tau, steps));
  while (steps < max_steps) {
    const Eigen::MatrixXd fine = heun_covariance(heun_scheme(model, kernels, tau, 2 * steps));
    bool converged = true;
    for (Eigen::Index i = 0; i < fine.rows() && converged; ++i) {
      for (Eigen::Index j = 0; j < fine.cols(); ++j) {
        const double se = std::sqrt((fine(i, i) * fine(j, j) + fine(i, j) * fine(i, j)) / trajectories);
        if (std::abs(fine(i, j) - coarse(i, j)) > 0.25 * se) {
          converged = false;
          break;
        }
      }
    }
    if (converged) return steps;
    steps *= 2;
    coarse = fine;
  }
  return steps;
}

namespace montecarlo_detail {

inline constexpr long block_size = 256;

struct Sums {
  Eigen::MatrixXd second;  // sum of y_i y_j
  Eigen::MatrixXd fourth;  // sum of (y_i y_j)^2

  void add(const Sums& o) {
    second += o.second;
    fourth += o.fourth;
  }
};

inline std::mt19937_64 trajectory_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Pairwise reduction in a fixed tree over block index.
inline Sums reduce(std::vector<Sums>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Sums left = reduce(blocks, lo, mid);
  left.add(reduce(blocks, mid, hi));
  return left;
}

}  // namespace montecarlo_detail

// Sample second moments (the exact means are zero) over `trajectories`
// independent paths. Path k draws from its own generator seeded by (seed, k),
// and per-block partial sums are combined in a fixed order, so the result is
// bit-identical for any thread count.
inline OutputCovariance monte_carlo_output_covariance(const LinearModel& model,
                                                      const std::vector<TemporalKernel>& kernels, double tau,
                                                      long trajectories, std::uint64_t seed,
                                                      const MonteCarloOptions& opts = {}) {
  using namespace montecarlo_detail;
  if (trajectories < min_trajectories) {
    std::ostringstream msg;
    msg << trajectories << " trajectories requested, at least " << min_trajectories << " required";
    fail(ErrorKind::InsufficientTrajectories, msg.str());
  }
  const int steps = opts.steps > 0 ? opts.steps : choose_monte_carlo_steps(model, kernels, tau, trajectories);
  const HeunScheme h = heun_scheme(model, kernels, tau, steps);
  const Eigen::Index m = h.initial.rows();
  const Eigen::Index k = h.noise_intensities.size();
  const Eigen::Index outs = h.readout.rows();
  const Eigen::Index d = h.model_size;
  const Eigen::MatrixXd chol = h.initial.topLeftCorner(d, d).llt().matrixL();
  const Eigen::VectorXd noise_scale = (h.noise_intensities * h.dt).cwiseSqrt();

  const long block_count = (trajectories + block_size - 1) / block_size;
  std::vector<Sums> blocks(static_cast<std::size_t>(block_count));
  parallel_for(static_cast<std::size_t>(block_count), opts.threads, [&](std::size_t b) {
    Sums sums{Eigen::MatrixXd::Zero(outs, outs), Eigen::MatrixXd::Zero(outs, outs)};
    Eigen::VectorXd y(m), next(m), z(d), dw(k), o(outs);
    const long first = static_cast<long>(b) * block_size;
    const long last = std::min(trajectories, first + block_size);
    for (long path = first; path < last; ++path) {
      auto engine = trajectory_engine(seed, static_cast<std::uint64_t>(path));
      std::normal_distribution<double> normal;
      for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(engine);
      y.setZero();
      y.head(d).noalias() = chol * z;
      for (int s = 0; s < steps; ++s) {
        for (Eigen::Index i = 0; i < k; ++i) dw(i) = noise_scale(i) * normal(engine);
        next.noalias() = h.phi[s] * y;
        next.noalias() += h.psi[s] * dw;
        y.swap(next);
      }
      o.noalias() = h.readout * y;
      const Eigen::MatrixXd prod = o * o.transpose();
      sums.second += prod;
      sums.fourth += prod.cwiseProduct(prod);
    }
    blocks[b] = std::move(sums);
  });
  const Sums total = reduce(blocks, 0, blocks.size());

  const double count = static_cast<double>(trajectories);
  OutputCovariance oc;
  oc.labels = h.labels;
  oc.trajectories = trajectories;
  oc.sigma = total.second / count;
  Eigen::MatrixXd se(outs, outs);
  for (Eigen::Index i = 0; i < outs; ++i)
    for (Eigen::Index j = 0; j < outs; ++j) {
      const double mean = oc.sigma(i, j);
      se(i, j) = std::sqrt(std::max(total.fourth(i, j) / count - mean * mean, 0.0) / count);
    }
  oc.standard_errors = se;

  if (std::isfinite(opts.max_relative_standard_error)) {
    for (Eigen::Index i = 0; i < outs; ++i)
      for (Eigen::Index j = 0; j < outs; ++j) {
        const double scale = std::sqrt(oc.sigma(i, i) * oc.sigma(j, j));
        if (se(i, j) > opts.max_relative_standard_error * scale) {
          std::ostringstream msg;
          msg << "relative standard error " << se(i, j) / scale << " exceeds bound "
              << opts.max_relative_standard_error << " with " << trajectories << " trajectories";
          fail(ErrorKind::InsufficientTrajectories, msg.str());
        }
      }
  }
  return oc;
}

}  // namespace steerkit
