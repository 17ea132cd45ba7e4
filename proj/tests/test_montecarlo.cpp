#include "model_grid.hpp"
#include "test_support.hpp"

#include "steerkit/covariance.hpp"
#include "steerkit/dynamics.hpp"
#include "steerkit/montecarlo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace steerkit;
using namespace steerkit::test;

namespace {

// Worst |MC - exact| / SE over every entry of the sample covariance.
double worst_z(const OutputCovariance& mc, const Eigen::MatrixXd& exact) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < exact.rows(); ++i)
    for (Eigen::Index j = 0; j < exact.cols(); ++j) {
      const double se = (*mc.standard_errors)(i, j);
      worst = std::max(worst, std::abs(mc.sigma(i, j) - exact(i, j)) / se);
    }
  return worst;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(HeunScheme, ConvergesToPropagation) {
  const ReducedParams rp = reduced_params({1.0, 0.1, 0.5, 5.0, 2.0});
  const DerivedQuantities dq = derived_quantities(rp);
  const LinearModel model = build_reduced_model(rp);
  const auto ks = output_kernels(dq);
  const Eigen::MatrixXd exact = propagate_output_covariance(model, ks, rp.tau).sigma;
  double previous = std::numeric_limits<double>::infinity();
  for (int steps : {32, 64, 128, 256}) {
    const double err = (heun_covariance(heun_scheme(model, ks, rp.tau, steps)) - exact).norm();
    EXPECT_LT(err, previous) << steps;
    previous = err;
  }
  EXPECT_LT(previous / exact.norm(), 1e-4);
}

TEST(MonteCarlo, UncoupledModelKeepsInputVariances) {
  ReducedParams rp = reduced_params({0.5, 0.0, 0.0, 0.0, 1.0});
  rp.g1 = rp.g2 = 0.0;
  rp.n0 = 3.0;
  rp.tau = 1.0;
  const LinearModel model = build_full_model(rp);
  std::vector<TemporalKernel> ks;
  for (const char* port : {"a1_out", "a2_out"}) {
    TemporalKernel k;
    k.mode_id = std::string("flat_") + port;
    k.normalization = 1.0 / std::sqrt(rp.tau);
    k.terms = {{port, 1.0, 0.0, false}};
    ks.push_back(k);
  }
  MonteCarloOptions opts;
  opts.steps = 64;
  const OutputCovariance mc = monte_carlo_output_covariance(model, ks, rp.tau, 20000, 7, opts);
  for (const auto& mode : mc.labels) {
    const double expected = mode == mirror_output_label ? rp.n0 + 0.5 : 0.5;
    for (const auto& q : {X(mode), P(mode)})
      EXPECT_LT(std::abs(mc.covariance(q, q) - expected), 3.0 * mc.standard_error(q, q)) << mode;
  }
}

TEST(MonteCarlo, AgreesWithPropagationWithinThreeStandardErrors) {
  const ReducedParams rp = reduced_params({1.0, 0.1, 0.0, 2.0, 2.0});
  const DerivedQuantities dq = derived_quantities(rp);
  const LinearModel model = build_reduced_model(rp);
  const auto ks = output_kernels(dq);
  const OutputCovariance exact = propagate_output_covariance(model, ks, rp.tau);
  const OutputCovariance mc = monte_carlo_output_covariance(model, ks, rp.tau, 20000, 20261016);
  EXPECT_EQ(mc.labels, exact.labels);
  EXPECT_LT(worst_z(mc, exact.sigma), 3.0);
}

TEST(MonteCarlo, BitIdenticalAcrossThreadCounts) {
  const ReducedParams rp = reduced_params({0.5, 0.05, 0.5, 1.0, 1.0});
  const DerivedQuantities dq = derived_quantities(rp);
  const LinearModel model = build_reduced_model(rp);
  const auto ks = output_kernels(dq);
  MonteCarloOptions opts;
  opts.steps = 64;
  opts.threads = 1;
  const OutputCovariance one = monte_carlo_output_covariance(model, ks, rp.tau, 3000, 11, opts);
  for (unsigned threads : {2u, 3u, 8u}) {
    opts.threads = threads;
    const OutputCovariance many = monte_carlo_output_covariance(model, ks, rp.tau, 3000, 11, opts);
    EXPECT_TRUE(same_bits(one.sigma, many.sigma)) << threads;
    EXPECT_TRUE(same_bits(*one.standard_errors, *many.standard_errors)) << threads;
  }
}

TEST(MonteCarlo, SeedChangesTheSample) {
  const ReducedParams rp = reduced_params({0.5, 0.0, 0.0, 0.0, 1.0});
  const DerivedQuantities dq = derived_quantities(rp);
  const LinearModel model = build_reduced_model(rp);
  const auto ks = output_kernels(dq);
  MonteCarloOptions opts;
  opts.steps = 32;
  const auto a = monte_carlo_output_covariance(model, ks, rp.tau, 1000, 1, opts);
  const auto b = monte_carlo_output_covariance(model, ks, rp.tau, 1000, 2, opts);
  EXPECT_FALSE(same_bits(a.sigma, b.sigma));
}

TEST(MonteCarlo, TooFewTrajectories) {
  const ReducedParams rp = reduced_params({0.5, 0.0, 0.0, 0.0, 1.0});
  const DerivedQuantities dq = derived_quantities(rp);
  expect_error(ErrorKind::InsufficientTrajectories, [&] {
    monte_carlo_output_covariance(build_reduced_model(rp), output_kernels(dq), rp.tau, 999, 1);
  });
}

TEST(MonteCarlo, StandardErrorBoundIsEnforced) {
  const ReducedParams rp = reduced_params({0.5, 0.0, 0.0, 0.0, 1.0});
  const DerivedQuantities dq = derived_quantities(rp);
  MonteCarloOptions opts;
  opts.steps = 32;
  opts.max_relative_standard_error = 1e-3;
  expect_error(ErrorKind::InsufficientTrajectories, [&] {
    monte_carlo_output_covariance(build_reduced_model(rp), output_kernels(dq), rp.tau, 1000, 1, opts);
  });
}

TEST(MonteCarlo, CrossCorrelationMatchesClosedForm) {
  for (double g : {0.0, 0.1}) {
    const ReducedParams rp = reduced_params({1.0, g, 0.0, 0.0, 1.0});
    const DerivedQuantities dq = derived_quantities(rp);
    const auto ks = output_kernels(dq);
    const OutputCovariance mc = monte_carlo_output_covariance(build_reduced_model(rp), ks, rp.tau, 20000, 99);
    const CrossMoment cm = cross_moment(mc, "A1_out", "A2_out");
    EXPECT_LT(std::abs(std::abs(cm.value) - cross_correlation(dq, 0.0, 0.0)), 3.0 * cm.abs_standard_error) << g;
  }
}

TEST(MonteCarlo, StepSelectionRefinesWithTrajectoryCount) {
  const ReducedParams rp = reduced_params({1.0, 0.1, 0.0, 0.0, 1.0});
  const DerivedQuantities dq = derived_quantities(rp);
  const LinearModel model = build_reduced_model(rp);
  const auto ks = output_kernels(dq);
  EXPECT_LE(choose_monte_carlo_steps(model, ks, rp.tau, 1000), choose_monte_carlo_steps(model, ks, rp.tau, 1000000));
}
