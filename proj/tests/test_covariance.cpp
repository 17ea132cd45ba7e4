#include "oracles/oracles.hpp"
#include "test_support.hpp"

#include "steerkit/covariance.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace steerkit;
using namespace steerkit::test;

namespace {

Eigen::MatrixXd omega(Eigen::Index modes) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) w(2 * k, 2 * k + 1) = 1.0, w(2 * k + 1, 2 * k) = -1.0;
  return w;
}

// |eigenvalues| of i Omega sigma by a general complex eigensolver, each pair
// reported once.
std::vector<double> reference_spectrum(const Eigen::MatrixXd& sigma) {
  const Eigen::Index modes = sigma.rows() / 2;
  const Eigen::MatrixXcd m = std::complex<double>(0.0, 1.0) * (omega(modes) * sigma).cast<std::complex<double>>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (es.eigenvalues()(i).real() > 0.0) v.push_back(es.eigenvalues()(i).real());
  std::sort(v.begin(), v.end());
  return v;
}

// Random symplectic matrix from squeezers, phase rotations and beam splitters.
Eigen::MatrixXd random_symplectic(Eigen::Index modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
  for (int layer = 0; layer < 4; ++layer) {
    for (Eigen::Index k = 0; k < modes; ++k) {
      Eigen::MatrixXd L = Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
      const double s = 0.8 * u(rng), th = 3.0 * u(rng);
      Eigen::Matrix2d rot;
      rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      L.block<2, 2>(2 * k, 2 * k) = Eigen::Vector2d(std::exp(s), std::exp(-s)).asDiagonal() * rot;
      S = L * S;
    }
    for (Eigen::Index k = 0; k + 1 < modes; ++k) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
      const double t = 3.0 * u(rng);
      const Eigen::Matrix2d c = std::cos(t) * Eigen::Matrix2d::Identity(), s = std::sin(t) * Eigen::Matrix2d::Identity();
      B.block<2, 2>(2 * k, 2 * k) = c;
      B.block<2, 2>(2 * k, 2 * k + 2) = s;
      B.block<2, 2>(2 * k + 2, 2 * k) = -s;
      B.block<2, 2>(2 * k + 2, 2 * k + 2) = c;
      S = B * S;
    }
  }
  return S;
}

OutputCovariance labelled(std::vector<std::string> labels, Eigen::MatrixXd sigma) {
  OutputCovariance oc;
  oc.labels = std::move(labels);
  oc.sigma = std::move(sigma);
  return oc;
}

}  // namespace

TEST(Symplectic, ThermalStatesGiveTheirOccupations) {
  Eigen::VectorXd d(6);
  d << 0.5, 0.5, 3.5, 3.5, 10.5, 10.5;
  const Eigen::VectorXd nu = symplectic_eigenvalues(d.asDiagonal().toDenseMatrix());
  ASSERT_EQ(nu.size(), 3);
  EXPECT_NEAR(nu(0), 0.5, 1e-12);
  EXPECT_NEAR(nu(1), 3.5, 1e-12);
  EXPECT_NEAR(nu(2), 10.5, 1e-12);
}

TEST(Symplectic, TwoModeSqueezedVacuumIsPure) {
  for (double s : {0.0, 0.3, 1.0, 2.0}) {
    const Eigen::VectorXd nu = symplectic_eigenvalues(oracle::two_mode_squeezed(s));
    EXPECT_NEAR(nu(0), 0.5, 1e-10) << s;
    EXPECT_NEAR(nu(1), 0.5, 1e-10) << s;
    EXPECT_TRUE(is_physical(oracle::two_mode_squeezed(s)));
  }
}

TEST(Symplectic, InvariantUnderSymplecticMapsAndMatchesReference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> occ(0.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd d(6);
    for (int k = 0; k < 3; ++k) d(2 * k) = d(2 * k + 1) = 0.5 + occ(rng);
    const Eigen::MatrixXd S = random_symplectic(3, rng);
    ASSERT_LT((S * omega(3) * S.transpose() - omega(3)).norm(), 1e-9);
    const Eigen::MatrixXd sigma = S * d.asDiagonal() * S.transpose();
    const Eigen::VectorXd nu = symplectic_eigenvalues(sigma);
    std::vector<double> expected(d.data(), d.data() + 6);
    std::sort(expected.begin(), expected.end());
    const auto ref = reference_spectrum(sigma);
    ASSERT_EQ(ref.size(), 3u);
    for (int k = 0; k < 3; ++k) {
      EXPECT_LT(rel_err(nu(k), expected[2 * k]), 1e-8);
      EXPECT_LT(rel_err(nu(k), ref[k]), 1e-8);
    }
  }
}

TEST(Symplectic, SubVacuumIsUnphysical) {
  EXPECT_FALSE(is_physical(0.3 * Eigen::MatrixXd::Identity(2, 2)));
  // Squeezed below vacuum in X only but with the minimal product: physical.
  EXPECT_TRUE(is_physical(Eigen::Vector2d(0.05, 5.0).asDiagonal().toDenseMatrix()));
  EXPECT_FALSE(is_physical(Eigen::Vector2d(0.05, 4.0).asDiagonal().toDenseMatrix()));
  // Indefinite input reports zero spectrum.
  EXPECT_EQ(min_symplectic_eigenvalue(Eigen::Vector2d(-1.0, 1.0).asDiagonal().toDenseMatrix()), 0.0);
}

TEST(OutputCovarianceAccess, RotatedQuadratures) {
  Eigen::Matrix2d s;
  s << 2.0, 0.3, 0.3, 0.7;
  const OutputCovariance oc = labelled({"a"}, s);
  for (double th : {0.0, 0.4, 1.3, 2.9}) {
    const Eigen::Vector2d u(std::cos(th), std::sin(th));
    EXPECT_NEAR(oc.covariance({"a", th}, {"a", th}), u.dot(s * u), 1e-14);
  }
  EXPECT_NEAR(oc.covariance(QuadratureSelector::X("a"), QuadratureSelector::P("a")), 0.3, 1e-14);
}

TEST(OutputCovarianceAccess, SubsetReordersBlocks) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Random(6, 6);
  s = (s * s.transpose()).eval();
  const OutputCovariance oc = labelled({"a", "b", "c"}, s);
  const OutputCovariance sub = oc.subset({"c", "a"});
  EXPECT_EQ(sub.block("c", "c"), oc.block("c", "c"));
  EXPECT_EQ(sub.block("c", "a"), oc.block("c", "a"));
  EXPECT_EQ(sub.block("a", "a"), oc.block("a", "a"));
  expect_error(ErrorKind::MissingModes, [&] { oc.subset({"z"}); });
  expect_error(ErrorKind::MissingModes, [&] { oc.block("a", "q"); });
}

TEST(CombineModes, BeamSplitterOfThermalAndVacuum) {
  const double n = 4.0;
  const OutputCovariance oc = labelled({"c", "d"}, Eigen::Vector4d(n + 0.5, n + 0.5, 0.5, 0.5).asDiagonal());
  const double h = std::sqrt(0.5);
  const OutputCovariance out =
      combine_modes(combine_modes(oc, "a", {{"c", h}, {"d", h}}), "b", {{"c", h}, {"d", -h}});
  EXPECT_NEAR(out.covariance(QuadratureSelector::X("a"), QuadratureSelector::X("a")), 0.5 + n / 2, 1e-14);
  EXPECT_NEAR(out.covariance(QuadratureSelector::X("a"), QuadratureSelector::X("b")), n / 2, 1e-14);
  const CrossMoment cm = cross_moment(out, "a", "b");
  EXPECT_NEAR(cm.value.real(), n / 2, 1e-14);
  EXPECT_NEAR(cm.value.imag(), 0.0, 1e-14);
  EXPECT_EQ(cm.abs_standard_error, 0.0);
}

// i b^dag has X = P_b and P = X_b.
TEST(CombineModes, ConjugatedTermSwapsQuadratures) {
  Eigen::Matrix2d s;
  s << 1.5, 0.2, 0.2, 0.9;
  const OutputCovariance out = combine_modes(labelled({"b"}, s), "w", {{"b", cplx(0.0, 1.0), true}});
  EXPECT_NEAR(out.covariance(QuadratureSelector::X("w"), QuadratureSelector::X("w")), 0.9, 1e-14);
  EXPECT_NEAR(out.covariance(QuadratureSelector::P("w"), QuadratureSelector::P("w")), 1.5, 1e-14);
  EXPECT_NEAR(out.covariance(QuadratureSelector::X("w"), QuadratureSelector::P("b")), 0.9, 1e-14);
  expect_error(ErrorKind::MissingModes, [&] { combine_modes(out, "z", {{"nope", 1.0}}); });
}

TEST(CrossMoment, TwoModeSqueezingHasNoBeamSplitterCoherence) {
  const OutputCovariance oc = labelled({"a", "b"}, oracle::two_mode_squeezed(0.7));
  EXPECT_NEAR(std::abs(cross_moment(oc, "a", "b").value), 0.0, 1e-14);
}

TEST(CrossMoment, PhaseFollowsTheSecondMode) {
  const double n = 2.0;
  const OutputCovariance oc = labelled({"c", "d"}, Eigen::Vector4d(n + 0.5, n + 0.5, 0.5, 0.5).asDiagonal());
  const cplx phase = std::polar(1.0, 0.6);
  const double h = std::sqrt(0.5);
  const OutputCovariance out =
      combine_modes(combine_modes(oc, "a", {{"c", h}, {"d", h}}), "b", {{"c", h * phase}, {"d", -h * phase}});
  const cplx v = cross_moment(out, "a", "b").value;
  EXPECT_NEAR(std::abs(v - 0.5 * n * phase), 0.0, 1e-13);
}

// Sample-size scaling of the Gaussian standard error of |<a^dag b>|.
TEST(CrossMoment, StandardErrorScalesWithSampleSize) {
  const double n = 2.0;
  OutputCovariance oc = labelled({"c", "d"}, Eigen::Vector4d(n + 0.5, n + 0.5, 0.5, 0.5).asDiagonal());
  const double h = std::sqrt(0.5);
  oc = combine_modes(combine_modes(oc, "a", {{"c", h}, {"d", h}}), "b", {{"c", h}, {"d", -h}});
  oc.standard_errors = Eigen::MatrixXd::Zero(oc.sigma.rows(), oc.sigma.cols());
  oc.trajectories = 100;
  const double se100 = cross_moment(oc, "a", "b").abs_standard_error;
  oc.trajectories = 10000;
  const double se10000 = cross_moment(oc, "a", "b").abs_standard_error;
  EXPECT_GT(se100, 0.0);
  EXPECT_NEAR(se100 / se10000, 10.0, 1e-12);
}

// Empirical check of the same formula by direct sampling.
TEST(CrossMoment, StandardErrorMatchesSampling) {
  const Eigen::Matrix4d s = oracle::two_mode_squeezed(0.4) + 0.3 * Eigen::Matrix4d::Identity();
  Eigen::Matrix4d mixed = s;
  mixed(0, 2) += 0.4, mixed(2, 0) += 0.4, mixed(1, 3) += 0.2, mixed(3, 1) += 0.2;
  const Eigen::Matrix4d chol = mixed.llt().matrixL();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  const int batches = 400, per = 200;
  std::vector<double> mags;
  for (int b = 0; b < batches; ++b) {
    Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
    for (int k = 0; k < per; ++k) {
      Eigen::Vector4d z;
      for (int i = 0; i < 4; ++i) z(i) = normal(rng);
      const Eigen::Vector4d y = chol * z;
      acc += y * y.transpose();
    }
    mags.push_back(std::abs(cross_moment(labelled({"a", "b"}, acc / per), "a", "b").value));
  }
  double mean = 0.0, var = 0.0;
  for (double m : mags) mean += m / batches;
  for (double m : mags) var += (m - mean) * (m - mean) / (batches - 1);
  OutputCovariance exact = labelled({"a", "b"}, mixed);
  exact.standard_errors = Eigen::Matrix4d::Zero();
  exact.trajectories = per;
  const double predicted = cross_moment(exact, "a", "b").abs_standard_error;
  EXPECT_NEAR(std::sqrt(var) / predicted, 1.0, 0.15);
}

TEST(CanonicalGroups, OutputsTogetherEveryModeAlone) {
  const OutputCovariance oc =
      labelled({"Am_out", "A1_out", "A2_out", "Bt_m", "W_out"}, Eigen::MatrixXd::Identity(10, 10) * 0.5);
  const auto groups = canonical_groups(oc);
  ASSERT_EQ(groups.size(), 6u);
  EXPECT_EQ(groups[0], (std::vector<std::string>{"Am_out", "A1_out", "A2_out"}));
  EXPECT_EQ(groups[5], (std::vector<std::string>{"W_out"}));
  EXPECT_NEAR(min_canonical_symplectic_eigenvalue(oc), 0.5, 1e-14);
}
