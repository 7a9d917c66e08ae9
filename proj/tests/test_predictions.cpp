#include <gtest/gtest.h>

#include <boost/math/special_functions/zeta.hpp>

#include "gafzero/oracles.hpp"
#include "gafzero/predictions.hpp"

using namespace gafzero;

TEST(Zeta, ClassicalValues) {
  EXPECT_NEAR(zeta(2.0), kPi * kPi / 6, 1e-14);
  EXPECT_NEAR(zeta(4.0), std::pow(kPi, 4) / 90, 1e-14);
  EXPECT_THROW(zeta(1.0), DomainError);
  EXPECT_THROW(zeta_eta(0.5), DomainError);
}

TEST(Zeta, TwoMethodsAgree) {
  for (double s : {1.5, 2.5, 3.0, 3.5, 5.0}) {
    EXPECT_NEAR(zeta(s), zeta_eta(s), 1e-12) << s;
    EXPECT_NEAR(zeta(s), boost::math::zeta(s), 1e-12) << s;
  }
}

TEST(Constants, DualComputation) {
  for (int m = 1; m <= 3; ++m) {
    EXPECT_NEAR(nu(m) / oracle::nu_integral(m), 1.0, 1e-8) << m;
    EXPECT_NEAR(kappa(m) / oracle::kappa_integral(m), 1.0, 1e-8) << m;
  }
  EXPECT_NEAR(number_variance_constant(), zeta(1.5) / (8 * std::pow(kPi, 1.5)), 1e-16);
  EXPECT_NEAR(number_variance_constant(), 0.0586, 1e-4);
}

TEST(Predictions, NumberVariance) {
  const auto fs = GeometryModel::fubini_study();
  const auto p = predicted_number_variance(100, Domain::disk(0.0, 1.0, fs));
  EXPECT_NEAR(p.leading_value, 10 * nu(1) * kPi, 1e-13);
  EXPECT_NEAR(p.leading_value, p.constant * p.geometric_factor * std::pow(p.N, p.power), 1e-13);
  const auto q = predicted_number_variance(200, Domain::disk(0.0, 1.0, fs));
  EXPECT_NEAR(q.leading_value / p.leading_value, std::sqrt(2.0), 1e-14);
  EXPECT_EQ(predicted_number_variance(64, Domain::disk(0.0, kInf, fs)).leading_value, 0.0);
  const auto v = predicted_volume_variance(100, 1, kPi);
  EXPECT_EQ(v.leading_value, p.leading_value);
  EXPECT_EQ(predicted_volume_variance(100, 2, 0.0).leading_value, 0.0);
}

TEST(Predictions, SmoothVarianceForms) {
  const auto phi = TestFunction::gaussian_bump(0.1, 0.3, GeometryModel::fubini_study());
  const auto p = predicted_smooth_variance(64, 1, phi.ddbar_norm_sq());
  EXPECT_NEAR(p.leading_value, predicted_smooth_variance_laplacian(64, phi.laplacian_norm_sq()), 1e-15 * p.leading_value);
  EXPECT_EQ(predicted_smooth_variance(64, 1, TestFunction::zero(GeometryModel::flat()).ddbar_norm_sq()).leading_value, 0.0);
}

TEST(Predictions, ExpectedCounts) {
  const auto fs = GeometryModel::fubini_study();
  EXPECT_NEAR(expected_count(EnsembleSpec::su2(40), Domain::disk(0.0, kInf, fs)), 40.0, 1e-12);
  EXPECT_NEAR(expected_count(EnsembleSpec::su2(40), Domain::disk(0.0, 1.0, fs)), 20.0, 1e-12);
  EXPECT_NEAR(expected_count(EnsembleSpec::bf(9, 50), Domain::disk(0.0, 1.3, GeometryModel::flat())), 9 * 1.69, 1e-12);
  for (const EnsembleSpec& e : {EnsembleSpec::su2(12), EnsembleSpec::bf(12, 120), EnsembleSpec::su11(12, 400)}) {
    const cplx z(0.25, -0.1);
    EXPECT_NEAR(expected_density_fd(e, z) / expected_density(e, z), 1.0, 1e-5) << to_string(e);
  }
}

TEST(KernelScans, GaussianScalingIsExact) {
  for (int N : {16, 256}) EXPECT_LT(scaling_residual_scan(EnsembleSpec::bf(N, 10), 0.0, 2.0).max_abs, 1e-12);
}

TEST(KernelScans, SphereResidualDecaysLikeInverseN) {
  // in normal coordinates R_N = |u^2 - v^2|^2 / (4N) + O(N^-2); on |u|,|v| <= 2 the maximum tends to 16/N
  double prev = kInf;
  for (int N : {64, 256, 1024, 4096}) {
    const double r = scaling_residual_scan(EnsembleSpec::su2(N), 0.0, 2.0).max_abs;
    EXPECT_LT(r, prev);
    prev = r;
    if (N >= 1024) {
      EXPECT_NEAR(N * r, 16.0, 512.0 / N) << N;
    }
  }
}

TEST(KernelScans, DiagonalResidualVanishes) {
  KernelEvaluator k(EnsembleSpec::su2(64));
  for (cplx u : {cplx(0.5, 0.2), cplx(-1.5, 1.0)}) EXPECT_EQ(k.lambda(u / 8.0, u / 8.0), 0.0);
}

TEST(KernelScans, OffDiagonalDecay) {
  const auto bf = offdiagonal_decay_scan(EnsembleSpec::bf(256, 10), 2.0);
  EXPECT_NEAR(bf.max_kernel, std::pow(256.0, -2.0), 1e-3 * std::pow(256.0, -2.0));
  const auto su2 = offdiagonal_decay_scan(EnsembleSpec::su2(256), 2.0);
  EXPECT_LE(su2.max_kernel, 10.0 * std::pow(256.0, -2.0));
  double prev = 1.0;
  for (double b : {1.0, 1.5, 2.0, 3.0}) {
    const double m = offdiagonal_decay_scan(EnsembleSpec::su2(64), b).max_kernel;
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(KernelScans, KernelMassDecreasesWithN) {
  double prev = kInf;
  for (int N : {16, 64, 256}) {
    const double su2 = kernel_mass(EnsembleSpec::su2(N), 0.0);
    EXPECT_NEAR(su2, 2 * kPi / (N + 2), 1e-8);
    EXPECT_NEAR(kernel_mass(EnsembleSpec::bf(N, 10), 0.3), 2 * kPi / N, 1e-8);
    EXPECT_NEAR(kernel_mass(EnsembleSpec::su11(N, 10), 0.0), 2 * kPi / (N - 2), 1e-6);
    EXPECT_LT(su2, prev);
    prev = su2;
  }
}
