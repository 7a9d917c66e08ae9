#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "gafzero/bipotential.hpp"
#include "gafzero/oracles.hpp"
#include "gafzero/predictions.hpp"

using namespace gafzero;

namespace {

const GeometryModel kFS = GeometryModel::fubini_study();

/// G~(t) = -(1/4pi^2) int_0^{t^2} log(1-s)/s ds, by tanh-sinh.
double g_tilde_integral(double t) {
  if (t == 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> q;
  return -q.integrate([](double s) { return std::log1p(-s) / s; }, 0.0, t * t) / (4 * kPi * kPi);
}

}  // namespace

TEST(Dilog, KnownValues) {
  EXPECT_NEAR(dilog(1.0), kPi * kPi / 6, 1e-15);
  EXPECT_NEAR(dilog(0.5), kPi * kPi / 12 - 0.5 * std::log(2.0) * std::log(2.0), 1e-15);
  EXPECT_EQ(dilog(0.0), 0.0);
  // series with 60 terms at 1/4
  double s = 0.0;
  for (int k = 1; k <= 60; ++k) s += std::pow(0.25, k) / (k * k);
  EXPECT_NEAR(dilog(0.25), s, 1e-16);
}

TEST(GTilde, Values) {
  EXPECT_EQ(g_tilde(0.0), 0.0);
  EXPECT_NEAR(g_tilde(1.0), 1.0 / 24.0, 1e-16);
  EXPECT_NEAR(g_tilde(0.5), dilog(0.25) / (4 * kPi * kPi), 1e-16);
  for (double t : {0.1, 0.5, 0.9, 0.999}) EXPECT_NEAR(g_tilde(t), g_tilde_integral(t), 1e-12) << t;
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = g_tilde(i / 100.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(g_tilde(1.5), DomainError);
  EXPECT_THROW(g_tilde(-0.1), DomainError);
}

TEST(GTilde, FDerivatives) {
  for (double lam : {0.01, 0.3, 1.0, 4.0, 15.0}) {
    const double h = 1e-3 * std::min(lam, 1.0);
    auto d = [&](double (*f)(double)) {
      return (-f(lam + 2 * h) + 8 * f(lam + h) - 8 * f(lam - h) + f(lam - 2 * h)) / (12 * h);
    };
    const double d1 = d(bipotential_F), d2 = d(bipotential_F1);
    EXPECT_NEAR(bipotential_F1(lam), d1, 1e-8 * std::abs(d1)) << lam;
    EXPECT_NEAR(bipotential_F2(lam), d2, 1e-8 * std::abs(d2)) << lam;
    EXPECT_LE(bipotential_F1(lam), 0.0);
    EXPECT_GT(bipotential_F2(lam), 0.0);
  }
}

TEST(Bipotential, QExamples) {
  Bipotential bp(EnsembleSpec::su2(30));
  const cplx z(0.2, 0.3), w(-0.1, 0.05);
  EXPECT_NEAR(bp.q(z, z), 1.0 / 24.0, 1e-16);
  EXPECT_DOUBLE_EQ(bp.q(z, w), bp.q(w, z));
  EXPECT_GE(bp.q(z, w), 0.0);
  EXPECT_LE(bp.q(z, w), 1.0 / 24.0);
  // Gaussian kernel far apart: Q ~ e^{-N|z-w|^2} / (4 pi^2)
  for (int N : {8, 32}) {
    Bipotential b(EnsembleSpec::bf(N, 10));
    const double d = 1.5, lead = std::exp(-N * d * d) / (4 * kPi * kPi);
    EXPECT_NEAR(b.q(0.0, d) / lead, 1.0, 1e-6);
  }
}

TEST(Bipotential, ChainRuleMatchesFiniteDifferences) {
  // nested fourth-order central differences of q in zbar then wbar
  auto dbar = [](auto f, cplx z, double h) {
    auto d = [&](cplx dir) {
      return (-f(z + 2.0 * h * dir) + 8.0 * f(z + h * dir) - 8.0 * f(z - h * dir) + f(z - 2.0 * h * dir)) / (12.0 * h);
    };
    return 0.5 * (d(1.0) + cplx(0, 1) * d(cplx(0, 1)));
  };
  for (const EnsembleSpec& e : {EnsembleSpec::su2(12), EnsembleSpec::bf(12, 40), EnsembleSpec::su11(12, 40)}) {
    Bipotential bp(e);
    for (auto [z, w] : std::vector<std::pair<cplx, cplx>>{{{0.1, 0.1}, {0.35, -0.05}}, {{-0.2, 0.3}, {0.0, 0.1}}}) {
      const double h = 1e-3;
      const cplx num = dbar(
          [&](cplx b) { return dbar([&](cplx a) { return cplx(bp.q(a, b)); }, z, h); }, w, h);
      const cplx an = bp.d2_zbar_wbar(z, w);
      EXPECT_LT(std::abs(num - an), 1e-5 * std::abs(an)) << to_string(e);
    }
  }
  EXPECT_THROW(Bipotential(EnsembleSpec::su2(4)).d2_zbar_wbar(0.1, 0.1), DomainError);
}

TEST(Bipotential, NearDiagonalLimit) {
  for (const EnsembleSpec& e : {EnsembleSpec::su2(64), EnsembleSpec::bf(64, 10), EnsembleSpec::su2(256)}) {
    Bipotential bp(e);
    const cplx z(0.3, 0.2), tau = std::polar(1.0, 0.7);
    const double scale = 1.0 / std::sqrt(e.N * e.geometry().density(z));
    const cplx lim = detail::count_pair_term(bp, z, z, std::conj(tau), std::conj(tau));
    const cplx near = detail::count_pair_term(bp, z, z + 1e-3 * scale * tau, std::conj(tau), std::conj(tau));
    EXPECT_LT(std::abs(near - lim), 0.1 * std::abs(lim)) << to_string(e);
    // leading model -((N g)^2 / 4 pi^2) w^2 / (e^{N g |w|^2} - 1) at chart offset w
    const cplx wv = 0.5 * scale * tau;
    const double g = e.geometry().density(z);
    const cplx model = -(std::pow(e.N * g, 2) / (4 * kPi * kPi)) * wv * wv /
                       std::expm1(e.N * g * std::norm(wv)) * std::conj(tau) * std::conj(tau);
    const cplx actual = detail::count_pair_term(bp, z, z + wv, std::conj(tau), std::conj(tau));
    EXPECT_LT(std::abs(actual - model), 0.1 * std::abs(model)) << to_string(e);
  }
}

TEST(Bipotential, PairLogMoment) {
  EXPECT_NEAR(oracle::mean_log_modulus(), -0.5 * std::numbers::egamma, 1e-12);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto est = pair_log_moment(t, 400000, 21);
    EXPECT_NEAR(est.value, pair_log_moment_exact(t), 4 * est.stderr_) << t;
  }
  EXPECT_NEAR(pair_log_moment_exact(0.0), 0.25 * std::numbers::egamma * std::numbers::egamma, 1e-16);
  EXPECT_THROW(pair_log_moment(1.2, 10, 1), DomainError);
}

TEST(VarianceCount, FullSphereIsZero) {
  const auto v = variance_count(EnsembleSpec::su2(20), Domain::disk(0.0, kInf, kFS));
  EXPECT_EQ(v.value, 0.0);
}

TEST(VarianceCount, ModesAgreeOnDisk) {
  const auto e = EnsembleSpec::su2(20);
  const Domain d = Domain::disk(0.0, 1.0, kFS);
  const auto off = variance_count(e, d);
  const auto loc = variance_count(e, d, {QuadratureMode::LocalRefinement, 0});
  EXPECT_NEAR(off.value, loc.value, 1e-10);
  EXPECT_LT(off.error_estimate, 1e-8);
  EXPECT_LT(std::abs(off.imag), 1e-8 * off.value);
  EXPECT_GT(off.value, 0.0);
}

TEST(VarianceCount, RefinementConverges) {
  const auto e = EnsembleSpec::su2(64);
  const Domain d = Domain::disk({0.2, 0.1}, 0.8, kFS);
  const double n0 = std::sqrt(64.0) * d.chart_perimeter();
  int n = 1;
  while (n < n0) n *= 2;
  n *= 2;
  const double v1 = variance_count(e, d, {QuadratureMode::OffsetGrids, n}).value;
  const double v2 = variance_count(e, d, {QuadratureMode::OffsetGrids, 2 * n}).value;
  const double v4 = variance_count(e, d, {QuadratureMode::OffsetGrids, 4 * n}).value;
  EXPECT_LE(std::abs(v4 - v2), 0.5 * std::abs(v2 - v1) + 1e-13);
}

TEST(VarianceCount, PolygonModesAgree) {
  const auto e = EnsembleSpec::su2(16);
  const Domain sq = Domain::polygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, kFS);
  const auto loc = variance_count(e, sq, {QuadratureMode::LocalRefinement, 64});
  const auto off = variance_count(e, sq, {QuadratureMode::OffsetGrids, 2048});
  EXPECT_NEAR(off.value, loc.value, 2e-3 * loc.value);
  EXPECT_LT(loc.error_estimate, 1e-6 * loc.value);
}

TEST(VarianceCount, GeometryMismatchRejected) {
  EXPECT_THROW(variance_count(EnsembleSpec::su2(8), Domain::disk(0.0, 1.0, GeometryModel::flat())), InvalidArgument);
}

TEST(VarianceCount, ComplementHasSameVariance) {
  const auto e = EnsembleSpec::su2(24);
  const double a = variance_count(e, Domain::disk(0.0, 0.7, kFS)).value;
  const double b = variance_count(e, Domain::annulus(0.0, 0.7, kInf, kFS)).value;
  EXPECT_NEAR(a, b, 1e-10 * a);
}

TEST(VarianceSmooth, ZeroFunction) {
  EXPECT_EQ(variance_smooth(EnsembleSpec::su2(16), TestFunction::zero(kFS)).value, 0.0);
}

TEST(VarianceSmooth, FlatReductionOracle) {
  for (int N : {4, 16}) {
    const auto phi = TestFunction::gaussian_bump({0.3, -0.2}, 0.6, GeometryModel::flat());
    const auto v = variance_smooth(EnsembleSpec::bf(N, 10), phi);
    EXPECT_NEAR(v.value, oracle::bf_smooth_variance(N, 0.6), 1e-9 * v.value) << N;
    EXPECT_GE(v.value, 0.0);
  }
}

TEST(VarianceSmooth, ApproachesPredictionFromBelow) {
  const auto phi = TestFunction::gaussian_bump(0.0, 0.5, kFS);
  const double target = predicted_smooth_variance_laplacian(1, phi.laplacian_norm_sq());
  double prev = 0.0;
  for (int N : {8, 32}) {
    const double r = N * variance_smooth(EnsembleSpec::su2(N), phi).value / target;
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 1.0);
    prev = r;
  }
}
