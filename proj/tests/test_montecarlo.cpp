#include <gtest/gtest.h>

#include <cstring>

#include "gafzero/montecarlo.hpp"
#include "gafzero/rng.hpp"

using namespace gafzero;

namespace {

const GeometryModel kFS = GeometryModel::fubini_study();

bool same_bits(const MomentSummary& a, const MomentSummary& b) {
  auto eq = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
  return a.n_trials == b.n_trials && a.n_degenerate == b.n_degenerate && eq(a.mean, b.mean) &&
         eq(a.variance, b.variance) && eq(a.stderr_mean, b.stderr_mean) && eq(a.stderr_variance, b.stderr_variance);
}

std::vector<double> normal_draws(std::uint64_t seed, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sqrt(2.0) * complex_gaussian(seed, 0, i).real();
  return x;
}

}  // namespace

TEST(Moments, MergeMatchesSinglePass) {
  std::vector<double> x;
  for (int i = 0; i < 5000; ++i) x.push_back(std::exp(std::sin(0.37 * i)) + 0.01 * i);
  MomentAccumulator all, a, b, c;
  for (double v : x) all.add(v);
  for (int i = 0; i < 1234; ++i) a.add(x[i]);
  for (int i = 1234; i < 4000; ++i) b.add(x[i]);
  for (int i = 4000; i < 5000; ++i) c.add(x[i]);
  MomentAccumulator left = a, right = b;
  left.merge(b);
  left.merge(c);
  right.merge(c);
  MomentAccumulator assoc = a;
  assoc.merge(right);
  for (const auto& m : {left.summary(), assoc.summary()}) {
    const auto s = all.summary();
    EXPECT_EQ(m.n_trials, s.n_trials);
    EXPECT_NEAR(m.mean, s.mean, 1e-12 * std::abs(s.mean));
    EXPECT_NEAR(m.variance, s.variance, 1e-10 * s.variance);
    EXPECT_NEAR(m.stderr_variance, s.stderr_variance, 1e-9 * s.stderr_variance);
  }
  // two-pass reference
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double m2 = 0.0;
  for (double v : x) m2 += (v - mean) * (v - mean);
  EXPECT_NEAR(all.summary().variance, m2 / (x.size() - 1), 1e-11 * m2 / x.size());
}

TEST(Moments, StderrShrinks) {
  MomentAccumulator a, b;
  const auto x = normal_draws(1, 40000);
  for (int i = 0; i < 10000; ++i) a.add(x[i]);
  for (double v : x) b.add(v);
  EXPECT_NEAR(a.summary().stderr_variance / b.summary().stderr_variance, 2.0, 0.15);
  EXPECT_NEAR(b.summary().stderr_variance, std::sqrt(2.0 / 40000), 0.1 * std::sqrt(2.0 / 40000));
}

TEST(MonteCarlo, FullSphereCountIsDegree) {
  const auto s = run_count_experiment(EnsembleSpec::su2(12), Domain::disk(0.0, kInf, kFS), 300, 1, 1);
  EXPECT_EQ(s.mean, 12.0);
  EXPECT_EQ(s.variance, 0.0);
}

TEST(MonteCarlo, WorkerCountDoesNotChangeResults) {
  const auto e = EnsembleSpec::su2(24);
  const Domain d = Domain::disk({0.1, 0.0}, 0.9, kFS);
  const auto s1 = run_count_experiment(e, d, 3000, 9, 1);
  for (int w : {4, 16}) EXPECT_TRUE(same_bits(s1, run_count_experiment(e, d, 3000, 9, w))) << w;
  const auto phi = TestFunction::gaussian_bump(0.2, 0.4, kFS);
  const auto t1 = run_smooth_experiment(e, phi, 1500, 9, 1);
  for (int w : {4, 16}) EXPECT_TRUE(same_bits(t1, run_smooth_experiment(e, phi, 1500, 9, w))) << w;
}

TEST(MonteCarlo, MeanCountMatchesArea) {
  const auto e = EnsembleSpec::su2(64);
  const Domain d = Domain::disk(0.0, 1.0, kFS);
  const auto s = run_count_experiment(e, d, 4000, 3, 0, {ZeroMethod::ArgumentPrinciple, 0.0, 0});
  EXPECT_NEAR(s.mean, 32.0, 3.5 * s.stderr_mean);
}

TEST(MonteCarlo, SmallNVarianceMatchesQuadrature) {
  const auto e = EnsembleSpec::su2(10);
  const Domain d = Domain::disk({0.2, 0.1}, 0.8, kFS);
  const auto s = run_count_experiment(e, d, 20000, 4);
  EXPECT_NEAR(s.variance, variance_count(e, d).value, 3.5 * s.stderr_variance);
}

TEST(MonteCarlo, GaussianSmoothVarianceMatchesQuadrature) {
  const auto phi = TestFunction::gaussian_bump(0.0, 0.4, GeometryModel::flat());
  const auto e = EnsembleSpec::with_radius(Family::BargmannFock, 8, phi.support_radius());
  const auto s = run_smooth_experiment(e, phi, 4000, 5);
  EXPECT_NEAR(s.variance, variance_smooth(e, phi).value, 3.5 * s.stderr_variance);
  EXPECT_NEAR(s.mean, expected_linear_statistic(e, phi), 3.5 * s.stderr_mean);
}

TEST(MonteCarlo, RejectsTooFewTrials) {
  EXPECT_THROW(run_count_experiment(EnsembleSpec::su2(4), Domain::disk(0.0, 1.0, kFS), 99, 1), InvalidArgument);
  EXPECT_THROW(run_count_experiment(EnsembleSpec::su2(4), Domain::disk(0.0, 1.0, GeometryModel::flat()), 200, 1),
               InvalidArgument);
}

TEST(MonteCarlo, BoundaryTolTooLargeIsAnError) {
  // a huge boundary band flags most trials as degenerate
  const auto e = EnsembleSpec::su2(32);
  EXPECT_THROW(run_count_experiment(e, Domain::disk(0.0, 1.0, kFS), 200, 1, 1, {ZeroMethod::Roots, 0.2, 0}),
               ConvergenceError);
}

TEST(Kolmogorov, DistributionValues) {
  EXPECT_NEAR(kolmogorov_critical(0.05), 1.3581, 1e-4);
  EXPECT_NEAR(kolmogorov_cdf(1.0) - kolmogorov_cdf(0.999999999), 0.0, 1e-8);  // branch continuity
  EXPECT_NEAR(kolmogorov_cdf(0.5), 0.036055, 1e-6);
}

TEST(Normality, SelfCalibration) {
  int pass = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto r = normality_test(normal_draws(100 + seed, 10000), std::make_pair(0.0, 1.0));
    EXPECT_GE(r.ks_statistic, 0.0);
    EXPECT_LE(r.ks_statistic, 1.0);
    pass += r.passes();
  }
  EXPECT_GE(pass, 18);
}

TEST(Normality, DetectsNonNormal) {
  auto x = normal_draws(7, 5000);
  for (double& v : x) v = v * v;
  EXPECT_FALSE(normality_test(x).passes());
}

TEST(Normality, StandardizationChoiceBarelyMatters) {
  const auto x = normal_draws(8, 2000);
  const double a = normality_test(x).ks_statistic, b = normality_test(x, std::make_pair(0.0, 1.0)).ks_statistic;
  EXPECT_LT(std::abs(a - b), 0.01 + 2.0 / std::sqrt(2000.0));
}

TEST(Normality, Errors) {
  EXPECT_THROW(normality_test(std::vector<double>(1000, 3.0)), InvalidArgument);
  EXPECT_THROW(normality_test(normal_draws(1, 100)), InvalidArgument);
}

TEST(Sweep, SingleNMatchesCountExperiment) {
  SweepConfig c;
  c.Ns = {16};
  c.domain = Domain::disk(0.0, 1.0, kFS);
  c.n_trials = 500;
  c.seed = 2;
  const auto rows = variance_vs_N_sweep(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(same_bits(rows[0].summary, run_count_experiment(EnsembleSpec::su2(16), *c.domain, 500, 2)));
  EXPECT_NEAR(rows[0].predicted, predicted_number_variance(16, *c.domain).leading_value, 1e-15);
  c.Ns = {32, 16};
  EXPECT_THROW(variance_vs_N_sweep(c), InvalidArgument);
}

TEST(Sweep, DilatesUseUnitGaussianModel) {
  SweepConfig c;
  c.family = Family::BargmannFock;
  c.Ns = {4, 16};
  c.domain = Domain::disk(0.0, 1.0, GeometryModel::flat());
  c.dilate = true;
  c.n_trials = 400;
  c.method = ZeroMethod::ArgumentPrinciple;
  const auto rows = variance_vs_N_sweep(c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_NEAR(r.summary.mean, r.N, 4 * r.summary.stderr_mean + 1e-12);
}
