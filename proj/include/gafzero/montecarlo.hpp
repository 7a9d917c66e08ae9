#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gafzero/bipotential.hpp"
#include "gafzero/ensembles.hpp"
#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/predictions.hpp"
#include "gafzero/zeros.hpp"

namespace gafzero {

struct MomentSummary {
  std::int64_t n_trials = 0;
  std::int64_t n_degenerate = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;
  double stderr_variance = 0.0;
};

/// Streaming central moments to fourth order with pairwise merge (Pebay).
class MomentAccumulator {
 public:
  void add(double x) {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double d = x - mean_, dn = d / n, dn2 = dn * dn, t = d * dn * n1;
    mean_ += dn;
    m4_ += t * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2_ - 4.0 * dn * m3_;
    m3_ += t * dn * (n - 2.0) - 3.0 * dn * m2_;
    m2_ += t;
  }

  void merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_), n = na + nb;
    const double d = o.mean_ - mean_, d2 = d * d;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d * d2 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) + 4.0 * d * (na * o.m3_ - nb * m3_) / n;
    mean_ += d * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    n_ += o.n_;
  }

  std::int64_t count() const { return n_; }

  MomentSummary summary(std::int64_t n_degenerate = 0) const {
    MomentSummary s;
    s.n_trials = n_;
    s.n_degenerate = n_degenerate;
    if (n_ == 0) return s;
    const double n = static_cast<double>(n_);
    s.mean = mean_;
    if (n_ < 2) return s;
    s.variance = std::max(0.0, m2_ / (n - 1.0));
    s.stderr_mean = std::sqrt(s.variance / n);
    const double mu2 = m2_ / n, mu4 = m4_ / n;
    const double var_var = (mu4 - (n - 3.0) / (n - 1.0) * mu2 * mu2) / n;
    s.stderr_variance = std::sqrt(std::max(0.0, var_var));
    return s;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

/// Worker count: explicit value, else GAFZERO_WORKERS, else hardware concurrency.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GAFZERO_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline constexpr std::int64_t kTrialBlock = 512;

/// Runs trial(i) -> optional value over i in [0, n) in fixed blocks; the merge order is the block order,
/// so the result does not depend on the worker count.
inline MomentSummary run_trials(std::int64_t n, int workers, const std::function<std::optional<double>(std::int64_t)>& trial,
                                std::vector<double>* samples = nullptr) {
  const std::int64_t n_blocks = (n + kTrialBlock - 1) / kTrialBlock;
  std::vector<MomentAccumulator> acc(static_cast<std::size_t>(n_blocks));
  std::vector<std::int64_t> degenerate(static_cast<std::size_t>(n_blocks), 0);
  if (samples) samples->assign(static_cast<std::size_t>(n), std::nan(""));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (;;) {
        const std::int64_t b = next.fetch_add(1);
        if (b >= n_blocks || failed.load()) return;
        for (std::int64_t i = b * kTrialBlock; i < std::min(n, (b + 1) * kTrialBlock); ++i) {
          const auto v = trial(i);
          if (v) {
            acc[b].add(*v);
            if (samples) (*samples)[i] = *v;
          } else {
            ++degenerate[b];
          }
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  const int w = static_cast<int>(std::min<std::int64_t>(resolve_workers(workers), std::max<std::int64_t>(1, n_blocks)));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  MomentAccumulator total;
  std::int64_t deg = 0;
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    total.merge(acc[b]);
    deg += degenerate[b];
  }
  if (samples) std::erase_if(*samples, [](double x) { return std::isnan(x); });
  if (static_cast<double>(deg) > 0.01 * static_cast<double>(n))
    throw ConvergenceError("degenerate trial fraction exceeds 1%; check the boundary tolerance");
  return total.summary(deg);
}

struct CountOptions {
  ZeroMethod method = ZeroMethod::Roots;
  double boundary_tol = 0.0;  // 0 selects 1e-9 x domain radius
  int winding_nodes = 0;      // 0 selects a default from the degree
};

inline MomentSummary run_count_experiment(const EnsembleSpec& e, const Domain& d, std::int64_t n_trials,
                                          std::uint64_t seed, int workers = 0, const CountOptions& opt = {}) {
  if (n_trials < 100) throw InvalidArgument("need at least 100 trials");
  detail::check_geometry(e, d.geometry());
  const double tol = opt.boundary_tol > 0.0 ? opt.boundary_tol : default_boundary_tol(d);
  return run_trials(n_trials, workers, [&](std::int64_t i) -> std::optional<double> {
    const SectionSample s = sample(e, seed, static_cast<std::uint64_t>(i));
    try {
      if (opt.method == ZeroMethod::ArgumentPrinciple)
        return count_by_argument_principle(Section(s), d, opt.winding_nodes).count;
      const CountResult c = count_in_domain(find_zeros(s), d, tol);
      if (c.boundary_flag) return std::nullopt;
      return c.count;
    } catch (const NearBoundaryZero&) {
      return std::nullopt;
    } catch (const DegenerateSample&) {
      return std::nullopt;
    }
  });
}

inline MomentSummary run_smooth_experiment(const EnsembleSpec& e, const TestFunction& phi, std::int64_t n_trials,
                                           std::uint64_t seed, int workers = 0, std::vector<double>* samples = nullptr) {
  if (n_trials < 100) throw InvalidArgument("need at least 100 trials");
  detail::check_geometry(e, phi.geometry());
  return run_trials(
      n_trials, workers,
      [&](std::int64_t i) -> std::optional<double> {
        try {
          return linear_statistic(find_zeros(sample(e, seed, static_cast<std::uint64_t>(i))), phi);
        } catch (const DegenerateSample&) {
          return std::nullopt;
        }
      },
      samples);
}

/// P(K <= x) for the Kolmogorov distribution.
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) {
    // theta-function form, fast for small x
    const double f = std::sqrt(2.0 * kPi) / x;
    double s = 0.0;
    for (int k = 1; k < 50; ++k) s += std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * kPi * kPi / (8.0 * x * x));
    return f * s;
  }
  double s = 0.0;
  for (int k = 1; k < 100; ++k) s += (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
  return 1.0 - 2.0 * s;
}

/// Asymptotic critical value c with P(sqrt(n) D > c) = alpha.
inline double kolmogorov_critical(double alpha) {
  double lo = 0.2, hi = 5.0;
  for (int i = 0; i < 100; ++i) {
    const double m = 0.5 * (lo + hi);
    (1.0 - kolmogorov_cdf(m) > alpha ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

enum class Standardization { Empirical, Supplied };

struct NormalityReport {
  std::int64_t n_samples = 0;
  double ks_statistic = 0.0;
  double critical_value_5pct = 0.0;
  double p_value = 1.0;
  double mean_used = 0.0;
  double sd_used = 1.0;
  Standardization standardization = Standardization::Empirical;
  bool passes() const { return ks_statistic <= critical_value_5pct; }
};

/// One-sample KS test of (x - mean)/sd against the standard normal.
inline NormalityReport normality_test(std::vector<double> x, std::optional<std::pair<double, double>> mean_sd = {}) {
  NormalityReport r;
  r.n_samples = static_cast<std::int64_t>(x.size());
  if (x.size() < 500) throw InvalidArgument("normality test needs at least 500 samples");
  if (mean_sd) {
    r.mean_used = mean_sd->first;
    r.sd_used = mean_sd->second;
    r.standardization = Standardization::Supplied;
  } else {
    MomentAccumulator a;
    for (double v : x) a.add(v);
    const auto s = a.summary();
    r.mean_used = s.mean;
    r.sd_used = std::sqrt(s.variance);
  }
  if (!(r.sd_used > 0.0)) throw InvalidArgument("standard deviation must be positive");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-(x[i] - r.mean_used) / r.sd_used / std::sqrt(2.0));
    d = std::max({d, (i + 1.0) / n - f, f - i / n});
  }
  r.ks_statistic = d;
  r.critical_value_5pct = kolmogorov_critical(0.05) / std::sqrt(n);
  r.p_value = 1.0 - kolmogorov_cdf(std::sqrt(n) * d);
  return r;
}

struct SweepRow {
  int N = 0;
  MomentSummary summary;
  double predicted = 0.0;
  double normalized = 0.0;  // variance / (N^power * geometric factor), compare to the constant
};

struct SweepConfig {
  Family family = Family::SU2;
  std::vector<int> Ns;
  std::optional<Domain> domain;
  std::optional<TestFunction> test_function;
  /// BF only: run BF{1} on sqrt(N) * domain, the dilation picture of the flat model.
  bool dilate = false;
  std::int64_t n_trials = 10000;
  std::uint64_t seed = 1;
  int workers = 0;
  ZeroMethod method = ZeroMethod::Roots;
};

inline Domain dilated(const Domain& d, double f) {
  const GeometryModel g = d.geometry();
  if (auto p = std::get_if<Disk>(&d.shape())) return Domain(Disk{p->center * f, p->radius * f}, g);
  if (auto p = std::get_if<Annulus>(&d.shape())) return Domain(Annulus{p->center * f, p->r_in * f, p->r_out * f}, g);
  std::vector<cplx> v = std::get<Polygon>(d.shape()).vertices;
  for (cplx& z : v) z *= f;
  return Domain(Polygon{v}, g);
}

/// Variance versus N with the matching leading-order prediction per row.
inline std::vector<SweepRow> variance_vs_N_sweep(const SweepConfig& c) {
  if (c.domain.has_value() == c.test_function.has_value())
    throw InvalidArgument("sweep needs exactly one of domain or test function");
  if (c.dilate && c.family != Family::BargmannFock) throw InvalidArgument("dilation sweeps use the flat model");
  if (c.Ns.empty() || !std::is_sorted(c.Ns.begin(), c.Ns.end(), std::less_equal<int>()))
    throw InvalidArgument("N list must be non-empty and strictly increasing");
  std::vector<SweepRow> rows;
  for (int N : c.Ns) {
    SweepRow row;
    row.N = N;
    if (c.domain) {
      const Domain d = c.dilate ? dilated(*c.domain, std::sqrt(static_cast<double>(N))) : *c.domain;
      const int eN = c.dilate ? 1 : N;
      const EnsembleSpec e = EnsembleSpec::with_radius(c.family, eN, d.chart_extent());
      row.summary = run_count_experiment(e, d, c.n_trials, c.seed, c.workers, {c.method, 0.0, 0});
      const Prediction p = predicted_number_variance(eN, d);
      row.predicted = p.leading_value;
      row.normalized = row.summary.variance / (std::sqrt(static_cast<double>(eN)) * p.geometric_factor);
    } else {
      const TestFunction& phi = *c.test_function;
      const double R = std::abs(phi.center()) + phi.support_radius();
      const EnsembleSpec e = EnsembleSpec::with_radius(c.family, N, c.family == Family::SU11 ? std::min(R, 0.999) : R);
      row.summary = run_smooth_experiment(e, phi, c.n_trials, c.seed, c.workers);
      const Prediction p = predicted_smooth_variance(N, 1, phi.ddbar_norm_sq());
      row.predicted = p.leading_value;
      row.normalized = row.summary.variance * N / p.geometric_factor;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gafzero
