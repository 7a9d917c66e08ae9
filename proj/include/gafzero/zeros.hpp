#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "gafzero/ensembles.hpp"
#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/quadrature.hpp"

namespace gafzero {

enum class ZeroMethod { Roots, ArgumentPrinciple };

struct ZeroSet {
  std::vector<cplx> points;
  /// log(|s(z_k)| / sum_j |a_j||z_k|^j) for each point.
  std::vector<double> residual_log_moduli;
  ZeroMethod method = ZeroMethod::Roots;
  int iterations = 0;
};

/// Root finding failed to converge; carries the partial iterate.
class RootConvergenceError : public ConvergenceError {
 public:
  RootConvergenceError(const std::string& what, ZeroSet partial)
      : ConvergenceError(what), partial_(std::move(partial)) {}
  const ZeroSet& partial() const { return partial_; }

 private:
  ZeroSet partial_;
};

struct RootOptions {
  int max_iterations = 200;
};

namespace detail {

/// Starting points from the upper convex hull of (k, log|b_k|).
inline std::vector<cplx> newton_polygon_start(const std::vector<cplx>& b, int lo) {
  const int T = static_cast<int>(b.size()) - 1;
  std::vector<int> idx;
  std::vector<double> lg(b.size(), -kInf);
  for (int k = lo; k <= T; ++k)
    if (b[k] != cplx{}) lg[k] = std::log(std::abs(b[k]));
  std::vector<int> hull;
  for (int k = lo; k <= T; ++k) {
    if (b[k] == cplx{}) continue;
    while (hull.size() >= 2) {
      const int i = hull[hull.size() - 2], j = hull.back();
      // drop j when it lies on or below the chord i -> k
      if ((lg[j] - lg[i]) * (k - i) <= (lg[k] - lg[i]) * (j - i)) hull.pop_back();
      else break;
    }
    hull.push_back(k);
  }
  std::vector<cplx> y;
  y.reserve(static_cast<std::size_t>(T - lo));
  const int n = T - lo;
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const int i = hull[h], j = hull[h + 1];
    const double r = std::exp((lg[i] - lg[j]) / (j - i));
    for (int m = 0; m < j - i; ++m) {
      const double th = 2.0 * kPi * m / (j - i) + 2.0 * kPi * static_cast<double>(i) / n + 0.7;
      y.push_back(std::polar(r, th));
    }
  }
  return y;
}

}  // namespace detail

/// All zeros of the (truncated) section in the chart via Aberth-Ehrlich iteration.
inline ZeroSet find_zeros(const Section& sec, const RootOptions& opt = {}) {
  ZeroSet out;
  const int T = sec.degree();
  const int lo = sec.low_order();
  const auto& b = sec.coefficients();
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<cplx> y = detail::newton_polygon_start(b, lo);
  const int n = static_cast<int>(y.size());
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  const double bound_factor = std::log(4.0 * (T + 1) * eps);
  int active = n;
  int it = 0;
  for (; it < opt.max_iterations && active > 0; ++it) {
    active = 0;
    for (int k = 0; k < n; ++k) {
      if (done[k]) continue;
      const auto ev = sec.eval_y(y[k]);
      if (ev.log_abs <= ev.log_bound + bound_factor) {
        done[k] = 1;
        continue;
      }
      const cplx ratio = 1.0 / ev.dlog;
      cplx sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        const cplx d = y[k] - y[j];
        sum += std::conj(d) / std::norm(d);
      }
      // zeros at the origin act as fixed roots of the full polynomial
      if (lo > 0) sum += static_cast<double>(lo) / y[k];
      const cplx corr = ratio / (1.0 - ratio * sum);
      y[k] -= corr;
      if (std::abs(corr) <= 4.0 * eps * std::abs(y[k])) done[k] = 1;
      else ++active;
    }
  }
  out.iterations = it;
  // Newton polish
  for (int k = 0; k < n; ++k) {
    for (int p = 0; p < 3; ++p) {
      const auto ev = sec.eval_y(y[k]);
      if (!std::isfinite(ev.log_abs) || ev.log_abs <= ev.log_bound + std::log(eps)) break;
      const cplx cand = y[k] - 1.0 / ev.dlog;
      const auto ev2 = sec.eval_y(cand);
      if (ev2.log_abs - ev2.log_bound < ev.log_abs - ev.log_bound) y[k] = cand;
      else break;
    }
  }
  const bool chart_disk = sec.ensemble().family == Family::SU11;
  for (int k = 0; k < lo; ++k) {
    out.points.push_back(0.0);
    out.residual_log_moduli.push_back(-kInf);
  }
  for (int k = 0; k < n; ++k) {
    const cplx z = y[k] * sec.scale();
    if (chart_disk && std::norm(z) >= 1.0) continue;
    const auto ev = sec.eval_y(y[k]);
    out.points.push_back(z);
    out.residual_log_moduli.push_back(ev.log_abs - ev.log_bound);
  }
  if (active > 0) {
    throw RootConvergenceError("root finder did not converge in " + std::to_string(opt.max_iterations) +
                                   " iterations",
                               out);
  }
  return out;
}

inline ZeroSet find_zeros(const SectionSample& s, const RootOptions& opt = {}) {
  return find_zeros(Section(s), opt);
}

struct CountResult {
  int count = 0;
  bool boundary_flag = false;
};

inline double default_boundary_tol(const Domain& d) { return 1e-9 * d.characteristic_radius(); }

inline CountResult count_in_domain(const ZeroSet& zs, const Domain& d, double tol) {
  CountResult r;
  for (cplx z : zs.points) {
    const Location loc = contains(d, z, tol);
    if (loc == Location::Inside) ++r.count;
    else if (loc == Location::Boundary) r.boundary_flag = true;
  }
  return r;
}

inline CountResult count_in_domain(const SectionSample& s, const Domain& d, double tol = 0.0) {
  return count_in_domain(find_zeros(s), d, tol > 0.0 ? tol : default_boundary_tol(d));
}

namespace detail {

/// FFTW plans keyed by (size, sign); planning is serialized, execution is thread-safe.
inline fftw_plan cached_plan(int n, int sign) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find({n, sign});
  if (it != plans.end()) return it->second;
  std::vector<cplx> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(b.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(std::make_pair(n, sign), p);
  return p;
}

/// Phases of the section and their arclength derivatives at m equispaced points on a circle about the origin.
inline void circle_phases_fft(const Section& sec, const BoundaryLoop& l, int m, bool offset,
                              std::vector<double>& phase, std::vector<double>& dphase) {
  const auto& b = sec.coefficients();
  const int T = sec.degree();
  const double dir = l.counterclockwise() ? 1.0 : -1.0;
  const double lrho = std::log(l.radius()) - sec.log_scale();
  const double shift = offset ? dir * kPi / m : 0.0;
  double mx = -kInf;
  std::vector<double> lm(b.size());
  for (int k = 0; k <= T; ++k) {
    lm[k] = b[k] == cplx{} ? -kInf : std::log(std::abs(b[k])) + k * lrho;
    mx = std::max(mx, lm[k]);
  }
  std::vector<cplx> in(static_cast<std::size_t>(m), cplx{}), din(static_cast<std::size_t>(m), cplx{});
  std::vector<cplx> out(static_cast<std::size_t>(m)), dout(static_cast<std::size_t>(m));
  for (int k = 0; k <= T; ++k) {
    const double e = lm[k] - mx;
    if (e < -700.0) continue;
    const cplx t = b[k] / std::abs(b[k]) * std::exp(e) * std::polar(1.0, k * shift);
    in[k % m] += t;
    din[k % m] += static_cast<double>(k) * t;
  }
  const fftw_plan plan = cached_plan(m, dir > 0 ? FFTW_BACKWARD : FFTW_FORWARD);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(din.data()), reinterpret_cast<fftw_complex*>(dout.data()));
  phase.resize(static_cast<std::size_t>(m));
  dphase.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    if (out[k] == cplx{}) throw NearBoundaryZero("section vanishes at a boundary node");
    phase[k] = std::arg(out[k]);
    // d arg / d theta = Re(y p'(y) / p(y)), theta = dir * s / r
    dphase[k] = dir / l.radius() * (dout[k] / out[k]).real();
  }
}

}  // namespace detail

struct WindingResult {
  int count = 0;
  double residual = 0.0;
  int evaluations = 0;
};

/// Zero count by summing wrapped phase increments along the boundary. A step is accepted when the increment
/// is below pi/2 and agrees with the trapezoid prediction from the phase derivative; otherwise it is bisected.
inline WindingResult count_by_argument_principle(const Section& sec, const Domain& d, int n_nodes = 0,
                                                 bool offset = false) {
  WindingResult res;
  if (n_nodes <= 0) {
    int n = 64;
    while (n < 8 * (sec.degree() + 1)) n *= 2;
    n_nodes = n;
  }
  double total = 0.0;
  const auto counts = d.boundary().empty() ? std::vector<int>{} : loop_node_counts(d, n_nodes);
  std::vector<double> s, w, ph, dph;
  for (std::size_t li = 0; li < d.boundary().size(); ++li) {
    const BoundaryLoop& l = d.boundary()[li];
    const double L = l.length();
    loop_params(l, std::max(counts[li], 4), offset, s, w);
    const int m = static_cast<int>(s.size());
    auto phase_at = [&](double t) {
      ++res.evaluations;
      const cplx z = l.point(t);
      const SectionValue v = sec.value(z);
      if (!std::isfinite(v.log_modulus)) throw NearBoundaryZero("section vanishes on the boundary");
      return std::make_pair(v.phase, (sec.log_derivative(z) * l.tangent(t)).imag());
    };
    if (l.is_circle() && l.center() == cplx{}) {
      detail::circle_phases_fft(sec, l, m, offset, ph, dph);
      res.evaluations += m;
    } else {
      ph.resize(static_cast<std::size_t>(m));
      dph.resize(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) std::tie(ph[k], dph[k]) = phase_at(s[k]);
    }
    const double min_len = 1e-13 * L;
    auto refine = [&](auto&& self, double a, double bb, double pa, double pb, double da, double db,
                      int depth) -> double {
      const double inc = std::remainder(pb - pa, 2.0 * kPi);
      const double predicted = 0.5 * (da + db) * (bb - a);
      if (std::abs(inc) <= 0.5 * kPi && std::abs(inc - predicted) <= 0.25 * kPi) return inc;
      if (depth > 60 || bb - a < min_len) throw NearBoundaryZero("zero too close to the boundary");
      const double mid = 0.5 * (a + bb);
      const auto [pm, dm] = phase_at(mid);
      return self(self, a, mid, pa, pm, da, dm, depth + 1) + self(self, mid, bb, pm, pb, dm, db, depth + 1);
    };
    for (int k = 0; k < m; ++k) {
      const double a = s[k], bb = k + 1 < m ? s[k + 1] : s[0] + L;
      const int k1 = (k + 1) % m;
      total += refine(refine, a, bb, ph[k], ph[k1], dph[k], dph[k1], 0);
    }
  }
  const double winding = total / (2.0 * kPi);
  const double k = std::round(winding);
  res.residual = std::abs(winding - k);
  if (res.residual > 0.1) throw NearBoundaryZero("winding number is not close to an integer");
  res.count = static_cast<int>(k);
  // the section has N zeros on the sphere; a region containing infinity gains the ones at the pole
  if (d.contains_infinity()) res.count += sec.ensemble().N;
  return res;
}

inline int count_by_argument_principle(const SectionSample& s, const Domain& d, int n_nodes = 0) {
  return count_by_argument_principle(Section(s), d, n_nodes).count;
}

/// Gaussian bump phi(z) = A exp(-|z-a|^2 / sigma^2) with norms taken in a Kahler metric.
class TestFunction {
 public:
  static TestFunction gaussian_bump(cplx center, double sigma, GeometryModel g, double amplitude = 1.0) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("bump width must be positive");
    TestFunction f;
    f.a_ = center;
    f.sigma_ = sigma;
    f.amp_ = amplitude;
    f.g_ = g;
    if (g.kind == MetricKind::Hyperbolic && std::abs(center) + f.support_radius() >= 1.0)
      throw InvalidArgument("test function support must lie inside the unit disk");
    return f;
  }

  static TestFunction zero(GeometryModel g) { return gaussian_bump(0.0, 0.1, g, 0.0); }

  cplx center() const { return a_; }
  double sigma() const { return sigma_; }
  double amplitude() const { return amp_; }
  const GeometryModel& geometry() const { return g_; }
  /// Radius beyond which |phi| and its derivatives are below 1e-15 relative.
  double support_radius() const { return 6.5 * sigma_; }

  double value(cplx z) const { return amp_ * std::exp(-std::norm(z - a_) / (sigma_ * sigma_)); }

  /// Euclidean chart Laplacian.
  double laplacian(cplx z) const {
    const double s2 = sigma_ * sigma_, u = std::norm(z - a_) / s2;
    return amp_ * 4.0 / s2 * (u - 1.0) * std::exp(-u);
  }

  /// int (Delta_omega phi)^2 omega.
  double laplacian_norm_sq() const {
    if (amp_ == 0.0) return 0.0;
    if (g_.kind == MetricKind::Flat) return amp_ * amp_ * 4.0 * kPi / (sigma_ * sigma_ * g_.scale);
    return polar_integral([&](cplx z) {
      const double l = laplacian(z);
      return l * l / g_.density(z);
    });
  }

  double ddbar_norm_sq() const { return 0.25 * laplacian_norm_sq(); }

  /// int phi omega.
  double omega_integral() const {
    if (g_.kind == MetricKind::Flat) return amp_ * kPi * sigma_ * sigma_ * g_.scale;
    return polar_integral([&](cplx z) { return value(z) * g_.density(z); });
  }

  /// Polar Gauss-Legendre x trapezoid quadrature over the support disk.
  template <class F>
  double polar_integral(F&& f, int panels = 26, int n_theta = 128) const {
    const double R = support_radius(), h = R / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
      s += quad::panel<16>(p * h, (p + 1) * h, [&](double r) {
        double t = 0.0;
        for (int j = 0; j < n_theta; ++j) t += f(a_ + std::polar(r, 2.0 * kPi * j / n_theta));
        return t * r * 2.0 * kPi / n_theta;
      });
    }
    return s;
  }

 private:
  cplx a_{};
  double sigma_ = 1.0, amp_ = 1.0;
  GeometryModel g_{};
};

inline double linear_statistic(const ZeroSet& zs, const TestFunction& phi) {
  double s = 0.0;
  for (cplx z : zs.points) s += phi.value(z);
  return s;
}

inline double linear_statistic(const SectionSample& s, const TestFunction& phi) {
  return linear_statistic(find_zeros(s), phi);
}

/// E Z(phi) = (N/pi) int phi omega.
inline double expected_linear_statistic(const EnsembleSpec& e, const TestFunction& phi) {
  return e.N / kPi * phi.omega_integral();
}

}  // namespace gafzero
