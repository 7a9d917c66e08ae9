#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gafzero/ensembles.hpp"
#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/quadrature.hpp"
#include "gafzero/rng.hpp"
#include "gafzero/zeros.hpp"

namespace gafzero {

namespace detail {

inline double dilog_series(double x) {
  double s = 0.0, p = x;
  for (int k = 1; k < 200; ++k) {
    const double t = p / (static_cast<double>(k) * k);
    s += t;
    if (t < 1e-17 * s) break;
    p *= x;
  }
  return s;
}

/// Li2(x) for x in [0, 1] given y = 1 - x accurately.
inline double dilog01(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return std::numbers::pi * std::numbers::pi / 6.0;
  if (x <= 0.5) return dilog_series(x);
  return std::numbers::pi * std::numbers::pi / 6.0 - std::log(x) * std::log(y) - dilog_series(y);
}

}  // namespace detail

/// Li2(x) on [0, 1].
inline double dilog(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("dilog argument must lie in [0, 1]");
  return detail::dilog01(x, 1.0 - x);
}

/// G~(t) = Li2(t^2) / (4 pi^2).
inline double g_tilde(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("g_tilde argument must lie in [0, 1]");
  return dilog(t * t) / (4.0 * kPi * kPi);
}

/// F(lambda) = G~(exp(-lambda)).
inline double bipotential_F(double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (std::isinf(lambda)) return 0.0;
  return detail::dilog01(std::exp(-2.0 * lambda), -std::expm1(-2.0 * lambda)) / (4.0 * kPi * kPi);
}

inline double bipotential_F1(double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  const double x = std::exp(-2.0 * lambda);
  return (x < 0.5 ? std::log1p(-x) : std::log(-std::expm1(-2.0 * lambda))) / (2.0 * kPi * kPi);
}

inline double bipotential_F2(double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  return 1.0 / (kPi * kPi * std::expm1(2.0 * lambda));
}

/// Pair correlation bipotential Q_N(z,w) = G~(P_N(z,w)) and its mixed derivative.
class Bipotential {
 public:
  explicit Bipotential(EnsembleSpec e) : k_(e) {}

  const KernelEvaluator& kernel() const { return k_; }

  double q(cplx z, cplx w) const { return bipotential_F(k_.lambda(z, w)); }

  /// d^2 Q / dzbar dwbar off the diagonal.
  cplx d2_zbar_wbar(cplx z, cplx w) const {
    const auto d = k_.derivatives(z, w);
    if (d.diagonal) throw DomainError("use the diagonal limit at z = w");
    return bipotential_F2(d.lambda) * d.d_zbar * d.d_wbar + bipotential_F1(d.lambda) * d.d_zbar_wbar;
  }

  /// Limit of d^2 Q/dzbar dwbar as w -> z along unit direction tau.
  cplx d2_diagonal_limit(cplx z, cplx tau) const {
    tau /= std::abs(tau);
    return -static_cast<double>(k_.ensemble().N) / (4.0 * kPi * kPi) * k_.ensemble().geometry().density(z) *
           tau * tau;
  }

 private:
  KernelEvaluator k_;
};

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
};

/// E[log|c1| log|c1 t + c2 sqrt(1-t^2)|] for independent standard complex Gaussians.
inline Estimate pair_log_moment(double t, std::int64_t n_draws, std::uint64_t seed, bool swap_roles = false) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("correlation must lie in [0, 1]");
  if (n_draws < 2) throw InvalidArgument("need at least two draws");
  const double s = std::sqrt(1.0 - t * t);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < n_draws; ++i) {
    cplx c1 = complex_gaussian(seed, 0, static_cast<std::uint64_t>(i));
    cplx c2 = complex_gaussian(seed, 1, static_cast<std::uint64_t>(i));
    if (swap_roles) std::swap(c1, c2);
    const double x = std::log(std::abs(c1)) * std::log(std::abs(c1 * t + c2 * s));
    const double d = x - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (x - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(n_draws - 1) / static_cast<double>(n_draws)), n_draws};
}

/// gamma^2/4 + pi^2 G~(t): the closed form pair_log_moment estimates.
inline double pair_log_moment_exact(double t) {
  constexpr double g = std::numbers::egamma;
  return 0.25 * g * g + kPi * kPi * g_tilde(t);
}

enum class QuadratureMode { OffsetGrids, LocalRefinement };

struct VarianceOptions {
  QuadratureMode mode = QuadratureMode::OffsetGrids;
  int nodes = 0;  // 0 picks a default from N and the boundary size
};

struct RefinementRow {
  int nodes;
  double value;
};

struct VarianceEstimate {
  double value = 0.0;
  double imag = 0.0;
  double error_estimate = 0.0;
  int nodes = 0;
  std::vector<RefinementRow> refinement;
};

namespace detail {

inline void check_geometry(const EnsembleSpec& e, const GeometryModel& g) {
  const GeometryModel eg = e.geometry();
  if (eg.kind != g.kind || (g.kind == MetricKind::Flat && g.scale != eg.scale))
    throw InvalidArgument("domain geometry does not match the ensemble");
}

// Pairs whose kernel is below exp(-kLambdaCut) contribute below double precision.
inline constexpr double kLambdaCut = 40.0;

inline cplx count_pair_term(const Bipotential& bp, cplx z, cplx w, cplx zb_z, cplx zb_w) {
  const auto d = bp.kernel().derivatives(z, w);
  if (d.lambda > kLambdaCut) return 0.0;
  if (d.diagonal) return bp.d2_diagonal_limit(z, std::conj(zb_z)) * zb_z * zb_w;
  return (bipotential_F2(d.lambda) * d.d_zbar * d.d_wbar) * zb_z * zb_w;
}

inline cplx count_offset(const Bipotential& bp, const Domain& d, int n) {
  const auto a = boundary_nodes(d, n, false), b = boundary_nodes(d, n, true);
  cplx s = 0.0;
  for (const auto& p : a) {
    cplx row = 0.0;
    for (const auto& q : b) row += q.weight * count_pair_term(bp, p.z, q.z, p.dzbar_ds, q.dzbar_ds);
    s += p.weight * row;
  }
  return -s;
}

/// Sorted breakpoints on [center, center + len): uniform spacing h plus geometric grading toward each focus.
inline void graded_breakpoints(double center, double len, double h, const std::vector<double>& foci, double band,
                               std::vector<double>& out) {
  out.clear();
  for (double t = 0.0; t < len; t += h) out.push_back(center + t);
  for (double f : foci) {
    out.push_back(f);
    for (double r = band; r > 1e-11 * len; r *= 0.25) {
      out.push_back(f + r);
      out.push_back(f - r);
    }
  }
  for (double& p : out) p = center + std::fmod(std::fmod(p - center, len) + len, len);
  out.push_back(center + len);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [&](double x, double y) { return y - x < 1e-13 * len; }), out.end());
}

/// Gauss panels graded toward corners and the diagonal; spectral on circles.
inline cplx count_local(const Bipotential& bp, const Domain& d, int n) {
  const auto& loops = d.boundary();
  const auto counts = loop_node_counts(d, n);
  const int N = bp.kernel().ensemble().N;
  const GeometryModel g = d.geometry();
  cplx total = 0.0;
  std::vector<double> so, wo, pts, ti, wi, foci;
  for (std::size_t lo = 0; lo < loops.size(); ++lo) {
    const auto& L = loops[lo];
    const double h_out = L.length() / counts[lo];
    if (L.is_circle()) {
      loop_params(L, counts[lo], false, so, wo);
    } else {
      foci.assign(L.vertex_params().begin(), L.vertex_params().end() - 1);
      graded_breakpoints(0.0, L.length(), h_out, foci, 0.5 * h_out, pts);
      so.clear();
      wo.clear();
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) quad::append_panel<12>(pts[k], pts[k + 1], so, wo);
    }
    for (std::size_t i = 0; i < so.size(); ++i) {
      const cplx z = L.point(so[i]), tz = std::conj(L.tangent(so[i]));
      const double band = 10.0 / std::sqrt(N * g.density(z));
      cplx row = 0.0;
      for (std::size_t li = 0; li < loops.size(); ++li) {
        const auto& M = loops[li];
        const double len = M.length();
        foci.clear();
        if (!M.is_circle()) foci.assign(M.vertex_params().begin(), M.vertex_params().end() - 1);
        const double center = li == lo ? so[i] : 0.0;
        if (li == lo) foci.push_back(center);
        graded_breakpoints(center, len, len / counts[li], foci, std::min(0.45 * len, band), pts);
        ti.clear();
        wi.clear();
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) quad::append_panel<12>(pts[k], pts[k + 1], ti, wi);
        for (std::size_t k = 0; k < ti.size(); ++k)
          row += wi[k] * count_pair_term(bp, z, M.point(ti[k]), tz, std::conj(M.tangent(ti[k])));
      }
      total += wo[i] * row;
    }
  }
  return -total;
}

}  // namespace detail

/// Var(#zeros in U) as the boundary double integral of the mixed derivative of Q_N.
inline VarianceEstimate variance_count(const EnsembleSpec& e, const Domain& d, const VarianceOptions& opt = {}) {
  detail::check_geometry(e, d.geometry());
  VarianceEstimate r;
  if (d.boundary().empty()) return r;
  Bipotential bp(e);
  int n = opt.nodes;
  if (n <= 0) {
    const double perim = std::max(d.chart_perimeter(), boundary_length(d));
    n = std::max(256, static_cast<int>(16.0 * std::ceil(std::sqrt(static_cast<double>(e.N))) * perim));
  }
  auto eval = [&](int m) {
    return opt.mode == QuadratureMode::OffsetGrids ? detail::count_offset(bp, d, m) : detail::count_local(bp, d, m);
  };
  const cplx coarse = eval(n / 2), fine = eval(n);
  r.value = fine.real();
  r.imag = fine.imag();
  r.error_estimate = std::abs(fine.real() - coarse.real());
  r.nodes = n;
  r.refinement = {{n / 2, coarse.real()}, {n, fine.real()}};
  if (std::abs(r.imag) > 1e-8 * std::abs(r.value) + 10.0 * r.error_estimate + 1e-14)
    throw ConvergenceError("boundary integral has a non-negligible imaginary part");
  if (r.value < -(10.0 * r.error_estimate + 1e-12)) throw ConvergenceError("boundary integral came out negative");
  return r;
}

namespace detail {

/// Smallest chart radius r with kernel below exp(-kLambdaCut) for every w with |w - z| >= r.
inline double kernel_cutoff_radius(const EnsembleSpec& e, cplx z) {
  const double N = e.N, az = std::abs(z);
  const double dmin = -std::expm1(-2.0 * kLambdaCut / N);
  auto lower = [&](double r) {
    switch (e.family) {
      case Family::SU2: return r * r / ((1.0 + az * az) * (1.0 + (az + r) * (az + r)));
      case Family::SU11: {
        const double den = 1.0 + az * (az + r);
        return r * r / (den * den);
      }
      case Family::BargmannFock: return 0.0;
    }
    return 0.0;
  };
  if (e.family == Family::BargmannFock) return std::sqrt(2.0 * kLambdaCut / N);
  double hi = 1.0;
  while (lower(hi) < dmin) {
    hi *= 2.0;
    if (hi > 1e8) return kInf;
  }
  double lo = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double m = 0.5 * (lo + hi);
    (lower(m) < dmin ? lo : hi) = m;
  }
  return hi;
}

}  // namespace detail

struct SmoothVarianceOptions {
  double resolution = 1.0;  // grid density multiplier; the error estimate reruns at 0.6x
};

/// Var(Z(phi)) = 1/4 int int Q_N(z,w) Delta phi(z) Delta phi(w) dA dA (Euclidean chart Laplacians).
inline VarianceEstimate variance_smooth(const EnsembleSpec& e, const TestFunction& phi,
                                        const SmoothVarianceOptions& opt = {}) {
  detail::check_geometry(e, phi.geometry());
  if (!(opt.resolution > 0.0)) throw InvalidArgument("resolution must be positive");
  VarianceEstimate r;
  if (phi.amplitude() == 0.0) return r;
  Bipotential bp(e);
  const GeometryModel g = e.geometry();
  const cplx a = phi.center();
  const double sig = phi.sigma(), R = phi.support_radius();
  auto run = [&](double res) {
    // outer polar grid around the bump center
    std::vector<double> orr, ow;
    const int opanels = static_cast<int>(std::ceil(13.0 * res));
    for (int p = 0; p < opanels; ++p) quad::append_panel<8>(R * p / opanels, R * (p + 1) / opanels, orr, ow);
    const int on_theta = static_cast<int>(std::ceil(32.0 * res));
    double total = 0.0;
    std::vector<double> ir, iw;
    for (std::size_t i = 0; i < orr.size(); ++i) {
      for (int j = 0; j < on_theta; ++j) {
        const cplx z = a + std::polar(orr[i], 2.0 * kPi * (j + 0.5 * (i % 2)) / on_theta);
        if (!g.in_chart(z)) continue;
        const double lz = phi.laplacian(z);
        if (lz == 0.0) continue;
        // inner polar grid around z, graded toward the diagonal
        const double rin = std::min(detail::kernel_cutoff_radius(e, z), std::abs(z - a) + R);
        const double hN = 1.0 / std::sqrt(e.N * g.density(z));
        const double h0 = std::min(rin, hN);
        ir.clear();
        iw.clear();
        double lo = h0;
        for (int k = 0; k < 14; ++k) {
          const double nlo = lo * 0.35;
          quad::append_panel<8>(nlo, lo, ir, iw);
          lo = nlo;
        }
        quad::append_panel<8>(0.0, lo, ir, iw);
        const double width = std::min(hN, 0.5 * sig) / res;
        const int np = std::max(1, static_cast<int>(std::ceil((rin - h0) / width)));
        for (int p = 0; p < np; ++p)
          quad::append_panel<8>(h0 + (rin - h0) * p / np, h0 + (rin - h0) * (p + 1) / np, ir, iw);
        double inner = 0.0;
        for (std::size_t k = 0; k < ir.size(); ++k) {
          const int nt = static_cast<int>(std::ceil(res * std::max(16.0, 12.0 * ir[k] / std::min(sig, hN))));
          double ring = 0.0;
          for (int m = 0; m < nt; ++m) {
            const cplx w = z + std::polar(ir[k], 2.0 * kPi * m / nt);
            if (!g.in_chart(w)) continue;
            const double lw = phi.laplacian(w);
            if (lw == 0.0) continue;
            const double lam = bp.kernel().lambda(z, w);
            if (lam > detail::kLambdaCut) continue;
            ring += bipotential_F(lam) * lw;
          }
          inner += iw[k] * ir[k] * ring * (2.0 * kPi / nt);
        }
        total += ow[i] * orr[i] * (2.0 * kPi / on_theta) * lz * inner;
      }
    }
    return 0.25 * total;
  };
  const double coarse = run(0.6 * opt.resolution), fine = run(opt.resolution);
  r.value = fine;
  r.error_estimate = std::abs(fine - coarse);
  r.refinement = {{0, coarse}, {1, fine}};
  if (r.value < -(10.0 * r.error_estimate + 1e-12)) throw ConvergenceError("smooth variance came out negative");
  return r;
}

}  // namespace gafzero
