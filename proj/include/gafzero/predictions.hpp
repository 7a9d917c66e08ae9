#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "gafzero/ensembles.hpp"
#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/quadrature.hpp"

namespace gafzero {

/// Riemann zeta for real s > 1: direct sum to n = 10^4 plus Euler-Maclaurin tail.
inline double zeta(double s) {
  if (!(s > 1.0)) throw DomainError("zeta needs s > 1");
  constexpr int n = 10000;
  double sum = 0.0;
  for (int k = n - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double nn = n, a = std::pow(nn, -s);
  // int_n^inf x^-s + f(n)/2 - sum B_2j/(2j)! f^(2j-1)(n)
  double tail = nn * a / (s - 1.0) + 0.5 * a;
  constexpr double B[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0};
  double fact = 1.0, rising = s, pw = a / nn;
  for (int j = 1; j <= 4; ++j) {
    fact *= (2.0 * j - 1.0) * (2.0 * j);
    tail += B[j - 1] / fact * rising * pw;
    rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    pw /= nn * nn;
  }
  return sum + tail;
}

/// Zeta via the alternating eta series with Cohen-Rodriguez Villegas-Zagier acceleration.
inline double zeta_eta(double s) {
  if (!(s > 1.0)) throw DomainError("zeta needs s > 1");
  constexpr int n = 40;
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0, c = -d, acc = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    acc += c * std::pow(k + 1.0, -s);
    b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0));
  }
  const double eta = acc / d;
  return eta / (1.0 - std::pow(2.0, 1.0 - s));
}

/// nu_m = pi^{m-5/2} zeta(m + 1/2) / 8.
inline double nu(int m) {
  if (m < 1) throw InvalidArgument("dimension m must be >= 1");
  return std::pow(kPi, m - 2.5) * zeta(m + 0.5) / 8.0;
}

/// kappa_m = pi^{m-2} zeta(m + 2) / 4.
inline double kappa(int m) {
  if (m < 1) throw InvalidArgument("dimension m must be >= 1");
  return std::pow(kPi, m - 2.0) * zeta(m + 2.0) / 4.0;
}

/// nu_1 = zeta(3/2) / (8 pi^{3/2}).
inline double number_variance_constant() { return nu(1); }

enum class Theorem { NumberVariance, VolumeVariance, SmoothVariance, ExpectedCount };

inline std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::NumberVariance: return "number_variance";
    case Theorem::VolumeVariance: return "volume_variance";
    case Theorem::SmoothVariance: return "smooth_variance";
    case Theorem::ExpectedCount: return "expected_count";
  }
  return "?";
}

/// Leading-order variance: constant * geometric_factor * N^{power}.
struct Prediction {
  Theorem theorem;
  int N;
  int m;
  double constant;
  double geometric_factor;
  double power;
  double leading_value;
  double remainder_exponent;  // relative remainder O(N^{remainder_exponent + eps})
};

inline Prediction predicted_volume_variance(int N, int m, double boundary_volume) {
  if (N < 1) throw InvalidArgument("N must be >= 1");
  if (!(boundary_volume >= 0.0)) throw InvalidArgument("boundary volume must be >= 0");
  const double c = nu(m), p = m - 0.5;
  return {Theorem::VolumeVariance, N, m, c, boundary_volume, p, c * boundary_volume * std::pow(N, p), -0.5};
}

inline Prediction predicted_number_variance(int N, const Domain& d) {
  auto p = predicted_volume_variance(N, 1, boundary_length(d));
  p.theorem = Theorem::NumberVariance;
  return p;
}

/// Var Z(phi) ~ kappa_m N^{-m} ||ddbar phi||^2.
inline Prediction predicted_smooth_variance(int N, int m, double ddbar_norm_sq) {
  if (N < 1) throw InvalidArgument("N must be >= 1");
  if (!(ddbar_norm_sq >= 0.0)) throw InvalidArgument("norm must be >= 0");
  const double c = kappa(m), p = -static_cast<double>(m);
  return {Theorem::SmoothVariance, N, m, c, ddbar_norm_sq, p, c * ddbar_norm_sq * std::pow(N, p), -0.5};
}

/// Same prediction written with the Laplacian norm, for m = 1: zeta(3)/(16 pi) ||Delta phi||^2 / N.
inline double predicted_smooth_variance_laplacian(int N, double laplacian_norm_sq) {
  return zeta(3.0) / (16.0 * kPi) * laplacian_norm_sq / N;
}

/// E #zeros in U = N area(U) / pi.
inline double expected_count(const EnsembleSpec& e, const Domain& d) { return e.N * area(d) / kPi; }

inline Prediction predicted_expected_count(const EnsembleSpec& e, const Domain& d) {
  const double a = area(d);
  return {Theorem::ExpectedCount, e.N, 1, 1.0 / kPi, a, 1.0, expected_count(e, d), 0.0};
}

/// First intensity (N/pi) g(z) with respect to Lebesgue measure in the chart.
inline double expected_density(const EnsembleSpec& e, cplx z) { return e.N / kPi * e.geometry().density(z); }

/// Intensity of the truncated model from a five-point Laplacian of log Pi_N(z,z).
inline double expected_density_fd(const EnsembleSpec& e, cplx z, double h = 1e-3) {
  KernelEvaluator k(e);
  const double c = k.log_diagonal_truncated(z);
  const double lap = (k.log_diagonal_truncated(z + h) + k.log_diagonal_truncated(z - h) +
                      k.log_diagonal_truncated(z + cplx(0, h)) + k.log_diagonal_truncated(z - cplx(0, h)) - 4.0 * c) /
                     (h * h);
  return lap / (4.0 * kPi);
}

struct ScalingResidual {
  double max_abs = 0.0;
  cplx z0{};
  cplx u{};
  cplx v{};
};

/// max |P_N(z0 + u/sqrt(N g), z0 + v/sqrt(N g)) e^{|u-v|^2/2} - 1| over |u|, |v| <= bound,
/// with g the metric density at z0 (coordinates orthonormal at z0).
inline ScalingResidual scaling_residual_scan(const EnsembleSpec& e, cplx z0, double bound, int radial = 6,
                                             int angular = 16) {
  if (!(bound > 0.0)) throw InvalidArgument("bound must be positive");
  KernelEvaluator k(e);
  const double sc = 1.0 / std::sqrt(e.N * e.geometry().density(z0));
  std::vector<cplx> pts{0.0};
  for (int i = 1; i <= radial; ++i)
    for (int j = 0; j < angular; ++j) pts.push_back(std::polar(bound * i / radial, 2.0 * kPi * (j + 0.5 * (i % 2)) / angular));
  ScalingResidual r{0.0, z0, 0.0, 0.0};
  for (cplx u : pts) {
    for (cplx v : pts) {
      const double lp = -k.lambda(z0 + sc * u, z0 + sc * v) + 0.5 * std::norm(u - v);
      const double res = std::abs(std::expm1(lp));
      if (res > r.max_abs) r = {res, z0, u, v};
    }
  }
  return r;
}

struct OffDiagonalScan {
  double max_kernel = 0.0;
  double threshold_distance = 0.0;
  cplx z{};
  cplx w{};
};

/// max P_N(z,w) over chart pairs with Riemannian distance >= b sqrt(log N / N).
inline OffDiagonalScan offdiagonal_decay_scan(const EnsembleSpec& e, double b, int n_base = 9, int n_dir = 16) {
  if (!(b > 0.0)) throw InvalidArgument("b must be positive");
  const GeometryModel g = e.geometry();
  KernelEvaluator k(e);
  const double N = e.N;
  OffDiagonalScan out;
  out.threshold_distance = b * std::sqrt(std::log(N) / N);
  const double extent = e.family == Family::SU11 ? 0.6 : 1.5;
  for (int i = 0; i < n_base; ++i) {
    const cplx z = std::polar(extent * i / std::max(1, n_base - 1), 0.7 * i);
    for (int j = 0; j < n_dir; ++j) {
      const cplx dir = std::polar(1.0, 2.0 * kPi * j / n_dir);
      auto dist = [&](double t) {
        const cplx w = z + t * dir;
        return g.in_chart(w) ? g.distance(z, w) : kInf;
      };
      // smallest chart step reaching the threshold distance
      double hi = 1e-3;
      while (dist(hi) < out.threshold_distance && hi < 1e6) hi *= 2.0;
      if (!(dist(hi) >= out.threshold_distance)) continue;
      double lo = 0.0;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (lo + hi);
        (dist(m) < out.threshold_distance ? lo : hi) = m;
      }
      for (double f : {1.0, 1.1, 1.5, 2.0, 4.0}) {
        const cplx w = z + hi * f * dir;
        if (!g.in_chart(w) || dist(hi * f) < out.threshold_distance) continue;
        const double p = k.normalized(z, w);
        if (p > out.max_kernel) {
          out.max_kernel = p;
          out.z = z;
          out.w = w;
        }
      }
    }
  }
  return out;
}

/// int P_N(z,w) dV(w) at a base point, by radial quadrature in geodesic polar coordinates.
inline double kernel_mass(const EnsembleSpec& e, cplx z) {
  KernelEvaluator k(e);
  const GeometryModel g = e.geometry();
  // chart polar grid around z, substituting t = r/(1+r) on the infinite chart
  const bool bounded = e.family == Family::SU11;
  const double rmax = bounded ? 1.0 - std::abs(z) : kInf;
  const int n_theta = 64, panels = 64;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    s += quad::panel<16>(static_cast<double>(p) / panels, (p + 1.0) / panels, [&](double t) {
      double r, jac;
      if (bounded) {
        r = t * rmax;
        jac = rmax;
      } else {
        r = t / (1.0 - t);
        jac = 1.0 / ((1.0 - t) * (1.0 - t));
      }
      if (!std::isfinite(r)) return 0.0;
      double ring = 0.0;
      for (int j = 0; j < n_theta; ++j) {
        const cplx w = z + std::polar(r, 2.0 * kPi * j / n_theta);
        if (!g.in_chart(w)) continue;
        ring += k.normalized(z, w) * g.density(w);
      }
      return ring * 2.0 * kPi / n_theta * r * jac;
    });
  }
  return s;
}

}  // namespace gafzero
