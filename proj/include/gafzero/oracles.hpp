#pragma once

// Independent numerical routes to quantities the library computes in closed form.
// Used by the unit tests, the acceptance suite and the selftest command.

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gafzero/bipotential.hpp"
#include "gafzero/ensembles.hpp"

namespace gafzero::oracle {

/// (1/4pi^2) int_{R^{2m-1}} x1^2 / (e^{|x|^2} - 1) dx, reduced to a radial integral.
inline double nu_integral(int m) {
  const double d = 2.0 * m - 1.0;
  const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / boost::math::tgamma(0.5 * d);
  boost::math::quadrature::exp_sinh<double> q;
  const double radial = q.integrate([&](double r) { return r < 1e-100 || r > 26.0 ? 0.0 : std::pow(r, 2.0 * m) / std::expm1(r * r); }, 1e-15);
  return sphere * radial / (d * 4.0 * kPi * kPi);
}

/// int_{C^m} G~(e^{-|v|^2/2}) dv by radial quadrature.
inline double kappa_integral(int m) {
  const double sphere = 2.0 * std::pow(kPi, m) / boost::math::tgamma(static_cast<double>(m));
  boost::math::quadrature::exp_sinh<double> q;
  const double radial = q.integrate(
      [&](double r) { return r > 60.0 ? 0.0 : std::pow(r, 2.0 * m - 1.0) * g_tilde(std::exp(-0.5 * r * r)); }, 1e-15);
  return sphere * radial;
}

/// (1/pi) int log|c| e^{-|c|^2} d^2c; equals -gamma/2.
inline double mean_log_modulus() {
  boost::math::quadrature::exp_sinh<double> q;
  return 2.0 * q.integrate([](double r) { return r < 1e-300 || r > 27.0 ? 0.0 : std::log(r) * std::exp(-r * r) * r; }, 1e-15);
}

/// P_N(z,w) from explicit summation of the orthonormal basis (no closed form).
inline double kernel_basis_sum(const EnsembleSpec& e, std::complex<double> z, std::complex<double> w, int terms = 0) {
  const int K = e.family == Family::SU2 ? e.N : (terms > 0 ? terms : 4000);
  auto pi = [&](std::complex<double> a, std::complex<double> b) {
    std::complex<double> s = 0.0;
    const std::complex<double> x = a * std::conj(b);
    for (int k = 0; k <= K; ++k) {
      double lw2 = 0.0;
      if (e.family == Family::SU2)
        lw2 = std::lgamma(e.N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(e.N - k + 1.0);
      else if (e.family == Family::BargmannFock)
        lw2 = k * std::log(static_cast<double>(e.N)) - std::lgamma(k + 1.0);
      else
        lw2 = std::lgamma(e.N + static_cast<double>(k)) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(e.N));
      s += std::exp(lw2) * std::pow(x, k);
    }
    return s;
  };
  return std::abs(pi(z, w)) / std::sqrt(std::abs(pi(z, z)) * std::abs(pi(w, w)));
}

/// Bargmann-Fock smooth variance through the translation-invariant reduction
/// Var = 1/4 int F(N|v|^2/2) C(|v|) dv with C the autocorrelation of Delta phi for a Gaussian bump.
inline double bf_smooth_variance(int N, double sigma, double amplitude = 1.0) {
  auto C = [&](double r) {
    const double rho = r * r / (2.0 * sigma * sigma);
    return amplitude * amplitude * 2.0 * kPi / (sigma * sigma) * (rho * rho - 4.0 * rho + 2.0) * std::exp(-rho);
  };
  auto f = [&](double r) { return bipotential_F(0.5 * N * r * r) * C(r) * 2.0 * kPi * r; };
  double err = 0.0;
  const double hi = 14.0 * sigma;
  return 0.25 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 25, 1e-13, &err);
}

}  // namespace gafzero::oracle
