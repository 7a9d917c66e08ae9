#pragma once

#include <array>
#include <cstddef>

#include <boost/math/quadrature/gauss.hpp>

namespace gafzero::quad {

/// Gauss-Legendre rule of order P on [-1, 1], expanded from Boost's half-rule.
template <std::size_t P>
struct GaussRule {
  std::array<double, P> x{};
  std::array<double, P> w{};

  GaussRule() {
    using G = boost::math::quadrature::gauss<double, P>;
    const auto& a = G::abscissa();
    const auto& b = G::weights();
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x[k] = 0.0;
        w[k] = b[i];
        ++k;
      } else {
        x[k] = -a[i];
        w[k] = b[i];
        ++k;
        x[k] = a[i];
        w[k] = b[i];
        ++k;
      }
    }
  }

  static const GaussRule& get() {
    static const GaussRule rule;
    return rule;
  }
};

/// Integrates f over [a, b] with one Gauss-Legendre panel.
template <std::size_t P, class F>
double panel(double a, double b, F&& f) {
  const auto& r = GaussRule<P>::get();
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < P; ++i) s += r.w[i] * f(m + h * r.x[i]);
  return s * h;
}

/// Appends nodes/weights of a P-point panel on [a, b].
template <std::size_t P, class Nodes, class Weights>
void append_panel(double a, double b, Nodes& nodes, Weights& weights) {
  const auto& r = GaussRule<P>::get();
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (std::size_t i = 0; i < P; ++i) {
    nodes.push_back(m + h * r.x[i]);
    weights.push_back(h * r.w[i]);
  }
}

}  // namespace gafzero::quad
