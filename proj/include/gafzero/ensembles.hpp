#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/rng.hpp"

namespace gafzero {

enum class Family { SU2, BargmannFock, SU11 };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::SU2: return "su2";
    case Family::BargmannFock: return "bf";
    case Family::SU11: return "su11";
  }
  return "?";
}

/// Smallest truncation degree keeping the basis tail negligible on |z| <= R.
inline int default_truncation(Family f, int N, double R) {
  if (f == Family::SU2) return N;
  if (!(R >= 0.0) || !std::isfinite(R)) throw InvalidArgument("truncation radius must be finite");
  if (f == Family::BargmannFock) {
    const double lam = N * R * R;
    return static_cast<int>(std::ceil(lam + 8.0 * std::sqrt(lam) + 20.0));
  }
  if (R >= 1.0) throw InvalidArgument("SU(1,1) truncation radius must be < 1");
  const double r2 = R * R;
  const double lam = N * r2 / (1.0 - r2);
  int T = static_cast<int>(std::ceil(lam + 8.0 * std::sqrt(lam) + 20.0));
  // tail of sum_n C(N+n-1,n) r2^n relative to (1-r2)^{-N}
  const double log_total = -N * std::log1p(-r2);
  auto log_term = [&](int n) {
    return std::lgamma(N + n) - std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(N)) + n * std::log(r2);
  };
  if (r2 == 0.0) return T;
  for (int n = T + 1;; ++n) {
    // ratio of consecutive terms is (N+n)/(n+1) r2 < 1 past the peak, so the tail is geometric-bounded
    const double ratio = (N + n) * r2 / (n + 1.0);
    if (ratio < 1.0) {
      const double tail = log_term(n) - std::log1p(-ratio) - log_total;
      if (tail < std::log(1e-20)) return std::max(T, n - 1);
    }
    if (n > 2000000) throw InvalidArgument("SU(1,1) truncation too large");
  }
}

struct EnsembleSpec {
  Family family = Family::SU2;
  int N = 1;
  int truncation = 0;

  static EnsembleSpec su2(int N) { return make(Family::SU2, N, N); }
  static EnsembleSpec bf(int N, int truncation) { return make(Family::BargmannFock, N, truncation); }
  static EnsembleSpec su11(int N, int truncation) { return make(Family::SU11, N, truncation); }
  /// Family with truncation chosen for chart radius R.
  static EnsembleSpec with_radius(Family f, int N, double R) {
    if (N < 1) throw InvalidArgument("N must be >= 1");
    return make(f, N, default_truncation(f, N, R));
  }

  static EnsembleSpec make(Family f, int N, int truncation) {
    if (N < 1) throw InvalidArgument("N must be >= 1");
    if (f == Family::SU2) truncation = N;
    if (f == Family::SU11 && N < 2) throw InvalidArgument("SU(1,1) ensembles need N >= 2");
    if (truncation < 1) throw InvalidArgument("truncation degree must be >= 1");
    return {f, N, truncation};
  }

  int degree() const { return truncation; }

  /// log of the basis coefficient |w_k| multiplying z^k.
  double log_weight(int k) const {
    switch (family) {
      case Family::SU2:
        return 0.5 * (std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0));
      case Family::BargmannFock:
        return 0.5 * k * std::log(static_cast<double>(N)) - 0.5 * std::lgamma(k + 1.0);
      case Family::SU11:
        return 0.5 * (std::lgamma(N + static_cast<double>(k)) - std::lgamma(k + 1.0) -
                      std::lgamma(static_cast<double>(N)));
    }
    return 0.0;
  }

  GeometryModel geometry() const {
    switch (family) {
      case Family::SU2: return GeometryModel::fubini_study();
      case Family::BargmannFock: return GeometryModel::flat();
      case Family::SU11: return GeometryModel::hyperbolic();
    }
    return {};
  }

  /// Diagonal of the Bergman kernel in the Hermitian norm (includes the ensemble constant).
  double diagonal_constant() const {
    switch (family) {
      case Family::SU2: return (N + 1.0) / kPi;
      case Family::BargmannFock: return N / kPi;
      case Family::SU11: return (N - 1.0) / kPi;
    }
    return 0.0;
  }

  bool operator==(const EnsembleSpec&) const = default;
};

inline std::string to_string(const EnsembleSpec& e) {
  std::string s = to_string(e.family) + ":" + std::to_string(e.N);
  if (e.family != Family::SU2) s += ":" + std::to_string(e.truncation);
  return s;
}

/// One draw of the Gaussian section: i.i.d. standard complex coefficients.
struct SectionSample {
  EnsembleSpec ensemble;
  std::vector<cplx> coefficients;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};

/// Draws trial `trial` of the stream `seed`; coefficient k uses Philox counter (k, trial).
inline SectionSample sample(const EnsembleSpec& e, std::uint64_t seed, std::uint64_t trial) {
  SectionSample s{e, {}, seed, trial};
  s.coefficients.resize(static_cast<std::size_t>(e.degree()) + 1);
  for (int k = 0; k <= e.degree(); ++k) s.coefficients[k] = complex_gaussian(seed, trial, static_cast<std::uint64_t>(k));
  return s;
}

struct SectionValue {
  double log_modulus;
  double phase;
};

/// The sample as a polynomial p(y) = sum b_k y^k with z = scale*y and s(z) = exp(log_offset) p(y);
/// scale balances the end coefficients so roots cluster near |y| = 1.
class Section {
 public:
  explicit Section(const SectionSample& s) : ensemble_(s.ensemble) {
    const auto& c = s.coefficients;
    if (static_cast<int>(c.size()) != ensemble_.degree() + 1)
      throw InvalidArgument("coefficient count does not match the ensemble degree");
    int lo = -1, hi = -1;
    for (int k = 0; k < static_cast<int>(c.size()); ++k) {
      if (c[k] != cplx{}) {
        if (lo < 0) lo = k;
        hi = k;
      }
    }
    if (lo < 0) throw DegenerateSample("all coefficients vanish");
    std::vector<double> lw(c.size());
    for (int k = lo; k <= hi; ++k) lw[k] = ensemble_.log_weight(k) + std::log(std::abs(c[k]));
    log_scale_ = hi > lo ? (lw[lo] - lw[hi]) / (hi - lo) : 0.0;
    scale_ = std::exp(log_scale_);
    double mx = -kInf;
    for (int k = lo; k <= hi; ++k)
      if (c[k] != cplx{}) mx = std::max(mx, ensemble_.log_weight(k) + k * log_scale_);
    log_offset_ = mx;
    b_.assign(static_cast<std::size_t>(hi) + 1, cplx{});
    for (int k = lo; k <= hi; ++k) {
      if (c[k] == cplx{}) continue;
      const double e = ensemble_.log_weight(k) + k * log_scale_ - mx;
      b_[k] = e < -740.0 ? cplx{} : c[k] * std::exp(e);
    }
    low_ = lo;
  }

  const EnsembleSpec& ensemble() const { return ensemble_; }
  double scale() const { return scale_; }
  double log_scale() const { return log_scale_; }
  double log_offset() const { return log_offset_; }
  const std::vector<cplx>& coefficients() const { return b_; }
  int degree() const { return static_cast<int>(b_.size()) - 1; }
  /// Multiplicity of the zero at the origin.
  int low_order() const { return low_; }

  /// p(y), p'(y)/p(y) and a running bound sum |b_k||y|^k; reversed evaluation for |y| > 1.
  struct Eval {
    cplx p;           // p(y) / y^T when reversed
    cplx dlog;        // p'(y)/p(y)
    double log_bound; // log of sum |b_k||y|^k
    double log_abs;   // log|p(y)|
    double arg;       // arg p(y)
  };

  Eval eval_y(cplx y) const {
    const int T = degree();
    Eval r{};
    if (std::abs(y) <= 1.0) {
      cplx p = b_[T], dp = 0.0;
      double e = std::abs(b_[T]);
      const double ay = std::abs(y);
      for (int k = T - 1; k >= 0; --k) {
        dp = dp * y + p;
        p = p * y + b_[k];
        e = e * ay + std::abs(b_[k]);
      }
      r.p = p;
      r.dlog = dp / p;
      r.log_bound = std::log(e);
      r.log_abs = std::log(std::abs(p));
      r.arg = std::arg(p);
      return r;
    }
    const cplx u = 1.0 / y;
    const double au = std::abs(u);
    cplx q = b_[0], dq = 0.0;
    double e = std::abs(b_[0]);
    for (int k = 1; k <= T; ++k) {
      dq = dq * u + q;
      q = q * u + b_[k];
      e = e * au + std::abs(b_[k]);
    }
    const double tl = T * std::log(std::abs(y));
    r.p = q;
    r.dlog = static_cast<double>(T) / y - u * u * dq / q;
    r.log_bound = std::log(e) + tl;
    r.log_abs = std::log(std::abs(q)) + tl;
    r.arg = std::remainder(std::arg(q) + T * std::arg(y), 2.0 * kPi);
    return r;
  }

  SectionValue value(cplx z) const {
    check_chart(z);
    const auto r = eval_y(z / scale_);
    return {r.log_abs + log_offset_, r.arg};
  }

  /// s'(z)/s(z).
  cplx log_derivative(cplx z) const {
    check_chart(z);
    return eval_y(z / scale_).dlog / scale_;
  }

 private:
  void check_chart(cplx z) const {
    if (ensemble_.family == Family::SU11 && std::norm(z) >= 1.0)
      throw DomainError("SU(1,1) sections live on the unit disk");
  }

  EnsembleSpec ensemble_;
  double scale_ = 1.0, log_scale_ = 0.0, log_offset_ = 0.0;
  std::vector<cplx> b_;
  int low_ = 0;
};

/// log|s(z)| and arg s(z) in the local frame (no ensemble constant).
inline SectionValue evaluate(const SectionSample& s, cplx z) { return Section(s).value(z); }

/// Lambda = -log P_N and its first derivatives in zbar, wbar.
struct LambdaDerivatives {
  double lambda;
  cplx d_zbar;
  cplx d_wbar;
  cplx d_zbar_wbar;
  bool diagonal;
};

/// Normalized Szego kernel P_N(z,w) = |Pi_N(z,w)| / sqrt(Pi_N(z,z) Pi_N(w,w)) of the untruncated model.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(EnsembleSpec e) : e_(e) {}

  const EnsembleSpec& ensemble() const { return e_; }

  /// Chordal-type quantity d with P_N = (1-d)^{N/2}; BF returns |z-w|^2.
  double separation(cplx z, cplx w) const {
    switch (e_.family) {
      case Family::SU2: return std::norm(z - w) / ((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
      case Family::BargmannFock: return std::norm(z - w);
      case Family::SU11:
        check(z);
        check(w);
        return std::norm(z - w) / std::norm(1.0 - z * std::conj(w));
    }
    return 0.0;
  }

  double lambda(cplx z, cplx w) const {
    const double d = separation(z, w);
    if (e_.family == Family::BargmannFock) return 0.5 * e_.N * d;
    if (d >= 1.0) return kInf;
    return -0.5 * e_.N * std::log1p(-d);
  }

  double normalized(cplx z, cplx w) const { return std::exp(-lambda(z, w)); }

  LambdaDerivatives derivatives(cplx z, cplx w) const {
    LambdaDerivatives r{lambda(z, w), {}, {}, {}, z == w};
    const double h = 0.5 * e_.N;
    switch (e_.family) {
      case Family::SU2:
        r.d_zbar = h * (z - w) / ((1.0 + std::norm(z)) * (1.0 + std::conj(z) * w));
        r.d_wbar = h * (w - z) / ((1.0 + std::norm(w)) * (1.0 + z * std::conj(w)));
        break;
      case Family::BargmannFock:
        r.d_zbar = h * (z - w);
        r.d_wbar = h * (w - z);
        break;
      case Family::SU11:
        r.d_zbar = h * (z - w) / ((1.0 - std::norm(z)) * (1.0 - std::conj(z) * w));
        r.d_wbar = h * (w - z) / ((1.0 - std::norm(w)) * (1.0 - z * std::conj(w)));
        break;
    }
    return r;
  }

  /// log sum_k |w_k|^2 |z|^{2k} for the untruncated basis (local frame).
  double log_diagonal(cplx z) const {
    const double r2 = std::norm(z);
    switch (e_.family) {
      case Family::SU2: return e_.N * std::log1p(r2);
      case Family::BargmannFock: return e_.N * r2;
      case Family::SU11: check(z); return -e_.N * std::log1p(-r2);
    }
    return 0.0;
  }

  /// Same sum over the truncated basis actually sampled.
  double log_diagonal_truncated(cplx z) const {
    const double lr = std::log(std::norm(z));
    double mx = -kInf;
    std::vector<double> t(static_cast<std::size_t>(e_.degree()) + 1);
    for (int k = 0; k <= e_.degree(); ++k) {
      t[k] = 2.0 * e_.log_weight(k) + (k == 0 ? 0.0 : k * lr);
      mx = std::max(mx, t[k]);
    }
    double s = 0.0;
    for (double v : t) s += std::exp(v - mx);
    return mx + std::log(s);
  }

 private:
  static void check(cplx z) {
    if (std::norm(z) >= 1.0) throw DomainError("SU(1,1) kernel defined on the unit disk");
  }
  EnsembleSpec e_;
};

}  // namespace gafzero
