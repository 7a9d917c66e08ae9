#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace gafzero {

/// Philox4x32-10 counter-based generator (Salmon et al.).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
  }
};

namespace detail {

/// Uniform in (0, 1], 53 bits from two words.
inline double unit_open(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t m = (std::uint64_t{a >> 5} << 26) | (b >> 6);
  return (static_cast<double>(m) + 1.0) * 0x1.0p-53;
}

inline Philox4x32::Key seed_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace detail

/// Uniform pair in (0, 1] addressed by (seed, stream, index).
inline std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const Philox4x32::Counter c{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                              static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const auto r = Philox4x32::block(c, detail::seed_key(seed));
  return {detail::unit_open(r[0], r[1]), detail::unit_open(r[2], r[3])};
}

/// Standard complex Gaussian (E|c|^2 = 1) via Box-Muller.
inline std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const auto u = uniform_pair(seed, stream, index);
  return std::polar(std::sqrt(-std::log(u[0])), 2.0 * std::numbers::pi * u[1]);
}

}  // namespace gafzero
