#include "mbkdv/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace mbkdv {

namespace {
// 2π split into a double and its rounding remainder.
constexpr double kTwoPiHi = 6.283185307179586;
constexpr double kTwoPiLo = 2.4492935982947064e-16;
constexpr std::int64_t kExactLimit = std::int64_t{1} << 53;
}  // namespace

std::int64_t phase4(std::int64_t k1, std::int64_t k2, std::int64_t k3, std::int64_t k4) {
  const std::int64_t s = k1 + k2 + k3 + k4;
  return cube(s) - cube(k1) - cube(k2) - cube(k3) - cube(k4);
}

double reduce_phase(std::int64_t m, double t) {
  if (m >= kExactLimit || m <= -kExactLimit) throw std::out_of_range("reduce_phase: |m| >= 2^53");
  const double md = static_cast<double>(m);
  const double p = md * t;
  const double e = std::fma(md, t, -p);
  const double q = std::nearbyint(p / kTwoPiHi);
  double r = std::fma(-q, kTwoPiHi, p);
  r = std::fma(-q, kTwoPiLo, r);
  return r + e;
}

std::complex<double> unit_phase(std::int64_t m, double t) {
  const double r = reduce_phase(m, t);
  return {std::cos(r), std::sin(r)};
}

PhaseCache::PhaseCache(double t, int n_max) : t_(t), n_max_(n_max), g_(2 * static_cast<std::size_t>(n_max) + 1) {
  if (n_max < 1) throw std::invalid_argument("PhaseCache: n_max must be >= 1");
  for (int j = 0; j <= n_max; ++j) {
    const auto g = unit_phase(cube(j), t);
    g_[static_cast<std::size_t>(n_max + j)] = g;
    g_[static_cast<std::size_t>(n_max - j)] = std::conj(g);
  }
}

std::complex<double> PhaseCache::bilinear(int k1, int k2) const {
  return cube_phase(k1 + k2) * std::conj(cube_phase(k1)) * std::conj(cube_phase(k2));
}

std::complex<double> PhaseCache::trilinear(int k1, int k2, int k3) const {
  return cube_phase(k1 + k2 + k3) * std::conj(cube_phase(k1) * cube_phase(k2) * cube_phase(k3));
}

std::complex<double> PhaseCache::quartic(int k1, int k2, int k3, int k4) const {
  return cube_phase(k1 + k2 + k3 + k4) *
         std::conj(cube_phase(k1) * cube_phase(k2) * cube_phase(k3) * cube_phase(k4));
}

}  // namespace mbkdv
