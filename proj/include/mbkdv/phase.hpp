#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace mbkdv {

/// k³ in exact 64-bit arithmetic.
constexpr std::int64_t cube(std::int64_t k) { return k * k * k; }

/// (k1+k2+k3+k4)³ − Σ kᵢ³ in exact 64-bit arithmetic. Safe for |kᵢ| ≤ 2¹⁶.
std::int64_t phase4(std::int64_t k1, std::int64_t k2, std::int64_t k3, std::int64_t k4);

/// m·t reduced to [-π, π]. The product is split into a rounded part and its
/// exact error so the reduction keeps full relative accuracy. Requires |m| < 2⁵³.
double reduce_phase(std::int64_t m, double t);

/// e^{i m t} via reduce_phase.
std::complex<double> unit_phase(std::int64_t m, double t);

/// Table of g_j = e^{i j³ t} for |j| ≤ n_max.
///
/// Every oscillating factor of the gauged operators has the form
/// e^{i((Σ kⱼ)³ − Σ kⱼ³) t}; for 3kk₁k₂ and 3(k₁+k₂)(k₂+k₃)(k₁+k₃) this is the
/// cubic identity. Such a factor equals g_k · Π conj(g_{kⱼ}) with k = Σ kⱼ.
class PhaseCache {
 public:
  PhaseCache(double t, int n_max);

  double t() const { return t_; }
  int n_max() const { return n_max_; }

  std::complex<double> cube_phase(int j) const { return g_[static_cast<std::size_t>(j + n_max_)]; }
  // e^{3i k k1 k2 t} with k = k1 + k2.
  std::complex<double> bilinear(int k1, int k2) const;
  // e^{3i (k1+k2)(k2+k3)(k1+k3) t}.
  std::complex<double> trilinear(int k1, int k2, int k3) const;
  // e^{i Φ t} with Φ = phase4(k1, k2, k3, k4).
  std::complex<double> quartic(int k1, int k2, int k3, int k4) const;

  const std::vector<std::complex<double>>& table() const { return g_; }

 private:
  double t_;
  int n_max_;
  std::vector<std::complex<double>> g_;
};

}  // namespace mbkdv
