#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mbkdv {

using Complex = std::complex<double>;

/// Truncation 0 < |k| <= n_max of the 2π-periodic Fourier lattice. Mode 0 is never representable.
class ModeSet {
 public:
  explicit ModeSet(int n_max);

  int n_max() const { return n_max_; }
  bool contains(int k) const { return k != 0 && k >= -n_max_ && k <= n_max_; }
  // Number of representable modes, both signs.
  std::size_t size() const { return 2 * static_cast<std::size_t>(n_max_); }

  friend bool operator==(const ModeSet&, const ModeSet&) = default;

 private:
  int n_max_;
};

struct SobolevIndex {
  double s;
  constexpr explicit SobolevIndex(double value) : s(value) {}
};

/// Fourier coefficients of a real, mean-zero function on [0, 2π].
///
/// Storage is dense over k = -n_max..n_max. The slot of k = 0 exists only to
/// keep index arithmetic literal and is pinned to zero.
class SpectralField {
 public:
  explicit SpectralField(ModeSet modes);
  explicit SpectralField(int n_max) : SpectralField(ModeSet(n_max)) {}

  const ModeSet& modes() const { return modes_; }
  int n_max() const { return modes_.n_max(); }

  Complex operator[](int k) const { return c_[static_cast<std::size_t>(k + modes_.n_max())]; }
  Complex& operator[](int k) { return c_[static_cast<std::size_t>(k + modes_.n_max())]; }
  // Zero outside the mode set instead of undefined behaviour.
  Complex value_or_zero(int k) const { return modes_.contains(k) ? (*this)[k] : Complex{}; }

  // Sets c_k and c_{-k} = conj(c_k) together.
  void set_mode(int k, Complex value);

  // Raw storage, index k + n_max.
  std::span<const Complex> data() const { return c_; }
  std::span<Complex> data() { return c_; }

  bool is_hermitian(double tol = 0.0) const;
  bool is_finite() const;
  bool is_zero() const;
  double max_abs() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);
  // Adds a*o in place.
  SpectralField& axpy(double a, const SpectralField& o);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double a, SpectralField f) { return f *= a; }
  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  ModeSet modes_;
  std::vector<Complex> c_;
};

enum class Gauge { Physical, Interaction };

/// State (u, v) of the coupled system. `t_ref` anchors the gauge relation.
struct SpectralPair {
  SpectralField u;
  SpectralField v;
  Gauge gauge = Gauge::Interaction;
  double t_ref = 0.0;

  SpectralPair(SpectralField u_in, SpectralField v_in, Gauge g = Gauge::Interaction, double t = 0.0);
  static SpectralPair zero(int n_max, Gauge g = Gauge::Interaction, double t = 0.0);

  int n_max() const { return u.n_max(); }
  bool is_finite() const { return u.is_finite() && v.is_finite(); }

  SpectralPair& operator+=(const SpectralPair& o);
  SpectralPair& operator-=(const SpectralPair& o);
  SpectralPair& operator*=(double a);
  SpectralPair& axpy(double a, const SpectralPair& o);

  friend SpectralPair operator+(SpectralPair a, const SpectralPair& b) { return a += b; }
  friend SpectralPair operator-(SpectralPair a, const SpectralPair& b) { return a -= b; }
  friend SpectralPair operator*(double a, SpectralPair p) { return p *= a; }
};

/// Builds a Hermitian field. Entries may list k > 0 only (conjugates filled
/// in) or both halves, which must then be exact conjugates.
SpectralField make_field(int n_max, std::span<const std::pair<int, Complex>> entries);

/// (Σ_{k≠0} |k|^{2s} |c_k|²)^{1/2}. For s = 0 this is ‖f‖_{L²}/√(2π).
double sobolev_norm(const SpectralField& f, SobolevIndex s);
/// Product norm of (Ḣ^s)²: sqrt(‖u‖² + ‖v‖²).
double sobolev_norm(const SpectralPair& p, SobolevIndex s);
/// Real part of Σ_k f_k conj(g_k), the Ḣ⁰ inner product.
double inner_product(const SpectralField& f, const SpectralField& g);

SpectralField project_low(const SpectralField& f, int n_cut);
SpectralField project_high(const SpectralField& f, int n_cut);
SpectralPair project_low(const SpectralPair& p, int n_cut);
SpectralPair project_high(const SpectralPair& p, int n_cut);

/// Copies into a mode set of a different size, zero padding or truncating.
SpectralField resized(const SpectralField& f, int n_max);
SpectralPair resized(const SpectralPair& p, int n_max);

/// Switches between u_k = e^{ik³t} U_k (Interaction) and U_k (Physical).
/// A pair already in `target` is returned unchanged.
SpectralPair gauge(const SpectralPair& p, double t, Gauge target);

/// 𝓔 = 2‖u‖² + 2‖v‖² + ‖u − v‖² in Ḣ⁰.
double energy_functional(const SpectralPair& p);

/// H = ½∫(A_x² + B_x² + A²B) dx with A = (U − V)/√2, B = (U + V)/2.
/// Requires the Physical gauge.
double hamiltonian(const SpectralPair& p);

/// Deterministic random field with |c_k| = amplitude·|k|^{-s-0.6} and uniform phases.
SpectralField random_field(std::uint64_t seed, int n_max, SobolevIndex s, double amplitude);
/// Deterministic random field with |c_k| uniform in [0, amplitude] and uniform phases.
SpectralField uniform_random_field(std::uint64_t seed, int n_max, double amplitude);

}  // namespace mbkdv
