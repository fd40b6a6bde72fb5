#include "mbkdv/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mbkdv/phase.hpp"
#include "mbkdv/rng.hpp"

namespace mbkdv {

namespace {

void require_same_modes(const SpectralField& a, const SpectralField& b, const char* what) {
  if (a.modes() != b.modes()) throw std::invalid_argument(std::string(what) + ": mismatched mode sets");
}

}  // namespace

ModeSet::ModeSet(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw std::invalid_argument("ModeSet: n_max must be >= 1");
}

SpectralField::SpectralField(ModeSet modes) : modes_(modes), c_(2 * static_cast<std::size_t>(modes.n_max()) + 1) {}

void SpectralField::set_mode(int k, Complex value) {
  if (!modes_.contains(k)) throw std::out_of_range("set_mode: k outside the mode set");
  (*this)[k] = value;
  (*this)[-k] = std::conj(value);
}

bool SpectralField::is_hermitian(double tol) const {
  if (c_[static_cast<std::size_t>(n_max())] != Complex{}) return false;
  for (int k = 1; k <= n_max(); ++k) {
    if (std::abs((*this)[-k] - std::conj((*this)[k])) > tol) return false;
  }
  return true;
}

bool SpectralField::is_finite() const {
  return std::all_of(c_.begin(), c_.end(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

bool SpectralField::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](const Complex& z) { return z == Complex{}; });
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& z : c_) m = std::max(m, std::abs(z));
  return m;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_modes(*this, o, "operator+=");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_modes(*this, o, "operator-=");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& z : c_) z *= a;
  return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& o) {
  require_same_modes(*this, o, "axpy");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * o.c_[i];
  return *this;
}

SpectralPair::SpectralPair(SpectralField u_in, SpectralField v_in, Gauge g, double t)
    : u(std::move(u_in)), v(std::move(v_in)), gauge(g), t_ref(t) {
  require_same_modes(u, v, "SpectralPair");
}

SpectralPair SpectralPair::zero(int n_max, Gauge g, double t) {
  return SpectralPair(SpectralField(n_max), SpectralField(n_max), g, t);
}

SpectralPair& SpectralPair::operator+=(const SpectralPair& o) {
  u += o.u;
  v += o.v;
  return *this;
}

SpectralPair& SpectralPair::operator-=(const SpectralPair& o) {
  u -= o.u;
  v -= o.v;
  return *this;
}

SpectralPair& SpectralPair::operator*=(double a) {
  u *= a;
  v *= a;
  return *this;
}

SpectralPair& SpectralPair::axpy(double a, const SpectralPair& o) {
  u.axpy(a, o.u);
  v.axpy(a, o.v);
  return *this;
}

SpectralField make_field(int n_max, std::span<const std::pair<int, Complex>> entries) {
  SpectralField f{ModeSet(n_max)};
  std::vector<char> seen(2 * static_cast<std::size_t>(n_max) + 1, 0);
  auto slot = [&](int k) -> char& { return seen[static_cast<std::size_t>(k + n_max)]; };
  for (const auto& [k, value] : entries) {
    if (k == 0) throw std::invalid_argument("make_field: mode 0 is excluded (mean-zero fields)");
    if (std::abs(k) > n_max) throw std::invalid_argument("make_field: |k| exceeds n_max");
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
      throw std::invalid_argument("make_field: non-finite amplitude");
    if (slot(k)) throw std::invalid_argument("make_field: mode listed twice");
    if (slot(-k) && f[k] != value) {
      throw std::invalid_argument("make_field: entries for k and -k are not complex conjugates");
    }
    slot(k) = 1;
    f[k] = value;
    f[-k] = std::conj(value);
  }
  return f;
}

double sobolev_norm(const SpectralField& f, SobolevIndex s) {
  double acc = 0.0;
  for (int k = 1; k <= f.n_max(); ++k) {
    const double w = std::pow(static_cast<double>(k), 2.0 * s.s);
    acc += w * (std::norm(f[k]) + std::norm(f[-k]));
  }
  return std::sqrt(acc);
}

double sobolev_norm(const SpectralPair& p, SobolevIndex s) {
  return std::hypot(sobolev_norm(p.u, s), sobolev_norm(p.v, s));
}

double inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_modes(f, g, "inner_product");
  double acc = 0.0;
  for (int k = -f.n_max(); k <= f.n_max(); ++k) acc += (f[k] * std::conj(g[k])).real();
  return acc;
}

SpectralField project_low(const SpectralField& f, int n_cut) {
  if (n_cut < 1) throw std::invalid_argument("project_low: n_cut must be >= 1");
  SpectralField out{f.modes()};
  const int m = std::min(n_cut, f.n_max());
  for (int k = -m; k <= m; ++k) out[k] = f[k];
  return out;
}

SpectralField project_high(const SpectralField& f, int n_cut) {
  if (n_cut < 1) throw std::invalid_argument("project_high: n_cut must be >= 1");
  SpectralField out{f.modes()};
  for (int k = n_cut + 1; k <= f.n_max(); ++k) {
    out[k] = f[k];
    out[-k] = f[-k];
  }
  return out;
}

SpectralPair project_low(const SpectralPair& p, int n_cut) {
  return SpectralPair(project_low(p.u, n_cut), project_low(p.v, n_cut), p.gauge, p.t_ref);
}

SpectralPair project_high(const SpectralPair& p, int n_cut) {
  return SpectralPair(project_high(p.u, n_cut), project_high(p.v, n_cut), p.gauge, p.t_ref);
}

SpectralField resized(const SpectralField& f, int n_max) {
  SpectralField out{ModeSet(n_max)};
  const int m = std::min(n_max, f.n_max());
  for (int k = -m; k <= m; ++k) out[k] = f[k];
  return out;
}

SpectralPair resized(const SpectralPair& p, int n_max) {
  return SpectralPair(resized(p.u, n_max), resized(p.v, n_max), p.gauge, p.t_ref);
}

SpectralPair gauge(const SpectralPair& p, double t, Gauge target) {
  if (p.gauge == target) return p;
  const PhaseCache cache(t, p.n_max());
  const bool to_interaction = target == Gauge::Interaction;
  SpectralPair out = p;
  for (int k = -p.n_max(); k <= p.n_max(); ++k) {
    const Complex g = to_interaction ? cache.cube_phase(k) : std::conj(cache.cube_phase(k));
    out.u[k] = p.u[k] * g;
    out.v[k] = p.v[k] * g;
  }
  out.gauge = target;
  out.t_ref = t;
  return out;
}

double energy_functional(const SpectralPair& p) {
  const double u2 = std::pow(sobolev_norm(p.u, SobolevIndex(0)), 2);
  const double v2 = std::pow(sobolev_norm(p.v, SobolevIndex(0)), 2);
  const double d2 = std::pow(sobolev_norm(p.u - p.v, SobolevIndex(0)), 2);
  return 2.0 * u2 + 2.0 * v2 + d2;
}

double hamiltonian(const SpectralPair& p) {
  if (p.gauge != Gauge::Physical) throw std::invalid_argument("hamiltonian: requires Physical gauge");
  const int n = p.n_max();
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  SpectralField a = p.u - p.v;
  a *= inv_sqrt2;
  SpectralField b = p.u + p.v;
  b *= 0.5;

  double quad = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double k2 = static_cast<double>(k) * k;
    quad += k2 * (std::norm(a[k]) + std::norm(a[-k]) + std::norm(b[k]) + std::norm(b[-k]));
  }
  // Σ_{k1+k2+k3=0} A_{k1} A_{k2} B_{k3}, ascending k1 then k2.
  Complex cubic{};
  for (int k1 = -n; k1 <= n; ++k1) {
    if (k1 == 0) continue;
    for (int k2 = -n; k2 <= n; ++k2) {
      const int k3 = -(k1 + k2);
      if (k2 == 0 || k3 == 0 || std::abs(k3) > n) continue;
      cubic += a[k1] * a[k2] * b[k3];
    }
  }
  return 2.0 * std::numbers::pi * (0.5 * quad + 0.5 * cubic.real());
}

namespace {

SpectralField random_with_moduli(std::uint64_t seed, int n_max, auto&& modulus) {
  Rng rng(splitmix64(seed));
  SpectralField f{ModeSet(n_max)};
  for (int k = 1; k <= n_max; ++k) {
    const double r = modulus(k, rng);
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    f.set_mode(k, std::polar(r, theta));
  }
  return f;
}

}  // namespace

SpectralField random_field(std::uint64_t seed, int n_max, SobolevIndex s, double amplitude) {
  return random_with_moduli(seed, n_max, [&](int k, Rng&) {
    return amplitude * std::pow(static_cast<double>(k), -s.s - 0.6);
  });
}

SpectralField uniform_random_field(std::uint64_t seed, int n_max, double amplitude) {
  return random_with_moduli(seed ^ 0x5bd1e995ULL, n_max, [&](int, Rng& rng) { return amplitude * uniform01(rng); });
}

}  // namespace mbkdv
